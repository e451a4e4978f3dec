#pragma once

#include <vector>

#include "uwbloc/channel.hpp"
#include "uwbloc/geometry.hpp"
#include "uwbloc/scenario.hpp"

namespace uwbloc {

enum class EstimateSource { least_squares, rnn_predicted };

struct PositionEstimate {
  double t = 0.0;
  Vec2 xy;
  EstimateSource source = EstimateSource::least_squares;
  int iterations = 0;
  double residual_norm_m = 0.0;
};

struct SolverOptions {
  int max_iterations = 50;
  double step_tol_m = 1e-6;
  double lambda0 = 1e-3;
  double user_z = kUserHeight;
};

// Solves for the 2-D user position on the z = user_z plane from signed
// arrival-time differences against the reference anchor, by Gauss-Newton on
// r_j = (d_j - d_ref) - c * alpha_j with Levenberg damping (lambda grows
// tenfold when a step raises the cost, shrinks tenfold on success).
// Requires at least two measurements against distinct non-collinear anchors.
// Throws std::invalid_argument on degenerate geometry or malformed input and
// numerical_error when damping cannot rescue a diverging iteration.
PositionEstimate solve_tdoa(const Cluster& cluster, int reference_id,
                            const std::vector<TdoaMeasurement>& tdoas,
                            Vec2 initial_guess, double t,
                            const SolverOptions& opts = {});

// Forward model: the arrival-time difference each responder would report if
// the user stood at xy. Signed, seconds, ordered by ascending responder id.
std::vector<TdoaMeasurement> augment_tdoa(const Cluster& cluster, Vec2 xy,
                                          double user_z = kUserHeight);

}  // namespace uwbloc
