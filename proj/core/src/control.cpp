#include "uwbloc/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwbloc {

RegimeDecision decide_regime(const std::vector<double>& probs, double p_th) {
  if (probs.empty())
    throw std::invalid_argument("decide_regime: no assessments");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("decide_regime: probability out of range");
    sum += p;
  }
  double p_avg = sum / probs.size();
  Regime regime = p_avg < p_th ? Regime::predominantly_los
                               : Regime::predominantly_nlos;
  return {regime, p_avg, p_th};
}

double update_frequency(double p_avg, double p_th, double base_hz,
                        double min_hz) {
  if (!(p_avg >= 0.0) || p_avg >= p_th)
    throw std::invalid_argument(
        "update_frequency: p_avg must lie in [0, p_th)");
  if (p_avg == 0.0) return min_hz;
  // The ratio p_th / p_avg lands epsilon under an integer for divisors like
  // 0.1, so nudge before flooring to keep the slowdown factor exact.
  double k = std::floor(p_th / p_avg + 1e-9);
  if (k < 1.0) k = 1.0;
  return std::clamp(base_hz / k, min_hz, base_hz);
}

SelectionResult select_healthy(const std::vector<SelectionItem>& items,
                               int initiator_id, double p_th) {
  if (items.empty()) throw std::invalid_argument("select_healthy: no items");
  bool saw_initiator = false;
  for (const SelectionItem& it : items) {
    if (!(it.p >= 0.0 && it.p <= 1.0))
      throw std::invalid_argument("select_healthy: probability out of range");
    if (it.anchor_id == initiator_id) {
      saw_initiator = true;
      if (it.alpha_s)
        throw std::invalid_argument(
            "select_healthy: initiator cannot carry a measurement");
    } else if (!it.alpha_s) {
      throw std::invalid_argument(
          "select_healthy: responder without measurement");
    }
    for (const SelectionItem& other : items)
      if (&other != &it && other.anchor_id == it.anchor_id)
        throw std::invalid_argument("select_healthy: duplicate anchor id");
  }
  if (!saw_initiator)
    throw std::invalid_argument("select_healthy: initiator not in round");

  std::vector<SelectionItem> pool = items;
  auto mean_p = [&pool] {
    double s = 0.0;
    for (const SelectionItem& it : pool) s += it.p;
    return s / pool.size();
  };
  while (pool.size() >= 3 && mean_p() > p_th) {
    auto worst = pool.begin();
    for (auto it = pool.begin(); it != pool.end(); ++it) {
      if (it->p > worst->p ||
          (it->p == worst->p && it->anchor_id > worst->anchor_id))
        worst = it;
    }
    pool.erase(worst);
  }

  SelectionResult result;
  std::sort(pool.begin(), pool.end(),
            [](const SelectionItem& a, const SelectionItem& b) {
              return a.anchor_id < b.anchor_id;
            });
  for (const SelectionItem& it : pool) result.surviving_ids.push_back(it.anchor_id);
  if (pool.size() < 3) {
    result.verdict = SelectionVerdict::fully_nlos;
    return result;
  }
  result.verdict = SelectionVerdict::partially_los;

  bool initiator_alive = false;
  for (const SelectionItem& it : pool)
    if (it.anchor_id == initiator_id) initiator_alive = true;

  if (initiator_alive) {
    result.reference_id = initiator_id;
    for (const SelectionItem& it : pool)
      if (it.anchor_id != initiator_id) result.tdoas.push_back(it);
  } else {
    auto ref = pool.begin();
    for (auto it = pool.begin(); it != pool.end(); ++it) {
      if (it->p < ref->p ||
          (it->p == ref->p && it->anchor_id < ref->anchor_id))
        ref = it;
    }
    result.reference_id = ref->anchor_id;
    double base = *ref->alpha_s;
    for (const SelectionItem& it : pool) {
      if (it.anchor_id == result.reference_id) continue;
      SelectionItem rebased = it;
      rebased.alpha_s = *it.alpha_s - base;
      result.tdoas.push_back(rebased);
    }
  }
  return result;
}

Motion motion_gate(std::span<const ImuSample> window, double threshold_mps2) {
  if (window.size() < 8) return Motion::moving;
  double mean = 0.0;
  for (const ImuSample& s : window) mean += s.accel.norm();
  mean /= window.size();
  double var = 0.0;
  for (const ImuSample& s : window) {
    double d = s.accel.norm() - mean;
    var += d * d;
  }
  var /= window.size();
  return std::sqrt(var) > threshold_mps2 ? Motion::moving
                                         : Motion::stationary;
}

}  // namespace uwbloc
