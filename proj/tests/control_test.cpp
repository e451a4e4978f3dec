#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "uwbloc/control.hpp"
#include "uwbloc/rng.hpp"
#include "uwbloc/scenario.hpp"

using namespace uwbloc;

namespace {

// Reference selector: smallest k such that dropping the k largest
// probabilities (ties to the higher id) brings the mean of the rest to the
// threshold or below; nullopt when no admissible k leaves at least three
// survivors. The mean is summed in id order, exactly like the selector's
// pool mean, so boundary cases agree to the last bit.
std::optional<int> oracle_keep_count(const std::vector<double>& probs,
                                     double p_th) {
  const int n = static_cast<int>(probs.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a > b;
  });
  for (int k = 0; n - k >= 3; ++k) {
    std::vector<bool> removed(n, false);
    for (int i = 0; i < k; ++i) removed[order[i]] = true;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      if (!removed[i]) sum += probs[i];
    if (sum / (n - k) <= p_th) return n - k;
  }
  return std::nullopt;
}

std::vector<SelectionItem> items_from(const std::vector<double>& probs,
                                      int initiator_id) {
  std::vector<SelectionItem> items;
  for (size_t i = 0; i < probs.size(); ++i) {
    SelectionItem it;
    it.anchor_id = static_cast<int>(i) + 1;
    it.p = probs[i];
    if (it.anchor_id != initiator_id) it.alpha_s = 1e-9 * it.anchor_id;
    items.push_back(it);
  }
  return items;
}

}  // namespace

TEST_CASE("frequency follows the reciprocal floor law") {
  struct Row {
    double p_avg, f;
  };
  const Row table[] = {{0.49, 5.0}, {0.45, 5.0}, {0.25, 2.5}, {0.1, 1.0},
                       {0.05, 0.5}, {0.01, 0.1}, {0.005, 0.1}};
  for (const Row& row : table)
    CHECK(update_frequency(row.p_avg, 0.5, 5.0, 0.1) ==
          doctest::Approx(row.f).epsilon(1e-12));
}

TEST_CASE("a perfectly clean channel rests at the floor rate") {
  CHECK(update_frequency(0.0, 0.5, 5.0, 0.1) == doctest::Approx(0.1));
}

TEST_CASE("frequency updates reject out-of-regime inputs") {
  CHECK_THROWS_AS(update_frequency(0.5, 0.5, 5.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(update_frequency(0.7, 0.5, 5.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(update_frequency(-0.1, 0.5, 5.0, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(update_frequency(std::nan(""), 0.5, 5.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("the quantizer lands exactly on the divisor boundaries") {
  // 0.5 / 0.25 = 2 exactly; the floor must not slip to 1 through rounding
  CHECK(update_frequency(0.25, 0.5, 5.0, 0.1) == doctest::Approx(2.5));
  CHECK(update_frequency(0.1, 0.5, 5.0, 0.1) == doctest::Approx(1.0));
  CHECK(update_frequency(0.05, 0.5, 5.0, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("sweeping the probability down yields a non increasing staircase") {
  double prev = 1e9;
  int distinct = 0;
  for (double p = 0.49; p >= 0.005; p -= 0.001) {
    double f = update_frequency(p, 0.5, 5.0, 0.1);
    CHECK(f <= prev + 1e-15);
    if (std::fabs(f - prev) > 1e-12) ++distinct;
    prev = f;
  }
  CHECK(distinct >= 5);  // piecewise constant with several steps
}

TEST_CASE("regime decision is strict at the threshold") {
  CHECK((decide_regime({0.5, 0.5}, 0.5).regime ==
         Regime::predominantly_nlos));
  CHECK((decide_regime({0.4999, 0.5}, 0.5).regime ==
         Regime::predominantly_los));
  CHECK(decide_regime({0.2, 0.4}, 0.5).p_avg == doctest::Approx(0.3));
  CHECK_THROWS_AS(decide_regime({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(decide_regime({1.2}, 0.5), std::invalid_argument);
}

TEST_CASE("selection matches the brute force oracle on random draws") {
  Rng rng(2024);
  for (int trial = 0; trial < 3000; ++trial) {
    int n = rng.uniform_int(3, 8);
    std::vector<double> probs;
    for (int i = 0; i < n; ++i)
      probs.push_back(rng.uniform_int(0, 10) / 10.0);
    auto items = items_from(probs, 1);
    SelectionResult res = select_healthy(items, 1, 0.5);
    auto want = oracle_keep_count(probs, 0.5);
    if (want) {
      CHECK((res.verdict == SelectionVerdict::partially_los));
      CHECK(static_cast<int>(res.surviving_ids.size()) == *want);
      double mean = 0.0;
      for (int id : res.surviving_ids) mean += probs[id - 1];
      CHECK(mean / res.surviving_ids.size() <= 0.5 + 1e-12);
    } else {
      CHECK((res.verdict == SelectionVerdict::fully_nlos));
      CHECK(res.tdoas.empty());
    }
  }
}

TEST_CASE("an exactly threshold mean removes nothing") {
  auto items = items_from({0.4, 0.5, 0.6}, 1);  // mean exactly 0.5
  SelectionResult res = select_healthy(items, 1, 0.5);
  CHECK((res.verdict == SelectionVerdict::partially_los));
  CHECK(res.surviving_ids == std::vector<int>({1, 2, 3}));
}

TEST_CASE("probability ties evict the higher anchor id") {
  auto items = items_from({0.2, 0.9, 0.9, 0.2}, 1);
  SelectionResult res = select_healthy(items, 1, 0.5);
  CHECK((res.verdict == SelectionVerdict::partially_los));
  // one removal suffices: (0.2 + 0.9 + 0.2) / 3 = 0.4333; id 3 goes first
  CHECK(res.surviving_ids == std::vector<int>({1, 2, 4}));
}

TEST_CASE("selection can stop below three survivors only by verdict") {
  // final mean can only be checked with >= 3 left; dropping to 2 is fully
  // obstructed territory
  auto items = items_from({0.9, 0.9, 0.9, 0.9}, 1);
  SelectionResult res = select_healthy(items, 1, 0.5);
  CHECK((res.verdict == SelectionVerdict::fully_nlos));
  CHECK(res.reference_id == -1);
}

TEST_CASE("culling the initiator rebases the differences") {
  std::vector<SelectionItem> items;
  items.push_back({1, 0.95, std::nullopt});  // initiator, very obstructed
  items.push_back({2, 0.10, 4e-9});
  items.push_back({3, 0.50, 7e-9});
  items.push_back({4, 0.50, -2e-9});
  // mean 0.5125 > 0.5; dropping the initiator alone brings it to 0.367
  SelectionResult res = select_healthy(items, 1, 0.5);
  CHECK((res.verdict == SelectionVerdict::partially_los));
  // new reference is the lowest-probability survivor: anchor 2
  CHECK(res.reference_id == 2);
  REQUIRE(res.tdoas.size() == 2);
  CHECK(res.tdoas[0].anchor_id == 3);
  CHECK(*res.tdoas[0].alpha_s == doctest::Approx(3e-9));
  CHECK(res.tdoas[1].anchor_id == 4);
  CHECK(*res.tdoas[1].alpha_s == doctest::Approx(-6e-9));
}

TEST_CASE("reference ties resolve to the lower anchor id") {
  std::vector<SelectionItem> items;
  items.push_back({1, 0.95, std::nullopt});
  items.push_back({2, 0.40, 4e-9});
  items.push_back({3, 0.40, 7e-9});
  items.push_back({4, 0.45, -2e-9});
  // mean 0.55 culls the initiator; anchors 2 and 3 tie for the reference
  SelectionResult res = select_healthy(items, 1, 0.5);
  CHECK(res.reference_id == 2);
}

TEST_CASE("selection validates its inputs") {
  CHECK_THROWS_AS(select_healthy({}, 1, 0.5), std::invalid_argument);
  // initiator missing
  std::vector<SelectionItem> items = {{2, 0.1, 1e-9}, {3, 0.1, 2e-9}};
  CHECK_THROWS_AS(select_healthy(items, 1, 0.5), std::invalid_argument);
  // initiator with a difference value
  items = {{1, 0.1, 5e-9}, {2, 0.1, 1e-9}, {3, 0.1, 2e-9}};
  CHECK_THROWS_AS(select_healthy(items, 1, 0.5), std::invalid_argument);
  // responder without one
  items = {{1, 0.1, std::nullopt}, {2, 0.1, std::nullopt}, {3, 0.1, 2e-9}};
  CHECK_THROWS_AS(select_healthy(items, 1, 0.5), std::invalid_argument);
  // duplicate ids
  items = {{1, 0.1, std::nullopt}, {2, 0.1, 1e-9}, {2, 0.1, 2e-9}};
  CHECK_THROWS_AS(select_healthy(items, 1, 0.5), std::invalid_argument);
  // probability out of range
  items = {{1, 1.1, std::nullopt}, {2, 0.1, 1e-9}, {3, 0.1, 2e-9}};
  CHECK_THROWS_AS(select_healthy(items, 1, 0.5), std::invalid_argument);
}

TEST_CASE("short imu windows always report motion") {
  std::vector<ImuSample> w(7);
  for (auto& s : w) s.accel = {0.0, 0.0, 9.8};
  CHECK((motion_gate({w.data(), w.size()}) == Motion::moving));
}

TEST_CASE("the gate separates standing from walking") {
  Trajectory still;
  still.waypoints = {{0.0, {3.0, 3.0}}, {10.0, {3.0, 3.0}}};
  auto quiet = synthesize_imu(still, 10.0, 5);
  CHECK((motion_gate({quiet.data() + 16, 16}) == Motion::stationary));

  Trajectory walk;
  walk.waypoints = {{0.0, {1.0, 1.0}}, {10.0, {8.0, 5.0}}};
  auto busy = synthesize_imu(walk, 10.0, 5);
  CHECK((motion_gate({busy.data() + 16, 16}) == Motion::moving));
}
