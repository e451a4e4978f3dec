#include <benchmark/benchmark.h>

#include <vector>

#include "uwbloc/channel.hpp"
#include "uwbloc/ecir.hpp"
#include "uwbloc/localizer.hpp"
#include "uwbloc/nlos.hpp"
#include "uwbloc/nn/layers.hpp"
#include "uwbloc/nn/lstm.hpp"
#include "uwbloc/pipeline.hpp"
#include "uwbloc/rng.hpp"
#include "uwbloc/rnn.hpp"

namespace {

using namespace uwbloc;

ECir bench_ecir() {
  CirFrame frame = synthesize_cir(ChannelState::nlos, 6.0, 7);
  return extract_ecir(frame);
}

void BM_Conv1dForward(benchmark::State& state) {
  nn::Conv1d conv(9, 1, 64, 11);
  nn::Tensor x({kECirLength, 1});
  Rng rng(3);
  for (double& v : x.data) v = rng.normal(0.0, 1.0);
  for (auto _ : state) {
    nn::Tensor y = conv.forward(x, false);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(BM_Conv1dForward);

void BM_ClassifierForward(benchmark::State& state) {
  nn::Sequential net = build_classifier(5);
  ECir e = bench_ecir();
  for (auto _ : state) {
    double p = predict_nlos(net, e);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_ClassifierForward);

void BM_LstmSequenceForward(benchmark::State& state) {
  nn::Lstm lstm(12, 32, 17);
  nn::Tensor x({kSequenceLength, 12});
  Rng rng(9);
  for (double& v : x.data) v = rng.normal(0.0, 1.0);
  for (auto _ : state) {
    nn::Tensor y = lstm.forward(x);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(BM_LstmSequenceForward);

void BM_SolveTdoa(benchmark::State& state) {
  Cluster cluster = build_default_lab();
  Vec2 truth{3.4, 2.2};
  std::vector<TdoaMeasurement> tdoas = augment_tdoa(cluster, truth);
  Vec2 guess{4.5, 3.0};
  for (auto _ : state) {
    PositionEstimate est =
        solve_tdoa(cluster, cluster.initiator().id, tdoas, guess, 0.0);
    benchmark::DoNotOptimize(est.xy);
  }
}
BENCHMARK(BM_SolveTdoa);

void BM_MeasureRound(benchmark::State& state) {
  Scenario s;
  s.region = {0.0, 0.0, 9.0, 6.0};
  s.cluster = build_default_lab();
  s.trajectory.waypoints = {{0.0, {2.0, 2.0}}, {10.0, {7.0, 4.0}}};
  s.duration_s = 10.0;
  int round_id = 0;
  for (auto _ : state) {
    auto round = measure_round(s, {3.0, 2.5}, 0.5, round_id++, 11);
    benchmark::DoNotOptimize(round);
  }
}
BENCHMARK(BM_MeasureRound);

void BM_PipelineShortRun(benchmark::State& state) {
  Scenario s;
  s.region = {0.0, 0.0, 9.0, 6.0};
  s.cluster = build_default_lab();
  s.trajectory.waypoints = {{0.0, {2.0, 2.0}}, {5.0, {7.0, 4.0}}};
  s.duration_s = 5.0;
  s.seed = 23;
  nn::Sequential net = build_classifier(5);
  RnnPredictor predictor(6, kDefaultPredictionSteps, 5);
  PipelineModels models;
  models.nlos_prob = [&net](const ECir& e) { return predict_nlos(net, e); };
  models.predictor = &predictor;
  PipelineConfig cfg;
  for (auto _ : state) {
    RunMetrics m = run(s, Variant::proposed, models, cfg);
    benchmark::DoNotOptimize(m.rmse_m);
  }
  state.SetItemsProcessed(state.iterations() * 80);  // ticks per run
}
BENCHMARK(BM_PipelineShortRun);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
