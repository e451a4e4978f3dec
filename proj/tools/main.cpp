// Command line front end for the localization simulator: corpus generation,
// model training, pipeline runs and run comparison.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uwbloc/channel.hpp"
#include "uwbloc/errors.hpp"
#include "uwbloc/nlos.hpp"
#include "uwbloc/pipeline.hpp"
#include "uwbloc/rng.hpp"
#include "uwbloc/rnn.hpp"
#include "uwbloc/scenario.hpp"

namespace {

using nlohmann::json;

bool verbose_enabled() {
  const char* v = std::getenv("TDOA_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log_note(const std::string& msg) {
  if (verbose_enabled()) std::cerr << "[uwbloc] " << msg << "\n";
}

uwbloc::Scenario default_base_scenario() {
  uwbloc::Scenario s;
  s.region = {0.0, 0.0, 9.0, 6.0};
  s.cluster = uwbloc::build_default_lab();
  s.trajectory.waypoints = {{0.0, {4.5, 3.0}}, {1.0, {4.5, 3.0}}};
  s.duration_s = 1.0;
  return s;
}

int cmd_gen_corpus(const std::string& kind, const std::string& out_path,
                   int count, uint64_t seed, const std::string& scenario_path,
                   int n_out) {
  if (count < 1) throw uwbloc::config_error("--count must be positive");
  if (kind == "cir") {
    std::ofstream out(out_path);
    if (!out) throw uwbloc::data_error("cannot open " + out_path);
    uwbloc::write_corpus_header(out);
    uwbloc::Rng rng(uwbloc::derive_seed(seed, 0xd157, 0));
    for (int i = 0; i < count; ++i) {
      double d = rng.uniform(1.5, 10.0);
      uwbloc::CirFrame los = uwbloc::synthesize_cir(
          uwbloc::ChannelState::los, d, uwbloc::derive_seed(seed, 0xc19, 2 * i));
      uwbloc::write_corpus_row(out, i, los);
      d = rng.uniform(1.5, 10.0);
      uwbloc::CirFrame nlos = uwbloc::synthesize_cir(
          uwbloc::ChannelState::nlos, d,
          uwbloc::derive_seed(seed, 0xc19, 2 * i + 1));
      uwbloc::write_corpus_row(out, i, nlos);
    }
    if (!out) throw uwbloc::data_error("write failed for " + out_path);
    log_note("wrote " + std::to_string(2 * count) + " frames to " + out_path);
    std::cout << "corpus " << out_path << ": " << 2 * count
              << " labeled frames\n";
    return 0;
  }
  if (kind == "seq") {
    uwbloc::Scenario base = scenario_path.empty()
                                ? default_base_scenario()
                                : uwbloc::load_scenario(scenario_path);
    std::vector<uwbloc::SequenceSample> samples =
        uwbloc::generate_training_sequences(base, count, n_out, seed);
    uwbloc::write_sequence_corpus(out_path, samples);
    log_note("wrote " + std::to_string(samples.size()) + " sequences to " +
             out_path);
    std::cout << "corpus " << out_path << ": " << samples.size()
              << " sequences\n";
    return 0;
  }
  throw uwbloc::config_error("--kind must be cir or seq");
}

int cmd_train_nlos(const std::string& corpus, const std::string& out_path,
                   int epochs, uint64_t seed, int jobs,
                   const std::string& metrics_path) {
  std::vector<uwbloc::NlosSample> data = uwbloc::load_cir_corpus(corpus);
  log_note("loaded " + std::to_string(data.size()) + " frames");
  uwbloc::nn::Sequential net = uwbloc::build_classifier(seed);
  uwbloc::NlosTrainOptions opt;
  opt.max_epochs = epochs;
  opt.seed = seed;
  opt.jobs = jobs;
  uwbloc::NlosTrainReport report;
  if (epochs > 0) report = uwbloc::train_classifier(net, data, opt);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", report.val_accuracy);
  uwbloc::save_classifier(out_path, net,
                          {{"val_accuracy", buf},
                           {"epochs", std::to_string(report.epochs_run)},
                           {"seed", std::to_string(seed)}});
  if (!metrics_path.empty()) {
    json j;
    j["val_accuracy"] = report.val_accuracy;
    j["val_loss"] = report.val_loss;
    j["train_loss"] = report.train_loss;
    j["epochs_run"] = report.epochs_run;
    j["confusion"] = {{"tn", report.tn},
                      {"fp", report.fp},
                      {"fn", report.fn},
                      {"tp", report.tp}};
    std::ofstream m(metrics_path);
    if (!m) throw uwbloc::data_error("cannot open " + metrics_path);
    m << j.dump(2) << "\n";
  }
  std::printf("classifier %s: val_accuracy %.4f after %d epochs\n",
              out_path.c_str(), report.val_accuracy, report.epochs_run);
  return 0;
}

int cmd_train_rnn(const std::string& corpus, const std::string& out_path,
                  int epochs, uint64_t seed, const std::string& metrics_path) {
  std::vector<uwbloc::SequenceSample> data =
      uwbloc::load_sequence_corpus(corpus);
  if (data.empty()) throw uwbloc::data_error("empty sequence corpus");
  log_note("loaded " + std::to_string(data.size()) + " sequences");
  int feat_dim = data.front().features.shape[1];
  int tdoa_dim = feat_dim - 6;
  int n_out = data.front().targets.shape[0];
  if (tdoa_dim < 1)
    throw uwbloc::data_error("sequence corpus feature width too small");
  uwbloc::RnnPredictor net(tdoa_dim, n_out, seed);
  uwbloc::RnnTrainOptions opt;
  opt.max_epochs = epochs;
  opt.seed = seed;
  uwbloc::RnnTrainReport report;
  if (epochs > 0) report = uwbloc::train_predictor(net, data, opt);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", report.val_rmse_m);
  net.save(out_path, {{"val_rmse_m", buf},
                      {"epochs", std::to_string(report.epochs_run)},
                      {"seed", std::to_string(seed)}});
  if (!metrics_path.empty()) {
    json j;
    j["val_rmse_m"] = report.val_rmse_m;
    j["train_rmse_m"] = report.train_rmse_m;
    j["epochs_run"] = report.epochs_run;
    std::ofstream m(metrics_path);
    if (!m) throw uwbloc::data_error("cannot open " + metrics_path);
    m << j.dump(2) << "\n";
  }
  std::printf("predictor %s: val_rmse %.4f m after %d epochs\n",
              out_path.c_str(), report.val_rmse_m, report.epochs_run);
  return 0;
}

void apply_channel_overrides(uwbloc::ChannelConfig& cfg, const json& j) {
  auto grab = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  grab("amp_ref", cfg.amp_ref);
  grab("shadowing_sigma", cfg.shadowing_sigma);
  grab("noise_sigma", cfg.noise_sigma);
  grab("tau_los", cfg.tau_los);
  grab("tau_nlos", cfg.tau_nlos);
  grab("sigma_los_ns", cfg.sigma_los_ns);
  grab("sigma_nlos_ns", cfg.sigma_nlos_ns);
  grab("nlos_bias_mean_ns", cfg.nlos_bias_mean_ns);
  grab("outage_los", cfg.outage_los);
  grab("outage_nlos", cfg.outage_nlos);
}

int cmd_run(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw uwbloc::config_error("cannot open config " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw uwbloc::config_error(std::string("config parse failure: ") +
                               e.what());
  }
  static const std::vector<std::string> known = {
      "scenario",       "variant",         "seed",
      "out_dir",        "nlos_checkpoint", "rnn_checkpoint",
      "channel",        "p_th",            "base_hz",
      "min_hz",         "lpf_weight",      "motion_window_s"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw uwbloc::config_error("unknown config key '" + it.key() + "'");
  }
  if (!j.contains("scenario") || !j.contains("variant") ||
      !j.contains("out_dir"))
    throw uwbloc::config_error(
        "config needs scenario, variant and out_dir");

  uwbloc::Scenario scenario;
  if (j.at("scenario").is_string())
    scenario = uwbloc::load_scenario(j.at("scenario").get<std::string>());
  else
    scenario = uwbloc::parse_scenario(j.at("scenario").dump());
  uwbloc::Variant variant =
      uwbloc::parse_variant(j.at("variant").get<std::string>());

  uwbloc::PipelineConfig cfg;
  if (j.contains("channel")) apply_channel_overrides(cfg.channel, j["channel"]);
  if (j.contains("p_th")) cfg.p_th = j.at("p_th").get<double>();
  if (j.contains("base_hz")) cfg.base_hz = j.at("base_hz").get<double>();
  if (j.contains("min_hz")) cfg.min_hz = j.at("min_hz").get<double>();
  if (j.contains("lpf_weight"))
    cfg.lpf_weight = j.at("lpf_weight").get<double>();
  if (j.contains("motion_window_s"))
    cfg.motion_window_s = j.at("motion_window_s").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();

  uwbloc::PipelineModels models;
  std::optional<uwbloc::nn::Sequential> classifier;
  std::optional<uwbloc::RnnPredictor> predictor;
  if (variant == uwbloc::Variant::proposed) {
    if (!j.contains("nlos_checkpoint") || !j.contains("rnn_checkpoint"))
      throw uwbloc::config_error(
          "proposed variant needs nlos_checkpoint and rnn_checkpoint");
    classifier.emplace(uwbloc::load_classifier(
        j.at("nlos_checkpoint").get<std::string>()));
    predictor.emplace(uwbloc::RnnPredictor::load(
        j.at("rnn_checkpoint").get<std::string>()));
    models.nlos_prob = [&classifier](const uwbloc::ECir& e) {
      return uwbloc::predict_nlos(*classifier, e);
    };
    models.predictor = &*predictor;
  }

  std::string out_dir = j.at("out_dir").get<std::string>();
  std::filesystem::create_directories(out_dir);
  log_note("running variant " + uwbloc::variant_name(variant));
  uwbloc::RunMetrics metrics = uwbloc::run(scenario, variant, models, cfg);
  uwbloc::write_summary_json(metrics, out_dir + "/summary.json");
  uwbloc::write_ticks_csv(metrics, out_dir + "/ticks.csv");
  uwbloc::write_frequency_csv(metrics, out_dir + "/frequency.csv");
  metrics.power.write_csv(out_dir + "/power.csv");
  std::printf(
      "%s: rmse %.3f m, mean error %.3f m, mean current %.2f mA, %ld rounds\n",
      metrics.variant.c_str(), metrics.rmse_m, metrics.mean_error_m,
      metrics.mean_current_ma, metrics.ranging_rounds);
  return 0;
}

int cmd_compare(const std::vector<std::string>& run_paths,
                const std::string& out_path) {
  std::vector<uwbloc::RunSummary> runs;
  for (const std::string& p : run_paths)
    runs.push_back(uwbloc::load_run_summary(p));
  std::vector<uwbloc::ComparisonRow> rows = uwbloc::compare(runs);
  std::printf("%-20s %14s %14s %12s %12s\n", "variant", "mean_err_cm",
              "current_mA", "err_delta_%", "cur_delta_%");
  for (const uwbloc::ComparisonRow& r : rows)
    std::printf("%-20s %14.2f %14.2f %+12.1f %+12.1f\n", r.variant.c_str(),
                r.mean_error_cm, r.mean_current_ma, r.error_delta_pct,
                r.current_delta_pct);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw uwbloc::data_error("cannot open " + out_path);
    out << "variant,mean_error_cm,mean_current_ma,error_delta_pct,"
           "current_delta_pct\n";
    for (const uwbloc::ComparisonRow& r : rows) {
      char line[256];
      std::snprintf(line, sizeof line, "%s,%.10g,%.10g,%.10g,%.10g\n",
                    r.variant.c_str(), r.mean_error_cm, r.mean_current_ma,
                    r.error_delta_pct, r.current_delta_pct);
      out << line;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel-aware adaptive UWB localization simulator"};
  app.require_subcommand(1);

  std::string kind = "cir", out_path, scenario_path, corpus_path,
              config_path, metrics_path;
  int count = 4000, n_out = 5, epochs_nlos = 100, epochs_rnn = 50, jobs = 1;
  uint64_t seed = 1;
  std::vector<std::string> run_paths;

  CLI::App* gen = app.add_subcommand("gen-corpus", "Generate a labeled corpus");
  gen->add_option("--kind", kind, "cir or seq")->capture_default_str();
  gen->add_option("--out", out_path, "Output CSV path")->required();
  gen->add_option("--count", count,
                  "Frame pairs (cir) or sequences (seq)")
      ->capture_default_str();
  gen->add_option("--seed", seed, "Generator seed")->capture_default_str();
  gen->add_option("--scenario", scenario_path,
                  "Scenario JSON for seq generation (default lab)");
  gen->add_option("--n-out", n_out, "Prediction steps per sequence")
      ->capture_default_str();

  CLI::App* tn = app.add_subcommand("train-nlos",
                                    "Train the obstruction classifier");
  tn->add_option("--corpus", corpus_path, "CIR corpus CSV")->required();
  tn->add_option("--out", out_path, "Checkpoint path")->required();
  tn->add_option("--epochs", epochs_nlos, "Maximum epochs (0 saves the seed "
                                          "initialization untrained)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  tn->add_option("--seed", seed, "Training seed")->capture_default_str();
  tn->add_option("--jobs", jobs, "Worker threads")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  tn->add_option("--metrics", metrics_path, "Write a metrics JSON here");

  CLI::App* tr = app.add_subcommand("train-rnn",
                                    "Train the position predictor");
  tr->add_option("--corpus", corpus_path, "Sequence corpus CSV")->required();
  tr->add_option("--out", out_path, "Checkpoint path")->required();
  tr->add_option("--epochs", epochs_rnn, "Maximum epochs (0 saves the seed "
                                         "initialization untrained)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  tr->add_option("--seed", seed, "Training seed")->capture_default_str();
  tr->add_option("--metrics", metrics_path, "Write a metrics JSON here");

  CLI::App* rn = app.add_subcommand("run", "Run one pipeline variant");
  rn->add_option("--config", config_path, "Run config JSON")->required();

  CLI::App* cp = app.add_subcommand("compare", "Compare run summaries");
  cp->add_option("--runs", run_paths, "summary.json paths (first is baseline)")
      ->required()
      ->expected(2, -1);
  cp->add_option("--out", out_path, "Write the comparison CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen_corpus(kind, out_path, count, seed, scenario_path, n_out);
    if (tn->parsed())
      return cmd_train_nlos(corpus_path, out_path, epochs_nlos, seed, jobs,
                            metrics_path);
    if (tr->parsed())
      return cmd_train_rnn(corpus_path, out_path, epochs_rnn, seed,
                           metrics_path);
    if (rn->parsed()) return cmd_run(config_path);
    if (cp->parsed()) return cmd_compare(run_paths, out_path);
  } catch (const uwbloc::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const uwbloc::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const uwbloc::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
