#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "emocal/behavior/classify.hpp"
#include "emocal/ecg/pipeline.hpp"
#include "emocal/error.hpp"
#include "emocal/sched/constraints.hpp"
#include "emocal/sched/solver.hpp"
#include "emocal/seqnet/model.hpp"
#include "emocal/service/http.hpp"
#include "emocal/service/service.hpp"

using namespace emocal;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 1;

  service::ServiceConfig config() const {
    return config_path.empty() ? service::ServiceConfig{} : service::load_config(config_path);
  }
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path + "'", {{"path", path}});
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, path + ": " + ex.what());
  }
}

int run_serve(const Globals& g, const std::string& host, int port, const std::string& data_dir,
              const std::string& models_dir, std::size_t snapshot_every) {
  service::ServiceOptions opts;
  opts.data_dir = data_dir;
  opts.snapshot_every = snapshot_every;
  opts.initial_config = g.config();
  auto models = models_dir.empty() ? service::ModelRegistry{} : service::ModelRegistry::load(models_dir);
  service::Service svc(opts, std::move(models));
  httplib::Server server;
  service::register_routes(server, svc);
  if (!server.bind_to_port(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  std::cout << "listening on " << host << ":" << port << " (seq " << svc.last_seq() << ")" << std::endl;
  return server.listen_after_bind() ? 0 : 1;
}

int run_solve(const Globals& g, const std::string& path, bool brute_force) {
  auto doc = read_json_file(path);
  const auto cfg = g.config();
  if (doc.is_object()) {
    if (!doc.contains("horizon")) doc["horizon"] = cfg.horizon;
    if (!doc.contains("weights")) doc["weights"] = cfg.weights;
    if (!doc.contains("thresholds")) doc["thresholds"] = cfg.thresholds;
  }
  auto problem = doc.get<sched::Problem>();
  sched::SolveStats stats;
  auto schedule = brute_force ? sched::brute_force_solve(problem) : sched::solve(problem, &stats);
  json out = schedule;
  out["violations"] = sched::all_violations(schedule.placements, problem.emotion, problem.thresholds);
  if (!brute_force) out["stats"] = {{"nodes", stats.nodes}, {"leaves", stats.leaves}, {"pruned", stats.pruned_by_bound}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_detect_hr(const std::string& path, int channel, bool as_json) {
  auto rec = ecg::load_recording(path);
  auto peaks = ecg::detect_r_peaks(rec, channel);
  auto hr = ecg::peaks_to_hr(peaks, rec.sample_rate_hz);
  const double mean = hr.bpm.empty() ? 0.0 : std::accumulate(hr.bpm.begin(), hr.bpm.end(), 0.0) / hr.bpm.size();
  if (as_json) {
    std::cout << json{{"peaks", peaks}, {"bpm", hr.bpm}, {"mean_bpm", mean}}.dump() << "\n";
  } else {
    std::cout << "peaks      " << peaks.size() << "\n"
              << "intervals  " << hr.bpm.size() << "\n"
              << "mean bpm   " << mean << "\n";
  }
  return 0;
}

ecg::WindowedDataset recordings_dataset(const std::vector<std::string>& files, ecg::Dimension dim,
                                        std::size_t window) {
  ecg::WindowedDataset all;
  all.window_size = window;
  for (const auto& f : files) {
    auto rec = ecg::load_recording(f);
    if (!rec.ratings) throw Error(ErrorCode::ValidationFailed, f + ": recording has no ratings", {{"path", f}});
    auto label = ecg::binarize_rating(ecg::rating_for(*rec.ratings, dim));
    all.append(ecg::make_windows(ecg::normalized_hr(rec), label, window));
  }
  return all;
}

int run_train_seq(const Globals& g, const std::string& dim_name, const std::string& kind_name,
                  const std::vector<std::string>& data, std::size_t window, seqnet::TrainConfig cfg,
                  const std::string& out_path) {
  const auto dim = ecg::dimension_from_string(dim_name);
  const auto kind = seqnet::cell_kind_from_string(kind_name);
  cfg.seed = g.seed;
  ecg::WindowedDataset ds;
  if (data.empty()) {
    seqnet::PlantedOptions p;
    p.window = window;
    p.seed = g.seed;
    ds = seqnet::planted_dataset(p);
    std::cout << "dataset    planted, " << ds.size() << " windows\n";
  } else {
    ds = recordings_dataset(data, dim, window);
    std::cout << "dataset    " << data.size() << " recordings, " << ds.size() << " windows\n";
  }
  auto result = seqnet::train(ds, kind, cfg);
  std::cout << "model      " << seqnet::to_string(kind) << " " << ecg::to_string(dim) << ", "
            << result.model.parameter_count() << " parameters\n"
            << "epoch  train_loss  test_loss  test_acc\n";
  for (const auto& e : result.curve) {
    char line[96];
    std::snprintf(line, sizeof line, "%5zu  %10.5f  %9.5f  %8.4f\n", e.epoch, e.train_loss, e.test_loss,
                  e.test_accuracy);
    std::cout << line;
  }
  if (!out_path.empty()) {
    seqnet::save_model(out_path, result.model);
    std::cout << "saved      " << out_path << "\n";
  }
  return 0;
}

int run_classify(const Globals& g, const std::string& path, const std::string& model, bool oversample,
                 double target_scale, bool as_json, const std::string& save_path) {
  auto events = behavior::load_activity_log(path);
  auto part = behavior::partition(events);
  std::vector<behavior::Method> methods;
  if (model == "all") methods.assign(behavior::kAllMethods.begin(), behavior::kAllMethods.end());
  else methods.push_back(behavior::method_from_string(model));
  behavior::GridOptions opts;
  opts.seed = g.seed;
  opts.oversample = oversample;
  opts.target_scale = target_scale;
  auto grid = behavior::evaluate_grid(part, methods, opts);
  if (as_json) std::cout << behavior::grid_to_json(grid).dump(2) << "\n";
  else std::cout << behavior::format_grid(grid);
  if (!save_path.empty()) {
    std::ofstream out(save_path);
    out << json(behavior::train_activity_classifier(events)).dump() << "\n";
    std::cout << "saved      " << save_path << "\n";
  }
  return 0;
}

int run_gen_ecg(const Globals& g, const std::string& out_path, std::vector<double> bpm, int seconds, double snr,
                const std::vector<int>& ratings, const std::string& peaks_path) {
  if (seconds <= 0) throw Error(ErrorCode::ValidationFailed, "--seconds must be positive");
  std::vector<double> profile;
  for (int s = 0; s < seconds; ++s) profile.push_back(bpm[std::min<std::size_t>(s * bpm.size() / seconds, bpm.size() - 1)]);
  ecg::SyntheticEcgOptions opts;
  opts.snr_db = snr;
  opts.seed = g.seed;
  if (!ratings.empty()) {
    if (ratings.size() != 3) throw Error(ErrorCode::ValidationFailed, "--ratings takes valence arousal dominance");
    opts.ratings = ecg::Ratings{ratings[0], ratings[1], ratings[2]};
  }
  auto syn = ecg::generate_synthetic_ecg(profile, opts);
  ecg::save_recording(out_path, syn.recording);
  if (!peaks_path.empty()) {
    std::ofstream out(peaks_path);
    for (auto p : syn.planted_peaks) out << p << "\n";
  }
  std::cout << "wrote " << syn.recording.size() << " samples, " << syn.planted_peaks.size() << " beats to "
            << out_path << "\n";
  return 0;
}

int run_gen_activity(const Globals& g, const std::string& out_path, std::size_t sessions, std::size_t per_session) {
  behavior::SyntheticActivityOptions opts;
  opts.sessions = sessions;
  opts.events_per_session = per_session;
  opts.seed = g.seed;
  auto log = behavior::generate_activity_log(opts);
  behavior::save_activity_log(out_path, log);
  std::cout << "wrote " << log.size() << " events to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emocal: emotion-aware calendar scheduling"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "key = value file with horizon, weights and thresholds")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed");

  std::function<int()> action;

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string host = "127.0.0.1", data_dir, models_dir;
  int port = 8080;
  std::size_t snapshot_every = 100;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--data-dir", data_dir, "directory for the event log and snapshots; in-memory when empty");
  serve->add_option("--models", models_dir, "directory with valence/arousal/dominance.model, activity.json, class_vad.json");
  serve->add_option("--snapshot-every", snapshot_every);
  serve->callback([&] { action = [&] { return run_serve(g, host, port, data_dir, models_dir, snapshot_every); }; });

  auto* solve = app.add_subcommand("solve", "solve a problem document");
  std::string problem_path;
  bool brute_force = false;
  solve->add_option("problem", problem_path, "JSON with events and optional horizon, emotion, weights, thresholds")
      ->required();
  solve->add_flag("--brute-force", brute_force, "exhaustive search (small instances only)");
  solve->callback([&] { action = [&] { return run_solve(g, problem_path, brute_force); }; });

  auto* detect = app.add_subcommand("detect-hr", "R-peaks and heart rate of a recording");
  std::string rec_path;
  int channel = 1;
  bool detect_json = false;
  detect->add_option("recording", rec_path)->required();
  detect->add_option("--channel", channel)->check(CLI::Range(1, 2));
  detect->add_flag("--json", detect_json);
  detect->callback([&] { action = [&] { return run_detect_hr(rec_path, channel, detect_json); }; });

  auto* train = app.add_subcommand("train-seq", "train a low/high sequence classifier");
  std::string dim = "valence", kind = "gru", model_out;
  std::vector<std::string> data;
  std::size_t window = ecg::kDefaultWindow;
  seqnet::TrainConfig tcfg;
  train->add_option("--dim", dim)->check(CLI::IsMember({"valence", "arousal", "dominance"}));
  train->add_option("--kind", kind)->check(CLI::IsMember({"gru", "lstm"}));
  train->add_option("--data", data, "rated recordings; planted windows when omitted");
  train->add_option("--window", window);
  train->add_option("--hidden", tcfg.hidden_size);
  train->add_option("--epochs", tcfg.epochs);
  train->add_option("--batch", tcfg.batch_size);
  train->add_option("--lr", tcfg.learning_rate);
  train->add_option("--dropout", tcfg.dropout_rate);
  train->add_option("--out", model_out, "write the trained model here");
  train->callback([&] { action = [&] { return run_train_seq(g, dim, kind, data, window, tcfg, model_out); }; });

  auto* classify = app.add_subcommand("classify-activity", "per-activity accuracy grid for an activity log");
  std::string log_path, method = "all", save_classifier;
  bool no_smote = false, grid_json = false;
  double target_scale = 1.0;
  classify->add_option("log", log_path)->required();
  classify->add_option("--model", method)->check(
      CLI::IsMember({"all", "tree", "forest", "logistic", "bayes", "decision_tree", "random_forest",
                     "logistic_regression", "naive_bayes"}));
  classify->add_flag("--no-smote", no_smote);
  classify->add_option("--target-scale", target_scale, "scale the oversampling targets");
  classify->add_flag("--json", grid_json);
  classify->add_option("--save-classifier", save_classifier, "write a tree classifier for the service");
  classify->callback([&] {
    action = [&] { return run_classify(g, log_path, method, !no_smote, target_scale, grid_json, save_classifier); };
  });

  auto* gen_ecg = app.add_subcommand("gen-ecg", "synthetic two-channel recording");
  std::string ecg_out, peaks_out;
  std::vector<double> bpm{72.0};
  int seconds = 60;
  double snr = 10.0;
  std::vector<int> ratings;
  gen_ecg->add_option("--out", ecg_out)->required();
  gen_ecg->add_option("--bpm", bpm, "rate, or several rates spread evenly over the recording");
  gen_ecg->add_option("--seconds", seconds);
  gen_ecg->add_option("--snr", snr, "dB");
  gen_ecg->add_option("--ratings", ratings, "valence arousal dominance on 1..5")->expected(3);
  gen_ecg->add_option("--peaks", peaks_out, "write planted peak indices here");
  gen_ecg->callback([&] { action = [&] { return run_gen_ecg(g, ecg_out, bpm, seconds, snr, ratings, peaks_out); }; });

  auto* gen_act = app.add_subcommand("gen-activity", "synthetic labeled activity log");
  std::string act_out;
  std::size_t sessions = 40, per_session = 400;
  gen_act->add_option("--out", act_out)->required();
  gen_act->add_option("--sessions", sessions);
  gen_act->add_option("--events-per-session", per_session);
  gen_act->callback([&] { action = [&] { return run_gen_activity(g, act_out, sessions, per_session); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << service::error_body(e).dump() << "\n";
    return 1;
  }
}
