#include "emocal/service/service.hpp"

#include <chrono>
#include <fstream>

#include "emocal/error.hpp"
#include "emocal/sched/solver.hpp"

namespace emocal::service {

namespace fs = std::filesystem;

void to_json(nlohmann::json& j, const VadTriple& v) {
  j = {{"valence", v.valence}, {"arousal", v.arousal}, {"dominance", v.dominance}};
}

void from_json(const nlohmann::json& j, VadTriple& v) {
  VadTriple out;
  out.valence = j.at("valence").get<double>();
  out.arousal = j.at("arousal").get<double>();
  out.dominance = j.at("dominance").get<double>();
  for (double x : {out.valence, out.arousal, out.dominance})
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::ValidationFailed, "class VAD values must lie in [0,1]");
  v = out;
}

std::array<VadTriple, behavior::kMoodCount> parse_class_vad(const nlohmann::json& j) {
  std::array<VadTriple, behavior::kMoodCount> table{};
  if (!j.is_object()) throw Error(ErrorCode::ValidationFailed, "class VAD table must be an object keyed by class");
  for (const auto& [key, value] : j.items()) {
    std::size_t cls = 0;
    try {
      std::size_t used = 0;
      cls = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ValidationFailed, "class VAD key '" + key + "' is not a class index");
    }
    if (cls >= behavior::kMoodCount)
      throw Error(ErrorCode::ValidationFailed, "class VAD key " + key + " is out of range", {{"class", cls}});
    try {
      table[cls] = value.get<VadTriple>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ValidationFailed, std::string("class VAD entry ") + key + ": " + ex.what());
    }
  }
  return table;
}

ModelRegistry ModelRegistry::load(const fs::path& dir) {
  ModelRegistry reg;
  for (auto d : {ecg::Dimension::valence, ecg::Dimension::arousal, ecg::Dimension::dominance}) {
    auto path = dir / (std::string(ecg::to_string(d)) + ".model");
    if (fs::exists(path)) reg.sequence[static_cast<std::size_t>(d)] = seqnet::load_model(path.string());
  }
  auto read_json = [](const fs::path& p) {
    std::ifstream in(p);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ParseError, p.string() + ": " + ex.what());
    }
  };
  if (auto p = dir / "activity.json"; fs::exists(p)) {
    try {
      reg.activity = read_json(p).get<behavior::ActivityClassifier>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ParseError, p.string() + ": " + ex.what());
    }
  }
  if (auto p = dir / "class_vad.json"; fs::exists(p)) reg.class_vad = parse_class_vad(read_json(p));
  return reg;
}

double system_now() {
  auto us = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::system_clock::now().time_since_epoch());
  return static_cast<double>(us.count()) / 1e6;
}

namespace {

// Timestamps pass through their text form so the live state equals replay.
double canonical_time(double t) { return parse_timestamp(format_timestamp(t)); }

nlohmann::json read_snapshot(const fs::path& p) {
  std::ifstream in(p);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::CorruptLog, "unreadable snapshot: " + std::string(ex.what()), {{"seq", 0}});
  }
}

}  // namespace

AppState recover_state(const fs::path& data_dir) {
  std::vector<LogEntry> entries;
  if (std::ifstream in(data_dir / kLogFile); in) entries = read_log(in);
  AppState base;
  long long base_seq = 0;
  if (auto snap = data_dir / kSnapshotFile; fs::exists(snap)) {
    auto j = read_snapshot(snap);
    try {
      base_seq = j.at("seq").get<long long>();
      base = j.at("state").get<AppState>();
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::CorruptLog, "bad snapshot: " + std::string(ex.what()), {{"seq", 0}});
    }
    if (base_seq < 0 || base_seq > static_cast<long long>(entries.size()))
      throw Error(ErrorCode::CorruptLog, "snapshot is ahead of the log", {{"seq", base_seq}});
  }
  return replay(std::span(entries).subspan(static_cast<std::size_t>(base_seq)), std::move(base), base_seq);
}

Service::Service(ServiceOptions opts, ModelRegistry models)
    : opts_(std::move(opts)),
      current_(std::make_shared<const AppState>()),
      models_(std::make_shared<const ModelRegistry>(std::move(models))) {
  if (!opts_.clock) opts_.clock = system_now;
  opts_.initial_config.validate();
  if (!opts_.data_dir.empty()) recover();
  std::lock_guard lock(write_mu_);
  if (log_.empty() && !(opts_.initial_config == ServiceConfig{}))
    commit(EntryKind::config_changed, opts_.initial_config);
}

void Service::recover() {
  fs::create_directories(opts_.data_dir);
  auto log_path = opts_.data_dir / kLogFile;
  if (std::ifstream in(log_path); in) log_ = read_log(in);
  current_ = std::make_shared<const AppState>(recover_state(opts_.data_dir));
  log_out_.open(log_path, std::ios::app);
  if (!log_out_) throw Error(ErrorCode::ValidationFailed, "cannot open log file '" + log_path.string() + "'");
}

void Service::write_snapshot(const AppState& s, long long seq) const {
  auto tmp = opts_.data_dir / (std::string(kSnapshotFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << nlohmann::json{{"seq", seq}, {"state", s}}.dump() << '\n';
  }
  fs::rename(tmp, opts_.data_dir / kSnapshotFile);
}

std::shared_ptr<const AppState> Service::commit(EntryKind kind, nlohmann::json payload) {
  LogEntry entry;
  entry.seq = static_cast<long long>(log_.size()) + 1;
  entry.kind = kind;
  entry.payload = std::move(payload);
  entry.at = canonical_time(opts_.clock());

  auto next = std::make_shared<AppState>(*state());
  apply(*next, entry);

  if (log_out_.is_open()) {
    log_out_ << format_entry(entry) << '\n';
    log_out_.flush();
    if (!log_out_) throw Error(ErrorCode::ValidationFailed, "failed to append to the log");
  }
  std::shared_ptr<const AppState> published = next;
  {
    std::lock_guard lock(read_mu_);
    log_.push_back(std::move(entry));
    current_ = published;
  }
  if (log_out_.is_open() && opts_.snapshot_every > 0 && log_.size() % opts_.snapshot_every == 0)
    write_snapshot(*published, static_cast<long long>(log_.size()));
  return published;
}

std::string Service::add_event(EventSpec spec) {
  std::lock_guard lock(write_mu_);
  if (spec.id.empty()) {
    auto s = state();
    long long n = s->next_id;
    do {
      spec.id = "evt-" + std::to_string(n++);
    } while (s->find_event(spec.id));
  }
  spec.validate();
  auto id = spec.id;
  commit(EntryKind::event_added, spec);
  return id;
}

void Service::remove_event(const std::string& id) {
  std::lock_guard lock(write_mu_);
  if (!state()->find_event(id)) throw Error(ErrorCode::NotFound, "no event '" + id + "'", {{"id", id}});
  commit(EntryKind::event_removed, {{"id", id}});
}

EmotionState Service::set_emotion(const EmotionState& e) {
  e.validate();
  std::lock_guard lock(write_mu_);
  return commit(EntryKind::emotion_set, e)->emotion;
}

EmotionState Service::set_emotion_from_recording(const ecg::EcgRecording& rec, int channel) {
  auto reg = models();
  nlohmann::json missing = nlohmann::json::array();
  for (auto d : {ecg::Dimension::valence, ecg::Dimension::arousal, ecg::Dimension::dominance})
    if (!reg->sequence[static_cast<std::size_t>(d)]) missing.push_back(ecg::to_string(d));
  if (!missing.empty())
    throw Error(ErrorCode::ModelMissing, "no trained sequence model for " + missing.dump(), {{"missing", missing}});

  auto hr = ecg::normalized_hr(rec, channel);
  std::vector<std::vector<double>> windows;
  if (hr.size() > reg->window) windows = ecg::make_windows(hr, Level::low, reg->window).windows;
  else windows.push_back(hr);

  std::array<double, 3> vad{};
  for (std::size_t d = 0; d < 3; ++d) {
    std::size_t high = 0;
    for (const auto& w : windows) high += seqnet::predict(*reg->sequence[d], w) == Level::high;
    vad[d] = level_to_unit(2 * high > windows.size() ? Level::high : Level::low);
  }
  EmotionState e{vad[0], vad[1], vad[2], opts_.clock(), EmotionSource::biometric};
  std::lock_guard lock(write_mu_);
  return commit(EntryKind::emotion_set, e)->emotion;
}

EmotionState Service::set_emotion_from_activity(const std::vector<behavior::ActivityEvent>& events) {
  auto reg = models();
  if (!reg->activity) throw Error(ErrorCode::ModelMissing, "no trained activity classifier");
  int mood = reg->activity->classify(events);
  const auto& v = reg->class_vad[static_cast<std::size_t>(mood)];
  EmotionState e{v.valence, v.arousal, v.dominance, opts_.clock(), EmotionSource::behavioral};
  std::lock_guard lock(write_mu_);
  return commit(EntryKind::emotion_set, e)->emotion;
}

sched::Schedule Service::solve() {
  std::lock_guard lock(write_mu_);
  auto s = state();
  if (s->events.empty()) throw Error(ErrorCode::NoEvents, "nothing to schedule");
  auto schedule = sched::solve(s->problem());
  return *commit(EntryKind::schedule_solved, schedule)->schedule;
}

ServiceConfig Service::set_config(const ServiceConfig& cfg) {
  cfg.validate();
  std::lock_guard lock(write_mu_);
  return commit(EntryKind::config_changed, cfg)->config;
}

std::shared_ptr<const AppState> Service::state() const {
  std::lock_guard lock(read_mu_);
  return current_;
}

std::pair<std::shared_ptr<const AppState>, long long> Service::versioned_state() const {
  std::lock_guard lock(read_mu_);
  return {current_, static_cast<long long>(log_.size())};
}

std::vector<LogEntry> Service::log() const {
  std::lock_guard lock(read_mu_);
  return log_;
}

long long Service::last_seq() const {
  std::lock_guard lock(read_mu_);
  return static_cast<long long>(log_.size());
}

std::shared_ptr<const ModelRegistry> Service::models() const {
  std::lock_guard lock(read_mu_);
  return models_;
}

void Service::set_models(ModelRegistry models) {
  auto next = std::make_shared<const ModelRegistry>(std::move(models));
  std::lock_guard lock(read_mu_);
  models_ = std::move(next);
}

}  // namespace emocal::service
