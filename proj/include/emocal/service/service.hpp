#pragma once

// The calendar service: serialized mutations over an immutable state
// snapshot, each recorded as one log entry before it becomes visible.

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emocal/behavior/classify.hpp"
#include "emocal/ecg/pipeline.hpp"
#include "emocal/seqnet/model.hpp"
#include "emocal/service/state.hpp"

namespace emocal::service {

struct VadTriple {
  double valence = 0.5;
  double arousal = 0.5;
  double dominance = 0.5;

  bool operator==(const VadTriple&) const = default;
};

/// Trained models used to turn recordings and activity logs into emotions.
struct ModelRegistry {
  // Indexed by ecg::Dimension: valence, arousal, dominance.
  std::array<std::optional<seqnet::RecurrentModel>, 3> sequence;
  std::size_t window = ecg::kDefaultWindow;
  std::optional<behavior::ActivityClassifier> activity;
  // Mood class -> emotion; neutral until configured.
  std::array<VadTriple, behavior::kMoodCount> class_vad{};

  /// Loads whatever is present in `dir`: valence.model, arousal.model,
  /// dominance.model, activity.json and class_vad.json.
  static ModelRegistry load(const std::filesystem::path& dir);
};

void to_json(nlohmann::json& j, const VadTriple& v);
void from_json(const nlohmann::json& j, VadTriple& v);

/// Parses a class->VAD table: an object keyed by class index ("0".."11").
/// Classes not listed stay neutral.
std::array<VadTriple, behavior::kMoodCount> parse_class_vad(const nlohmann::json& j);

using Clock = std::function<double()>;

/// Seconds since the Unix epoch from the system clock.
double system_now();

struct ServiceOptions {
  // Directory for events.log and snapshot.json; empty keeps everything in memory.
  std::filesystem::path data_dir;
  // Write a snapshot after every this many entries; 0 disables snapshots.
  std::size_t snapshot_every = 100;
  Clock clock = system_now;
  ServiceConfig initial_config;  // used when the log holds no config entry
};

class Service {
 public:
  /// Recovers state from data_dir (latest snapshot plus the log tail) when
  /// one is configured. Throws CorruptLog on a damaged log.
  explicit Service(ServiceOptions opts = {}, ModelRegistry models = {});

  /// Stores the event and returns its id; an empty id gets "evt-<n>".
  /// Throws ValidationFailed on an invalid spec or a duplicate id.
  std::string add_event(EventSpec spec);
  /// Throws NotFound for an unknown id.
  void remove_event(const std::string& id);

  EmotionState set_emotion(const EmotionState& e);
  /// ECG -> HR -> windows -> one sequence model per dimension; majority
  /// level per dimension mapped to 0.25 / 0.75. Throws ModelMissing.
  EmotionState set_emotion_from_recording(const ecg::EcgRecording& rec, int channel = 1);
  /// Dominant predicted mood mapped through the class->VAD table.
  EmotionState set_emotion_from_activity(const std::vector<behavior::ActivityEvent>& events);

  /// Solves the current problem and records the schedule. Throws NoEvents,
  /// or Infeasible leaving the state untouched.
  sched::Schedule solve();

  ServiceConfig set_config(const ServiceConfig& cfg);

  /// Immutable snapshot; never changes after it is returned.
  std::shared_ptr<const AppState> state() const;
  /// State together with the seq of the entry that produced it.
  std::pair<std::shared_ptr<const AppState>, long long> versioned_state() const;
  std::vector<LogEntry> log() const;
  long long last_seq() const;

  double now() const { return opts_.clock(); }

  /// Installs models, e.g. after training. Not logged.
  void set_models(ModelRegistry models);

 private:
  // Caller holds write_mu_. Applies the entry to a copy of the state, then
  // persists it, then publishes the copy.
  std::shared_ptr<const AppState> commit(EntryKind kind, nlohmann::json payload);
  void recover();
  void write_snapshot(const AppState& s, long long seq) const;
  std::shared_ptr<const ModelRegistry> models() const;

  ServiceOptions opts_;
  std::mutex write_mu_;  // serializes mutations
  mutable std::mutex read_mu_;  // guards the pointer swaps below
  std::shared_ptr<const AppState> current_;
  std::shared_ptr<const ModelRegistry> models_;
  std::vector<LogEntry> log_;  // guarded by read_mu_ for readers
  std::ofstream log_out_;
};

inline constexpr const char* kLogFile = "events.log";
inline constexpr const char* kSnapshotFile = "snapshot.json";

/// Recovery without a running service: snapshot (if any) plus the log tail.
AppState recover_state(const std::filesystem::path& data_dir);

}  // namespace emocal::service
