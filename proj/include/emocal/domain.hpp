#pragma once

// Vocabulary types shared by the scheduler, the emotion detectors and the
// service. All of them are plain values; validate() enforces the invariants
// and throws Error{ValidationFailed} describing the first broken one.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace emocal {

enum class EmotionSource { biometric, behavioral, manual };

std::string_view to_string(EmotionSource source);
EmotionSource emotion_source_from_string(std::string_view text);

/// Valence/arousal/dominance triple, each normalized to [0, 1].
struct EmotionState {
  double valence = 0.5;
  double arousal = 0.5;
  double dominance = 0.5;
  double at = 0.0;  // seconds since the Unix epoch
  EmotionSource source = EmotionSource::manual;

  static EmotionState neutral() { return {}; }

  void validate() const;
  bool operator==(const EmotionState&) const = default;
};

/// Binary low/high level produced by the classifiers.
enum class Level { low, high };

std::string_view to_string(Level level);
Level level_from_string(std::string_view text);

/// Maps a classifier level onto the [0,1] emotion scale (low 0.25, high 0.75).
double level_to_unit(Level level);

/// Scalar summary of an emotion state: high valence and dominance with low
/// arousal means the user is ready for demanding work.
double readiness(const EmotionState& e);

/// Wall-clock time of day, stored as minutes after midnight.
struct ClockTime {
  int minutes = 0;

  static ClockTime parse(std::string_view hh_mm);
  std::string str() const;

  auto operator<=>(const ClockTime&) const = default;
};

struct Horizon {
  ClockTime day_start{9 * 60};
  ClockTime day_end{18 * 60};
  int slot_minutes = 30;

  void validate() const;
  bool operator==(const Horizon&) const = default;
};

int slot_count(const Horizon& h);

/// Number of slots an event of the given duration occupies.
int slots_needed(int duration_min, int slot_minutes);

struct EventSpec {
  std::string id;
  std::string name;
  int duration_min = 30;
  double priority = 0.5;
  bool multitask = false;
  double cognitive_load = 0.5;
  bool sensitive = false;
  // Bounds on the start slot index, inclusive.
  std::optional<int> earliest;
  std::optional<int> latest;

  void validate() const;
  bool operator==(const EventSpec&) const = default;
};

struct ScheduledEvent {
  EventSpec event;
  int start_slot = 0;
  int end_slot = 0;  // exclusive

  bool operator==(const ScheduledEvent&) const = default;
};

/// Builds a placement with end_slot = start + ceil(duration / slot_minutes).
ScheduledEvent place(const EventSpec& event, int start_slot, const Horizon& h);

/// Throws ValidationFailed unless the placement lies inside the horizon and
/// its end slot is consistent with the event duration.
void validate_placement(const ScheduledEvent& placement, const Horizon& h);

// ISO-8601 UTC timestamps ("2026-10-16T09:30:00Z", with microseconds when
// the value is fractional).
std::string format_timestamp(double seconds_since_epoch);
double parse_timestamp(std::string_view iso);

// Flat document (JSON object) forms. from_json validates.
void to_json(nlohmann::json& j, const EmotionState& e);
void from_json(const nlohmann::json& j, EmotionState& e);
void to_json(nlohmann::json& j, const Horizon& h);
void from_json(const nlohmann::json& j, Horizon& h);
void to_json(nlohmann::json& j, const EventSpec& e);
void from_json(const nlohmann::json& j, EventSpec& e);
void to_json(nlohmann::json& j, const ScheduledEvent& s);
void from_json(const nlohmann::json& j, ScheduledEvent& s);

}  // namespace emocal
