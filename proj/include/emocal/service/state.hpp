#pragma once

// Service state, the append-only mutation log, and replay.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocal/domain.hpp"
#include "emocal/sched/problem.hpp"

namespace emocal::service {

struct ServiceConfig {
  Horizon horizon;
  sched::ObjectiveWeights weights;
  sched::ConstraintThresholds thresholds;

  void validate() const;
  bool operator==(const ServiceConfig&) const = default;
};

struct AppState {
  std::vector<EventSpec> events;
  EmotionState emotion;
  std::optional<sched::Schedule> schedule;  // last successful solve
  ServiceConfig config;
  long long next_id = 1;  // numeric part of the next generated event id

  const EventSpec* find_event(std::string_view id) const;
  sched::Problem problem() const;

  bool operator==(const AppState&) const = default;
};

enum class EntryKind { event_added, event_removed, emotion_set, schedule_solved, config_changed };

std::string_view to_string(EntryKind kind);
EntryKind entry_kind_from_string(std::string_view text);

struct LogEntry {
  long long seq = 0;
  EntryKind kind = EntryKind::event_added;
  nlohmann::json payload;
  double at = 0.0;

  bool operator==(const LogEntry&) const = default;
};

/// Applies one entry in place. Throws ValidationFailed, NotFound or a JSON
/// error when the payload does not fit the state; `state` is then unspecified.
void apply(AppState& state, const LogEntry& entry);

/// Folds entries over `initial` (seq must continue from `after_seq` without
/// gaps). Throws CorruptLog with details {"seq"} on the first bad entry.
AppState replay(std::span<const LogEntry> entries, AppState initial = {}, long long after_seq = 0);

// One JSON document per line: {"seq", "kind", "at", "payload"}.
std::string format_entry(const LogEntry& entry);
LogEntry parse_entry(std::string_view line);

/// Reads a whole log. A line that does not parse, or a seq that breaks the
/// 1, 2, 3, ... sequence, throws CorruptLog with details {"seq"}.
std::vector<LogEntry> read_log(std::istream& in);

AppState replay_stream(std::istream& in);

void to_json(nlohmann::json& j, const ServiceConfig& c);
void from_json(const nlohmann::json& j, ServiceConfig& c);
void to_json(nlohmann::json& j, const AppState& s);
void from_json(const nlohmann::json& j, AppState& s);

// Flat "key = value" text: day_start, day_end, slot_minutes, alpha_temporal,
// alpha_cognitive, alpha_emotional, t_stress, c_high, c_low, break_slots.
// Blank lines and lines starting with '#' are ignored; missing keys keep
// their defaults.
ServiceConfig parse_config(std::istream& in);
ServiceConfig load_config(const std::string& path);
void write_config(std::ostream& out, const ServiceConfig& c);

}  // namespace emocal::service
