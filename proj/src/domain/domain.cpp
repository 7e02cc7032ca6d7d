#include "emocal/domain.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "emocal/error.hpp"

namespace emocal {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ValidationFailed, what); }

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::EmptySchedule: return "EmptySchedule";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::NoPeaksFound: return "NoPeaksFound";
    case ErrorCode::TooFewPeaks: return "TooFewPeaks";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::MalformedEvent: return "MalformedEvent";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::ModelMissing: return "ModelMissing";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string_view to_string(EmotionSource source) {
  switch (source) {
    case EmotionSource::biometric: return "biometric";
    case EmotionSource::behavioral: return "behavioral";
    case EmotionSource::manual: return "manual";
  }
  return "manual";
}

EmotionSource emotion_source_from_string(std::string_view text) {
  if (text == "biometric") return EmotionSource::biometric;
  if (text == "behavioral") return EmotionSource::behavioral;
  if (text == "manual") return EmotionSource::manual;
  invalid("unknown emotion source '" + std::string(text) + "'");
}

void EmotionState::validate() const {
  if (!in_unit(valence) || !in_unit(arousal) || !in_unit(dominance)) {
    invalid("emotion components must lie in [0,1]");
  }
  if (!std::isfinite(at) || at < 0.0) invalid("emotion timestamp must be finite and non-negative");
}

std::string_view to_string(Level level) { return level == Level::high ? "high" : "low"; }

Level level_from_string(std::string_view text) {
  if (text == "high") return Level::high;
  if (text == "low") return Level::low;
  invalid("unknown level '" + std::string(text) + "'");
}

double level_to_unit(Level level) { return level == Level::high ? 0.75 : 0.25; }

double readiness(const EmotionState& e) { return (e.valence + (1.0 - e.arousal) + e.dominance) / 3.0; }

ClockTime ClockTime::parse(std::string_view hh_mm) {
  int h = 0;
  int m = 0;
  char tail = 0;
  const std::string s(hh_mm);
  if (std::sscanf(s.c_str(), "%d:%d%c", &h, &m, &tail) != 2 || h < 0 || h > 24 || m < 0 || m > 59 ||
      (h == 24 && m != 0)) {
    invalid("bad wall-clock time '" + s + "', expected HH:MM");
  }
  return ClockTime{h * 60 + m};
}

std::string ClockTime::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

void Horizon::validate() const {
  if (slot_minutes <= 0) invalid("slot_minutes must be positive");
  if (day_start.minutes < 0 || day_end.minutes > 24 * 60) invalid("horizon must lie within one day");
  if (!(day_start < day_end)) invalid("day_start must precede day_end");
  if ((day_end.minutes - day_start.minutes) % slot_minutes != 0) {
    invalid("horizon length must be a multiple of slot_minutes");
  }
}

int slot_count(const Horizon& h) { return (h.day_end.minutes - h.day_start.minutes) / h.slot_minutes; }

int slots_needed(int duration_min, int slot_minutes) { return (duration_min + slot_minutes - 1) / slot_minutes; }

void EventSpec::validate() const {
  if (id.empty()) invalid("event id must not be empty");
  if (duration_min < 1) invalid("event '" + id + "': duration_min must be >= 1");
  if (!in_unit(priority)) invalid("event '" + id + "': priority must lie in [0,1]");
  if (!in_unit(cognitive_load)) invalid("event '" + id + "': cognitive_load must lie in [0,1]");
  if (earliest && *earliest < 0) invalid("event '" + id + "': earliest must be >= 0");
  if (earliest && latest && *earliest > *latest) invalid("event '" + id + "': earliest must not exceed latest");
}

ScheduledEvent place(const EventSpec& event, int start_slot, const Horizon& h) {
  return ScheduledEvent{event, start_slot, start_slot + slots_needed(event.duration_min, h.slot_minutes)};
}

void validate_placement(const ScheduledEvent& p, const Horizon& h) {
  if (p.end_slot != p.start_slot + slots_needed(p.event.duration_min, h.slot_minutes)) {
    invalid("event '" + p.event.id + "': end_slot inconsistent with duration");
  }
  if (p.start_slot < 0 || p.end_slot > slot_count(h)) invalid("event '" + p.event.id + "': placement outside horizon");
}

std::string format_timestamp(double seconds_since_epoch) {
  if (!std::isfinite(seconds_since_epoch) || seconds_since_epoch < 0) invalid("timestamp must be finite and >= 0");
  const double whole = std::floor(seconds_since_epoch);
  const double frac = seconds_since_epoch - whole;
  const auto t = static_cast<std::time_t>(whole);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::string out = buf;
  if (frac > 0.0) {
    char fbuf[32];
    std::snprintf(fbuf, sizeof fbuf, "%.9f", frac);
    std::string f = fbuf + 1;  // drop the leading '0'
    while (f.size() > 2 && f.back() == '0') f.pop_back();
    if (f != ".0" && f != ".") out += f;
  }
  return out + "Z";
}

double parse_timestamp(std::string_view iso) {
  const std::string s(iso);
  std::tm tm{};
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                  &tm.tm_min, &tm.tm_sec, &consumed) != 6) {
    throw Error(ErrorCode::ParseError, "bad ISO-8601 timestamp '" + s + "'");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  double value = static_cast<double>(timegm(&tm));
  std::string rest = s.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    std::size_t n = 1;
    while (n < rest.size() && std::isdigit(static_cast<unsigned char>(rest[n]))) ++n;
    value += std::stod("0" + rest.substr(0, n));
    rest = rest.substr(n);
  }
  if (rest != "Z" && rest != "+00:00" && !rest.empty()) {
    throw Error(ErrorCode::ParseError, "only UTC timestamps are supported: '" + s + "'");
  }
  return value;
}

void to_json(nlohmann::json& j, const EmotionState& e) {
  j = {{"valence", e.valence},
       {"arousal", e.arousal},
       {"dominance", e.dominance},
       {"at", format_timestamp(e.at)},
       {"source", to_string(e.source)}};
}

void from_json(const nlohmann::json& j, EmotionState& e) {
  try {
    e.valence = j.at("valence").get<double>();
    e.arousal = j.at("arousal").get<double>();
    e.dominance = j.at("dominance").get<double>();
    e.at = j.contains("at") ? parse_timestamp(j.at("at").get<std::string>()) : 0.0;
    e.source = j.contains("source") ? emotion_source_from_string(j.at("source").get<std::string>())
                                    : EmotionSource::manual;
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("emotion document: ") + ex.what());
  }
  e.validate();
}

void to_json(nlohmann::json& j, const Horizon& h) {
  j = {{"day_start", h.day_start.str()}, {"day_end", h.day_end.str()}, {"slot_minutes", h.slot_minutes}};
}

void from_json(const nlohmann::json& j, Horizon& h) {
  try {
    h = Horizon{};
    if (j.contains("day_start")) h.day_start = ClockTime::parse(j.at("day_start").get<std::string>());
    if (j.contains("day_end")) h.day_end = ClockTime::parse(j.at("day_end").get<std::string>());
    if (j.contains("slot_minutes")) h.slot_minutes = j.at("slot_minutes").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("horizon document: ") + ex.what());
  }
  h.validate();
}

void to_json(nlohmann::json& j, const EventSpec& e) {
  j = {{"id", e.id},
       {"name", e.name},
       {"duration_min", e.duration_min},
       {"priority", e.priority},
       {"multitask", e.multitask},
       {"cognitive_load", e.cognitive_load},
       {"sensitive", e.sensitive}};
  if (e.earliest) j["earliest"] = *e.earliest;
  if (e.latest) j["latest"] = *e.latest;
}

void from_json(const nlohmann::json& j, EventSpec& e) {
  try {
    e = EventSpec{};
    e.id = j.value("id", std::string{});
    e.name = j.value("name", std::string{});
    e.duration_min = j.at("duration_min").get<int>();
    e.priority = j.value("priority", 0.5);
    e.multitask = j.value("multitask", false);
    e.cognitive_load = j.value("cognitive_load", 0.5);
    e.sensitive = j.value("sensitive", false);
    if (j.contains("earliest") && !j.at("earliest").is_null()) e.earliest = j.at("earliest").get<int>();
    if (j.contains("latest") && !j.at("latest").is_null()) e.latest = j.at("latest").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("event document: ") + ex.what());
  }
  // An empty id is allowed on input; the service assigns one.
  if (e.id.empty()) {
    EventSpec probe = e;
    probe.id = "<new>";
    probe.validate();
  } else {
    e.validate();
  }
}

void to_json(nlohmann::json& j, const ScheduledEvent& s) {
  j = {{"event", s.event}, {"start_slot", s.start_slot}, {"end_slot", s.end_slot}};
}

void from_json(const nlohmann::json& j, ScheduledEvent& s) {
  try {
    s.event = j.at("event").get<EventSpec>();
    s.start_slot = j.at("start_slot").get<int>();
    s.end_slot = j.at("end_slot").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("placement document: ") + ex.what());
  }
}

}  // namespace emocal
