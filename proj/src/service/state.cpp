#include "emocal/service/state.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "emocal/error.hpp"

namespace emocal::service {

void ServiceConfig::validate() const {
  horizon.validate();
  weights.validate();
  thresholds.validate();
}

const EventSpec* AppState::find_event(std::string_view id) const {
  auto it = std::find_if(events.begin(), events.end(), [&](const EventSpec& e) { return e.id == id; });
  return it == events.end() ? nullptr : &*it;
}

sched::Problem AppState::problem() const {
  sched::Problem p;
  p.events = events;
  p.horizon = config.horizon;
  p.emotion = emotion;
  p.weights = config.weights;
  p.thresholds = config.thresholds;
  return p;
}

namespace {

constexpr std::array<std::pair<EntryKind, std::string_view>, 5> kKindNames = {{
    {EntryKind::event_added, "event_added"},
    {EntryKind::event_removed, "event_removed"},
    {EntryKind::emotion_set, "emotion_set"},
    {EntryKind::schedule_solved, "schedule_solved"},
    {EntryKind::config_changed, "config_changed"},
}};

[[noreturn]] void corrupt(long long seq, const std::string& why) {
  throw Error(ErrorCode::CorruptLog, "log entry " + std::to_string(seq) + ": " + why, {{"seq", seq}});
}

}  // namespace

std::string_view to_string(EntryKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

EntryKind entry_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKindNames)
    if (name == text) return k;
  throw Error(ErrorCode::ParseError, "unknown log entry kind '" + std::string(text) + "'");
}

void apply(AppState& state, const LogEntry& entry) {
  switch (entry.kind) {
    case EntryKind::event_added: {
      auto spec = entry.payload.get<EventSpec>();
      if (spec.id.empty()) throw Error(ErrorCode::ValidationFailed, "event id must not be empty");
      if (state.find_event(spec.id))
        throw Error(ErrorCode::ValidationFailed, "duplicate event id '" + spec.id + "'", {{"id", spec.id}});
      state.events.push_back(std::move(spec));
      ++state.next_id;
      break;
    }
    case EntryKind::event_removed: {
      auto id = entry.payload.at("id").get<std::string>();
      auto it = std::find_if(state.events.begin(), state.events.end(),
                             [&](const EventSpec& e) { return e.id == id; });
      if (it == state.events.end()) throw Error(ErrorCode::NotFound, "no event '" + id + "'", {{"id", id}});
      state.events.erase(it);
      break;
    }
    case EntryKind::emotion_set:
      state.emotion = entry.payload.get<EmotionState>();
      break;
    case EntryKind::schedule_solved:
      state.schedule = entry.payload.get<sched::Schedule>();
      break;
    case EntryKind::config_changed: {
      auto cfg = entry.payload.get<ServiceConfig>();
      cfg.validate();
      state.config = std::move(cfg);
      break;
    }
  }
}

AppState replay(std::span<const LogEntry> entries, AppState initial, long long after_seq) {
  long long expected = after_seq + 1;
  for (const auto& e : entries) {
    if (e.seq != expected)
      throw Error(ErrorCode::CorruptLog, "expected seq " + std::to_string(expected) + ", found " + std::to_string(e.seq),
                  {{"seq", expected}, {"found", e.seq}});
    try {
      apply(initial, e);
    } catch (const std::exception& ex) {
      corrupt(e.seq, ex.what());
    }
    ++expected;
  }
  return initial;
}

std::string format_entry(const LogEntry& entry) {
  nlohmann::json j = {{"seq", entry.seq},
                      {"kind", to_string(entry.kind)},
                      {"at", format_timestamp(entry.at)},
                      {"payload", entry.payload}};
  return j.dump();
}

LogEntry parse_entry(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    LogEntry e;
    e.seq = j.at("seq").get<long long>();
    e.kind = entry_kind_from_string(j.at("kind").get<std::string>());
    e.at = parse_timestamp(j.at("at").get<std::string>());
    e.payload = j.at("payload");
    return e;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("bad log line: ") + ex.what());
  }
}

std::vector<LogEntry> read_log(std::istream& in) {
  std::vector<LogEntry> out;
  std::string line;
  long long expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LogEntry e;
    try {
      e = parse_entry(line);
    } catch (const Error& ex) {
      corrupt(expected, ex.what());
    }
    if (e.seq != expected)
      throw Error(ErrorCode::CorruptLog, "expected seq " + std::to_string(expected) + ", found " + std::to_string(e.seq),
                  {{"seq", expected}, {"found", e.seq}});
    out.push_back(std::move(e));
    ++expected;
  }
  return out;
}

AppState replay_stream(std::istream& in) { return replay(read_log(in)); }

void to_json(nlohmann::json& j, const ServiceConfig& c) {
  j = {{"horizon", c.horizon}, {"weights", c.weights}, {"thresholds", c.thresholds}};
}

void from_json(const nlohmann::json& j, ServiceConfig& c) {
  ServiceConfig out;
  if (j.contains("horizon")) out.horizon = j.at("horizon").get<Horizon>();
  if (j.contains("weights")) out.weights = j.at("weights").get<sched::ObjectiveWeights>();
  if (j.contains("thresholds")) out.thresholds = j.at("thresholds").get<sched::ConstraintThresholds>();
  out.validate();
  c = std::move(out);
}

void to_json(nlohmann::json& j, const AppState& s) {
  j = {{"events", s.events},
       {"emotion", s.emotion},
       {"schedule", s.schedule ? nlohmann::json(*s.schedule) : nlohmann::json(nullptr)},
       {"config", s.config},
       {"next_id", s.next_id}};
}

void from_json(const nlohmann::json& j, AppState& s) {
  AppState out;
  out.events = j.at("events").get<std::vector<EventSpec>>();
  out.emotion = j.at("emotion").get<EmotionState>();
  if (!j.at("schedule").is_null()) out.schedule = j.at("schedule").get<sched::Schedule>();
  out.config = j.at("config").get<ServiceConfig>();
  out.next_id = j.at("next_id").get<long long>();
  s = std::move(out);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

double parse_number(std::string_view key, std::string_view text, int line_no) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": '" + std::string(key) +
                                           "' expects a number, got '" + std::string(text) + "'");
  return v;
}

int parse_int(std::string_view key, std::string_view text, int line_no) {
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": '" + std::string(key) +
                                           "' expects an integer, got '" + std::string(text) + "'");
  return v;
}

}  // namespace

ServiceConfig parse_config(std::istream& in) {
  ServiceConfig c;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "day_start") c.horizon.day_start = ClockTime::parse(value);
    else if (key == "day_end") c.horizon.day_end = ClockTime::parse(value);
    else if (key == "slot_minutes") c.horizon.slot_minutes = parse_int(key, value, line_no);
    else if (key == "alpha_temporal") c.weights.alpha_temporal = parse_number(key, value, line_no);
    else if (key == "alpha_cognitive") c.weights.alpha_cognitive = parse_number(key, value, line_no);
    else if (key == "alpha_emotional") c.weights.alpha_emotional = parse_number(key, value, line_no);
    else if (key == "t_stress") c.thresholds.t_stress = parse_number(key, value, line_no);
    else if (key == "c_high") c.thresholds.c_high = parse_number(key, value, line_no);
    else if (key == "c_low") c.thresholds.c_low = parse_number(key, value, line_no);
    else if (key == "break_slots") c.thresholds.break_slots = parse_int(key, value, line_no);
    else
      throw Error(ErrorCode::ValidationFailed, "config line " + std::to_string(line_no) + ": unknown key '" +
                                                   std::string(key) + "'");
  }
  c.validate();
  return c;
}

ServiceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open config file '" + path + "'", {{"path", path}});
  return parse_config(in);
}

void write_config(std::ostream& out, const ServiceConfig& c) {
  out << "day_start = " << c.horizon.day_start.str() << '\n'
      << "day_end = " << c.horizon.day_end.str() << '\n'
      << "slot_minutes = " << c.horizon.slot_minutes << '\n'
      << "alpha_temporal = " << c.weights.alpha_temporal << '\n'
      << "alpha_cognitive = " << c.weights.alpha_cognitive << '\n'
      << "alpha_emotional = " << c.weights.alpha_emotional << '\n'
      << "t_stress = " << c.thresholds.t_stress << '\n'
      << "c_high = " << c.thresholds.c_high << '\n'
      << "c_low = " << c.thresholds.c_low << '\n'
      << "break_slots = " << c.thresholds.break_slots << '\n';
}

}  // namespace emocal::service
