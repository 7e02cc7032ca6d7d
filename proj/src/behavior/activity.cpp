#include "emocal/behavior/activity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "emocal/error.hpp"

namespace emocal::behavior {

namespace {

[[noreturn]] void malformed(const std::string& what, nlohmann::json details = nlohmann::json::object()) {
  throw Error(ErrorCode::MalformedEvent, what, std::move(details));
}

constexpr std::array<std::string_view, 10> kFixedColumns = {"kind", "alt",     "control", "shift", "meta",
                                                           "key",  "repeat", "x",       "y",     "button"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::optional<bool> parse_bool(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  std::string up = s;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "TRUE" || up == "1") return true;
  if (up == "FALSE" || up == "0") return false;
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad boolean '" + s + "'");
}

std::optional<int> parse_int(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad integer '" + s + "'");
}

double parse_real(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + s + "'");
}

double flag(std::optional<bool> b) { return b.value_or(false) ? 1.0 : 0.0; }

}  // namespace

std::string_view to_string(ActivityKind kind) {
  switch (kind) {
    case ActivityKind::MouseMovement: return "MouseMovement";
    case ActivityKind::MouseClick: return "MouseClick";
    case ActivityKind::MouseButtonUp: return "MouseButtonUp";
    case ActivityKind::MouseButtonDown: return "MouseButtonDown";
    case ActivityKind::KeyPressed: return "KeyPressed";
    case ActivityKind::KeyReleased: return "KeyReleased";
  }
  return "MouseMovement";
}

ActivityKind activity_kind_from_string(std::string_view text) {
  for (ActivityKind k : kAllKinds) {
    if (to_string(k) == text) return k;
  }
  malformed("unknown activity kind '" + std::string(text) + "'");
}

bool is_mouse(ActivityKind kind) { return kind != ActivityKind::KeyPressed && kind != ActivityKind::KeyReleased; }

void ActivityEvent::validate() const {
  std::vector<std::string> missing;
  if (is_mouse(kind)) {
    if (!x) missing.emplace_back("x");
    if (!y) missing.emplace_back("y");
    if (kind != ActivityKind::MouseMovement && !button) missing.emplace_back("button");
  } else {
    if (!alt) missing.emplace_back("alt");
    if (!control) missing.emplace_back("control");
    if (!shift) missing.emplace_back("shift");
    if (!meta) missing.emplace_back("meta");
    if (!key) missing.emplace_back("key");
    if (!repeat) missing.emplace_back("repeat");
  }
  if (!missing.empty()) {
    malformed(std::string(to_string(kind)) + " event is missing fields", {{"kind", to_string(kind)}, {"missing", missing}});
  }
  for (double v : intensities) {
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) malformed("mood intensities must lie in [0,100]");
  }
}

int label_row(const ActivityEvent& e) {
  const auto it = std::max_element(e.intensities.begin(), e.intensities.end());
  return static_cast<int>(it - e.intensities.begin());
}

std::vector<std::size_t> LabeledTable::class_counts() const {
  std::vector<std::size_t> counts(n_classes, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

void LabeledTable::push(std::vector<double> row, int label) {
  rows.push_back(std::move(row));
  labels.push_back(label);
}

void LabeledTable::validate() const {
  if (rows.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "row and label counts differ");
  for (const auto& r : rows) {
    if (r.size() != width()) throw Error(ErrorCode::ShapeMismatch, "row width differs from the feature count");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= n_classes) {
      throw Error(ErrorCode::ValidationFailed, "label " + std::to_string(l) + " out of range");
    }
  }
}

LabeledTable LabeledTable::subset(const std::vector<std::size_t>& indices) const {
  LabeledTable out;
  out.feature_names = feature_names;
  out.n_classes = n_classes;
  for (std::size_t i : indices) out.push(rows[i], labels[i]);
  return out;
}

int KeyTable::id_for(const std::string& key) {
  if (const auto it = ids_.find(key); it != ids_.end()) return it->second;
  const int id = static_cast<int>(keys_.size());
  keys_.push_back(key);
  ids_.emplace(key, id);
  return id;
}

std::optional<int> KeyTable::find(const std::string& key) const {
  if (const auto it = ids_.find(key); it != ids_.end()) return it->second;
  return std::nullopt;
}

const std::string& KeyTable::key_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= keys_.size()) {
    throw Error(ErrorCode::NotFound, "no key with id " + std::to_string(id));
  }
  return keys_[static_cast<std::size_t>(id)];
}

void to_json(nlohmann::json& j, const KeyTable& t) { j = t.keys_; }

void from_json(const nlohmann::json& j, KeyTable& t) {
  t = KeyTable{};
  for (const auto& k : j) t.id_for(k.get<std::string>());
}

std::vector<std::string> feature_names(ActivityKind kind) {
  if (kind == ActivityKind::MouseMovement) return {"x", "y"};
  if (is_mouse(kind)) return {"button", "x", "y"};
  return {"alt", "control", "shift", "meta", "key_id", "repeat"};
}

std::vector<double> encode(const ActivityEvent& e, KeyTable& keys) {
  e.validate();
  if (e.kind == ActivityKind::MouseMovement) return {double(*e.x), double(*e.y)};
  if (is_mouse(e.kind)) return {double(*e.button), double(*e.x), double(*e.y)};
  return {flag(e.alt), flag(e.control), flag(e.shift), flag(e.meta), double(keys.id_for(*e.key)), flag(e.repeat)};
}

std::vector<double> encode(const ActivityEvent& e, const KeyTable& keys) {
  if (is_mouse(e.kind)) {
    KeyTable unused;
    return encode(e, unused);
  }
  e.validate();
  const double id = keys.find(*e.key) ? double(*keys.find(*e.key)) : -1.0;
  return {flag(e.alt), flag(e.control), flag(e.shift), flag(e.meta), id, flag(e.repeat)};
}

Partition partition(const std::vector<ActivityEvent>& events) {
  if (events.empty()) throw Error(ErrorCode::EmptyInput, "activity log is empty");
  Partition p;
  for (ActivityKind k : kAllKinds) p[k].feature_names = feature_names(k);
  for (const auto& e : events) p[e.kind].push(encode(e, p.keys), label_row(e));
  return p;
}

std::vector<ActivityEvent> read_activity_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyInput, "activity log has no header");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (std::string_view name : kFixedColumns) {
    if (!col.count(name)) throw Error(ErrorCode::ParseError, "activity log header lacks '" + std::string(name) + "'");
  }
  for (std::size_t m = 0; m < kMoodCount; ++m) {
    if (!col.count("mood_" + std::to_string(m))) {
      throw Error(ErrorCode::ParseError, "activity log header lacks 'mood_" + std::to_string(m) + "'");
    }
  }

  std::vector<ActivityEvent> events;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " cells, got " +
                                             std::to_string(cells.size()));
    }
    const auto cell = [&](std::string_view name) -> const std::string& { return cells[col.find(name)->second]; };
    ActivityEvent e;
    e.kind = activity_kind_from_string(cell("kind"));
    e.x = parse_int(cell("x"), line_no);
    e.y = parse_int(cell("y"), line_no);
    e.button = parse_int(cell("button"), line_no);
    e.alt = parse_bool(cell("alt"), line_no);
    e.control = parse_bool(cell("control"), line_no);
    e.shift = parse_bool(cell("shift"), line_no);
    e.meta = parse_bool(cell("meta"), line_no);
    e.repeat = parse_bool(cell("repeat"), line_no);
    if (!cell("key").empty()) e.key = cell("key");
    for (std::size_t m = 0; m < kMoodCount; ++m) {
      e.intensities[m] = parse_real(cell("mood_" + std::to_string(m)), line_no);
    }
    e.validate();
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<ActivityEvent> load_activity_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read activity log '" + path + "'");
  return read_activity_log(in);
}

void write_activity_log(std::ostream& out, const std::vector<ActivityEvent>& events) {
  out << "kind,x,y,button,alt,control,shift,meta,key,repeat";
  for (std::size_t m = 0; m < kMoodCount; ++m) out << ",mood_" << m;
  out << "\n";
  const auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  const auto opt_bool = [](const std::optional<bool>& v) { return v ? std::string(*v ? "TRUE" : "FALSE") : std::string(); };
  char buf[32];
  for (const auto& e : events) {
    out << to_string(e.kind) << ',' << opt_int(e.x) << ',' << opt_int(e.y) << ',' << opt_int(e.button) << ','
        << opt_bool(e.alt) << ',' << opt_bool(e.control) << ',' << opt_bool(e.shift) << ',' << opt_bool(e.meta)
        << ',' << (e.key ? csv_quote(*e.key) : std::string()) << ',' << opt_bool(e.repeat);
    for (double v : e.intensities) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
}

void save_activity_log(const std::string& path, const std::vector<ActivityEvent>& events) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ValidationFailed, "cannot write '" + path + "'");
  write_activity_log(out, events);
}

int planted_region_mood(int x, int y, int screen_width, int screen_height) {
  const int col = std::clamp(x * 4 / screen_width, 0, 3);
  const int row = std::clamp(y * 3 / screen_height, 0, 2);
  return row * 4 + col;
}

std::vector<ActivityEvent> generate_activity_log(const SyntheticActivityOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Moods are imbalanced; later indices are rarer.
  std::vector<double> mood_weights;
  for (std::size_t m = 0; m < kMoodCount; ++m) mood_weights.push_back(1.0 / (1.0 + 0.25 * static_cast<double>(m)));
  std::discrete_distribution<int> mood_dist(mood_weights.begin(), mood_weights.end());
  // Movement and key releases dominate real interaction logs.
  std::discrete_distribution<int> kind_dist({50.0, 6.0, 8.0, 8.0, 12.0, 16.0});
  std::uniform_int_distribution<int> other_mood(0, static_cast<int>(kMoodCount) - 1);
  std::uniform_int_distribution<int> button_dist(1, 3);

  const auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  const int cell_w = opts.screen_width / 4;
  const int cell_h = opts.screen_height / 3;

  std::vector<ActivityEvent> events;
  events.reserve(opts.sessions * opts.events_per_session);
  for (std::size_t s = 0; s < opts.sessions; ++s) {
    for (std::size_t n = 0; n < opts.events_per_session; ++n) {
      ActivityEvent e;
      e.kind = kAllKinds[static_cast<std::size_t>(kind_dist(rng))];
      const int mood = mood_dist(rng);
      // Features follow `source`; with label_noise it is unrelated to the mood.
      const int source = unit(rng) < opts.label_noise ? other_mood(rng) : mood;
      if (is_mouse(e.kind)) {
        std::uniform_int_distribution<int> dx(0, cell_w - 1), dy(0, cell_h - 1);
        e.x = (source % 4) * cell_w + dx(rng);
        e.y = (source / 4) * cell_h + dy(rng);
        if (e.kind != ActivityKind::MouseMovement) e.button = button_dist(rng);
      } else {
        e.alt = unit(rng) < 0.05;
        e.control = unit(rng) < 0.1;
        e.shift = unit(rng) < 0.15;
        e.meta = unit(rng) < 0.02;
        e.repeat = e.kind == ActivityKind::KeyPressed && unit(rng) < 0.2;
        if (unit(rng) < opts.anonymized_share) {
          e.key = std::string(kAnonymizedKey);
        } else {
          e.key = std::string(1, static_cast<char>('a' + 2 * source + (unit(rng) < 0.5 ? 0 : 1)));
        }
      }
      for (auto& v : e.intensities) v = round2(50.0 * unit(rng));
      e.intensities[static_cast<std::size_t>(mood)] = round2(60.0 + 40.0 * unit(rng));
      events.push_back(std::move(e));
    }
  }
  return events;
}

}  // namespace emocal::behavior
