#pragma once

// Computer-interaction logs: parsing, labeling by dominant mood, and
// splitting into one feature table per activity kind.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace emocal::behavior {

enum class ActivityKind { MouseMovement, MouseClick, MouseButtonUp, MouseButtonDown, KeyPressed, KeyReleased };

inline constexpr std::size_t kActivityKinds = 6;
inline constexpr std::size_t kMoodCount = 12;
inline constexpr std::array<ActivityKind, kActivityKinds> kAllKinds = {
    ActivityKind::MouseMovement, ActivityKind::MouseClick, ActivityKind::MouseButtonUp,
    ActivityKind::MouseButtonDown, ActivityKind::KeyPressed, ActivityKind::KeyReleased};

std::string_view to_string(ActivityKind kind);
ActivityKind activity_kind_from_string(std::string_view text);
bool is_mouse(ActivityKind kind);

inline constexpr std::string_view kAnonymizedKey = "ANONYMIZED";

struct ActivityEvent {
  ActivityKind kind = ActivityKind::MouseMovement;
  std::optional<int> x;
  std::optional<int> y;
  std::optional<int> button;
  std::optional<bool> alt;
  std::optional<bool> control;
  std::optional<bool> shift;
  std::optional<bool> meta;
  std::optional<std::string> key;
  std::optional<bool> repeat;
  std::array<double, kMoodCount> intensities{};

  /// Throws MalformedEvent when a field required by the kind is missing or
  /// an intensity lies outside [0,100].
  void validate() const;
  bool operator==(const ActivityEvent&) const = default;
};

/// Index of the largest intensity; ties go to the lowest index.
int label_row(const ActivityEvent& e);

/// Feature rows with class labels 0..n_classes-1.
struct LabeledTable {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::size_t n_classes = kMoodCount;

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return feature_names.size(); }
  std::vector<std::size_t> class_counts() const;
  void push(std::vector<double> row, int label);
  /// Rows and labels of equal length, uniform width, labels in range.
  void validate() const;
  LabeledTable subset(const std::vector<std::size_t>& indices) const;

  bool operator==(const LabeledTable&) const = default;
};

/// Key text to a stable integer id, in first-seen order.
class KeyTable {
 public:
  int id_for(const std::string& key);
  std::optional<int> find(const std::string& key) const;
  const std::string& key_of(int id) const;
  std::size_t size() const { return keys_.size(); }

  friend void to_json(nlohmann::json& j, const KeyTable& t);
  friend void from_json(const nlohmann::json& j, KeyTable& t);

 private:
  std::vector<std::string> keys_;
  std::map<std::string, int, std::less<>> ids_;
};

struct Partition {
  std::array<LabeledTable, kActivityKinds> tables;
  KeyTable keys;

  LabeledTable& operator[](ActivityKind k) { return tables[static_cast<std::size_t>(k)]; }
  const LabeledTable& operator[](ActivityKind k) const { return tables[static_cast<std::size_t>(k)]; }
};

std::vector<std::string> feature_names(ActivityKind kind);

/// Feature row of one event. Unknown keys get a new id when `keys` is
/// mutable; through the const overload they map to -1.
std::vector<double> encode(const ActivityEvent& e, KeyTable& keys);
std::vector<double> encode(const ActivityEvent& e, const KeyTable& keys);

/// MouseMovement -> (x, y); click/up/down -> (button, x, y); key kinds ->
/// (alt, control, shift, meta, key id, repeat). Throws EmptyInput on an
/// empty log and MalformedEvent on missing fields.
Partition partition(const std::vector<ActivityEvent>& events);

// Comma-separated log with a header row. Columns: kind, x, y, button, alt,
// control, shift, meta, key, repeat, mood_0..mood_11. Empty cells are absent
// values; booleans are TRUE/FALSE.
std::vector<ActivityEvent> read_activity_log(std::istream& in);
std::vector<ActivityEvent> load_activity_log(const std::string& path);
void write_activity_log(std::ostream& out, const std::vector<ActivityEvent>& events);
void save_activity_log(const std::string& path, const std::vector<ActivityEvent>& events);

struct SyntheticActivityOptions {
  std::size_t sessions = 40;
  std::size_t events_per_session = 400;
  double label_noise = 0.03;        // chance the dominant mood is unrelated to the features
  double anonymized_share = 0.2;    // key events whose text is hidden
  int screen_width = 1920;
  int screen_height = 1080;
  std::uint64_t seed = 1;
};

/// Log with a known feature-to-mood mapping: the screen is a 4x3 grid with
/// one mood per cell for mouse events, and each mood owns two keys.
std::vector<ActivityEvent> generate_activity_log(const SyntheticActivityOptions& opts = {});

/// Mood the generator associates with a screen position.
int planted_region_mood(int x, int y, int screen_width, int screen_height);

}  // namespace emocal::behavior
