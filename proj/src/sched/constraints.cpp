#include "emocal/sched/constraints.hpp"

#include <algorithm>
#include <limits>

namespace emocal::sched {

bool check_c1(const ScheduledEvent& a, const ScheduledEvent& b) {
  if (a.event.multitask && b.event.multitask) return true;
  return a.end_slot <= b.start_slot || b.end_slot <= a.start_slot;
}

bool check_c2(const ScheduledEvent& a, const ScheduledEvent& b) {
  return !(a.event.priority > b.event.priority) || a.start_slot <= b.start_slot;
}

std::vector<Violation> check_c3(std::span<const ScheduledEvent> placements, const EmotionState& e,
                                const ConstraintThresholds& th) {
  std::vector<Violation> out;
  if (e.arousal < th.t_stress) return out;
  for (const auto& high : placements) {
    if (high.event.cognitive_load < th.c_high) continue;
    int next_start = std::numeric_limits<int>::max();
    for (const auto& other : placements) {
      if (&other != &high && other.start_slot >= high.end_slot) next_start = std::min(next_start, other.start_slot);
    }
    if (next_start == std::numeric_limits<int>::max()) continue;  // last event of the day
    if (next_start >= high.end_slot + th.break_slots) continue;
    // Several events may share the next start (multitasking); each must be low-demand.
    for (const auto& next : placements) {
      if (&next == &high || next.start_slot != next_start) continue;
      if (next.event.cognitive_load <= th.c_low) continue;
      out.push_back({"C3", high.event.id, next.event.id,
                     "high-load '" + high.event.id + "' is followed by demanding '" + next.event.id +
                         "' without a break while stressed"});
    }
  }
  return out;
}

bool angry_or_stressed(const EmotionState& e, const ConstraintThresholds& th) {
  return e.arousal >= th.t_stress && e.valence < 0.5;
}

std::vector<Violation> check_c4(std::span<const ScheduledEvent> placements, const EmotionState& e,
                                const ConstraintThresholds& th) {
  std::vector<Violation> out;
  if (!angry_or_stressed(e, th)) return out;
  for (const auto& p : placements) {
    if (p.event.sensitive) {
      out.push_back({"C4", p.event.id, "", "sensitive event '" + p.event.id + "' while angry or stressed"});
    }
  }
  return out;
}

std::vector<Violation> all_violations(std::span<const ScheduledEvent> placements, const EmotionState& e,
                                      const ConstraintThresholds& th) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < placements.size(); ++i) {
    for (std::size_t j = i + 1; j < placements.size(); ++j) {
      const auto& a = placements[i];
      const auto& b = placements[j];
      if (!check_c1(a, b)) {
        out.push_back({"C1", a.event.id, b.event.id, "'" + a.event.id + "' overlaps '" + b.event.id + "'"});
      }
      if (!check_c2(a, b) || !check_c2(b, a)) {
        out.push_back({"C2", a.event.id, b.event.id,
                       "priority order of '" + a.event.id + "' and '" + b.event.id + "' is inverted"});
      }
    }
  }
  auto c3 = check_c3(placements, e, th);
  out.insert(out.end(), c3.begin(), c3.end());
  auto c4 = check_c4(placements, e, th);
  out.insert(out.end(), c4.begin(), c4.end());
  return out;
}

void to_json(nlohmann::json& j, const Violation& v) {
  j = {{"constraint", v.constraint}, {"first", v.first_id}, {"message", v.message}};
  if (!v.second_id.empty()) j["second"] = v.second_id;
}

}  // namespace emocal::sched
