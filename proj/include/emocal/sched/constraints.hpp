#pragma once

#include <span>
#include <string>
#include <vector>

#include "emocal/domain.hpp"
#include "emocal/sched/problem.hpp"

namespace emocal::sched {

struct Violation {
  std::string constraint;  // "C1".."C4"
  std::string first_id;
  std::string second_id;  // empty for single-event violations
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Temporal exclusivity: two placements may overlap only if both events are
/// multitaskable.
bool check_c1(const ScheduledEvent& a, const ScheduledEvent& b);

/// Priority sequencing: a strictly higher-priority event never starts later.
/// Directional; a pair is consistent when check_c2(a, b) && check_c2(b, a).
bool check_c2(const ScheduledEvent& a, const ScheduledEvent& b);

/// Under stress, every high-load event must be followed by a low-load event
/// or by a gap of at least break_slots before the next event starts.
std::vector<Violation> check_c3(std::span<const ScheduledEvent> placements, const EmotionState& e,
                                const ConstraintThresholds& th);

/// True when the emotion falls in the high-arousal, negative-valence quadrant.
bool angry_or_stressed(const EmotionState& e, const ConstraintThresholds& th);

/// While angry or stressed, every sensitive event is a violation.
std::vector<Violation> check_c4(std::span<const ScheduledEvent> placements, const EmotionState& e,
                                const ConstraintThresholds& th);

/// All C1-C4 violations of a complete schedule, pairwise ones reported once
/// per unordered pair.
std::vector<Violation> all_violations(std::span<const ScheduledEvent> placements, const EmotionState& e,
                                      const ConstraintThresholds& th);

void to_json(nlohmann::json& j, const Violation& v);

}  // namespace emocal::sched
