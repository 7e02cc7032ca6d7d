#pragma once

#include <span>
#include <vector>

#include "emocal/sched/problem.hpp"

namespace emocal::sched {

struct ObjectiveValue {
  double total = 0.0;
  std::vector<TermValue> breakdown;
};

/// Idle slots inside the busy span (first start to last end), divided by
/// the number of slots in the horizon.
double temporal_term(std::span<const ScheduledEvent> placements, const Horizon& h);

/// Mean of c_i * c_j over neighbouring events when sorted by (start, id).
/// Zero for fewer than two events.
double cognitive_term(std::span<const ScheduledEvent> placements);

/// Mean over events of max(0, c_i - readiness(emotion)).
double emotional_term(std::span<const ScheduledEvent> placements, const EmotionState& emotion);

/// Weighted sum of the three built-in terms and any extra terms. Throws
/// EmptySchedule when there are no placements.
ObjectiveValue evaluate_objective(std::span<const ScheduledEvent> placements, const Problem& p);

}  // namespace emocal::sched
