#include "emocal/sched/objective.hpp"

#include <algorithm>
#include <cmath>

#include "emocal/error.hpp"

namespace emocal::sched {

double temporal_term(std::span<const ScheduledEvent> placements, const Horizon& h) {
  if (placements.empty()) return 0.0;
  int first = placements.front().start_slot;
  int last = placements.front().end_slot;
  for (const auto& p : placements) {
    first = std::min(first, p.start_slot);
    last = std::max(last, p.end_slot);
  }
  std::vector<char> busy(static_cast<std::size_t>(last - first), 0);
  for (const auto& p : placements) {
    for (int s = p.start_slot; s < p.end_slot; ++s) busy[static_cast<std::size_t>(s - first)] = 1;
  }
  const auto idle = std::count(busy.begin(), busy.end(), 0);
  return static_cast<double>(idle) / static_cast<double>(slot_count(h));
}

double cognitive_term(std::span<const ScheduledEvent> placements) {
  if (placements.size() < 2) return 0.0;
  std::vector<const ScheduledEvent*> order;
  order.reserve(placements.size());
  for (const auto& p : placements) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const ScheduledEvent* a, const ScheduledEvent* b) {
    if (a->start_slot != b->start_slot) return a->start_slot < b->start_slot;
    return a->event.id < b->event.id;
  });
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    sum += order[i]->event.cognitive_load * order[i + 1]->event.cognitive_load;
  }
  return sum / static_cast<double>(order.size() - 1);
}

double emotional_term(std::span<const ScheduledEvent> placements, const EmotionState& emotion) {
  if (placements.empty()) return 0.0;
  const double ready = readiness(emotion);
  double sum = 0.0;
  for (const auto& p : placements) sum += std::max(0.0, p.event.cognitive_load - ready);
  return sum / static_cast<double>(placements.size());
}

ObjectiveValue evaluate_objective(std::span<const ScheduledEvent> placements, const Problem& p) {
  if (placements.empty()) throw Error(ErrorCode::EmptySchedule, "cannot evaluate an empty schedule");
  ObjectiveValue out;
  out.breakdown.push_back({"temporal", p.weights.alpha_temporal, temporal_term(placements, p.horizon)});
  out.breakdown.push_back({"cognitive", p.weights.alpha_cognitive, cognitive_term(placements)});
  out.breakdown.push_back({"emotional", p.weights.alpha_emotional, emotional_term(placements, p.emotion)});
  for (const auto& extra : p.weights.extras) {
    const double v = extra.scorer(placements, p);
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::ValidationFailed, "extra term '" + extra.name + "' returned a negative or non-finite value");
    }
    out.breakdown.push_back({extra.name, extra.weight, v});
  }
  for (const auto& t : out.breakdown) out.total += t.weight * t.value;
  return out;
}

}  // namespace emocal::sched
