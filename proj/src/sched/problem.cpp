#include "emocal/sched/problem.hpp"

#include <cmath>
#include <set>

#include "emocal/error.hpp"

namespace emocal::sched {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ValidationFailed, what); }

bool non_negative(double w) { return std::isfinite(w) && w >= 0.0; }

}  // namespace

void ObjectiveWeights::validate() const {
  double sum = alpha_temporal + alpha_cognitive + alpha_emotional;
  if (!non_negative(alpha_temporal) || !non_negative(alpha_cognitive) || !non_negative(alpha_emotional)) {
    invalid("objective weights must be non-negative");
  }
  for (const auto& extra : extras) {
    if (!non_negative(extra.weight)) invalid("weight of extra term '" + extra.name + "' must be non-negative");
    if (!extra.scorer) invalid("extra term '" + extra.name + "' has no scorer");
    sum += extra.weight;
  }
  if (!(sum > 0.0)) invalid("objective weights must not all be zero");
}

bool ObjectiveWeights::operator==(const ObjectiveWeights& other) const {
  if (alpha_temporal != other.alpha_temporal || alpha_cognitive != other.alpha_cognitive ||
      alpha_emotional != other.alpha_emotional || extras.size() != other.extras.size()) {
    return false;
  }
  for (std::size_t i = 0; i < extras.size(); ++i) {
    if (extras[i].name != other.extras[i].name || extras[i].weight != other.extras[i].weight) return false;
  }
  return true;
}

void ConstraintThresholds::validate() const {
  auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!unit(t_stress) || !unit(c_high) || !unit(c_low)) invalid("constraint thresholds must lie in [0,1]");
  if (!(c_low < c_high)) invalid("c_low must be below c_high");
  if (break_slots < 1) invalid("break_slots must be positive");
}

void Problem::validate() const {
  if (events.empty()) invalid("problem has no events");
  horizon.validate();
  emotion.validate();
  weights.validate();
  thresholds.validate();
  std::set<std::string> ids;
  for (const auto& e : events) {
    e.validate();
    if (!ids.insert(e.id).second) invalid("duplicate event id '" + e.id + "'");
  }
}

void to_json(nlohmann::json& j, const ObjectiveWeights& w) {
  j = {{"alpha_temporal", w.alpha_temporal},
       {"alpha_cognitive", w.alpha_cognitive},
       {"alpha_emotional", w.alpha_emotional}};
}

void from_json(const nlohmann::json& j, ObjectiveWeights& w) {
  w = ObjectiveWeights{};
  try {
    w.alpha_temporal = j.value("alpha_temporal", 1.0);
    w.alpha_cognitive = j.value("alpha_cognitive", 1.0);
    w.alpha_emotional = j.value("alpha_emotional", 1.0);
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("weights document: ") + ex.what());
  }
  w.validate();
}

void to_json(nlohmann::json& j, const ConstraintThresholds& t) {
  j = {{"t_stress", t.t_stress}, {"c_high", t.c_high}, {"c_low", t.c_low}, {"break_slots", t.break_slots}};
}

void from_json(const nlohmann::json& j, ConstraintThresholds& t) {
  t = ConstraintThresholds{};
  try {
    t.t_stress = j.value("t_stress", t.t_stress);
    t.c_high = j.value("c_high", t.c_high);
    t.c_low = j.value("c_low", t.c_low);
    t.break_slots = j.value("break_slots", t.break_slots);
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("thresholds document: ") + ex.what());
  }
  t.validate();
}

void to_json(nlohmann::json& j, const Problem& p) {
  j = {{"events", p.events},
       {"horizon", p.horizon},
       {"emotion", p.emotion},
       {"weights", p.weights},
       {"thresholds", p.thresholds}};
}

void from_json(const nlohmann::json& j, Problem& p) {
  p = Problem{};
  if (!j.is_object() || !j.contains("events")) invalid("problem document needs an 'events' list");
  try {
    p.events = j.at("events").get<std::vector<EventSpec>>();
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("problem events: ") + ex.what());
  }
  if (j.contains("horizon")) p.horizon = j.at("horizon").get<Horizon>();
  if (j.contains("emotion")) p.emotion = j.at("emotion").get<EmotionState>();
  if (j.contains("weights")) p.weights = j.at("weights").get<ObjectiveWeights>();
  if (j.contains("thresholds")) p.thresholds = j.at("thresholds").get<ConstraintThresholds>();
  p.validate();
}

void to_json(nlohmann::json& j, const TermValue& t) {
  j = {{"term", t.term}, {"weight", t.weight}, {"value", t.value}};
}

void from_json(const nlohmann::json& j, TermValue& t) {
  t.term = j.at("term").get<std::string>();
  t.weight = j.at("weight").get<double>();
  t.value = j.at("value").get<double>();
}

void to_json(nlohmann::json& j, const Schedule& s) {
  j = {{"placements", s.placements}, {"objective", s.objective}, {"breakdown", s.breakdown}};
}

void from_json(const nlohmann::json& j, Schedule& s) {
  try {
    s.placements = j.at("placements").get<std::vector<ScheduledEvent>>();
    s.objective = j.at("objective").get<double>();
    s.breakdown = j.at("breakdown").get<std::vector<TermValue>>();
  } catch (const nlohmann::json::exception& ex) {
    invalid(std::string("schedule document: ") + ex.what());
  }
}

}  // namespace emocal::sched
