#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocal/domain.hpp"

namespace emocal::sched {

struct Problem;

/// A pluggable objective term. Scorers must return finite, non-negative
/// values; the solver's lower bound treats every extra term as >= 0.
struct ExtraTerm {
  using Scorer = std::function<double(std::span<const ScheduledEvent>, const Problem&)>;

  std::string name;
  double weight = 0.0;
  Scorer scorer;
};

struct ObjectiveWeights {
  double alpha_temporal = 1.0;
  double alpha_cognitive = 1.0;
  double alpha_emotional = 1.0;
  std::vector<ExtraTerm> extras;

  void validate() const;
  // Scorers are not comparable; two weight sets are equal when their alphas
  // and the (name, weight) of every extra term match.
  bool operator==(const ObjectiveWeights& other) const;
};

struct ConstraintThresholds {
  double t_stress = 0.7;
  double c_high = 0.7;
  double c_low = 0.3;
  int break_slots = 1;

  void validate() const;
  bool operator==(const ConstraintThresholds&) const = default;
};

struct Problem {
  std::vector<EventSpec> events;
  Horizon horizon;
  EmotionState emotion;
  ObjectiveWeights weights;
  ConstraintThresholds thresholds;

  void validate() const;
};

struct TermValue {
  std::string term;
  double weight = 0.0;
  double value = 0.0;

  bool operator==(const TermValue&) const = default;
};

struct Schedule {
  std::vector<ScheduledEvent> placements;
  double objective = 0.0;
  std::vector<TermValue> breakdown;

  bool operator==(const Schedule&) const = default;
};

void to_json(nlohmann::json& j, const ObjectiveWeights& w);
void from_json(const nlohmann::json& j, ObjectiveWeights& w);
void to_json(nlohmann::json& j, const ConstraintThresholds& t);
void from_json(const nlohmann::json& j, ConstraintThresholds& t);
void to_json(nlohmann::json& j, const Problem& p);
void from_json(const nlohmann::json& j, Problem& p);
void to_json(nlohmann::json& j, const TermValue& t);
void from_json(const nlohmann::json& j, TermValue& t);
void to_json(nlohmann::json& j, const Schedule& s);
void from_json(const nlohmann::json& j, Schedule& s);

}  // namespace emocal::sched
