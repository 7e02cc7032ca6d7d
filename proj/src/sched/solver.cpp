#include "emocal/sched/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "emocal/error.hpp"
#include "emocal/sched/constraints.hpp"
#include "emocal/sched/objective.hpp"

namespace emocal::sched {

namespace {

// Indices of events sorted by id; tie-break keys list start slots in this order.
std::vector<std::size_t> id_order(const std::vector<EventSpec>& events) {
  std::vector<std::size_t> idx(events.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return events[a].id < events[b].id; });
  return idx;
}

struct Incumbent {
  bool found = false;
  double objective = 0.0;
  std::vector<int> key;
  std::vector<int> starts;

  // Strictly better objective, or equal objective with a smaller key.
  bool improved_by(double obj, const std::vector<int>& candidate_key) const {
    if (!found || obj < objective) return true;
    return obj == objective && candidate_key < key;
  }
};

std::vector<int> tie_key(const std::vector<int>& starts, const std::vector<std::size_t>& by_id) {
  std::vector<int> key;
  key.reserve(by_id.size());
  for (auto i : by_id) key.push_back(starts[i]);
  return key;
}

std::vector<ScheduledEvent> materialize(const Problem& p, const std::vector<int>& starts) {
  std::vector<ScheduledEvent> out;
  out.reserve(p.events.size());
  for (std::size_t i = 0; i < p.events.size(); ++i) out.push_back(place(p.events[i], starts[i], p.horizon));
  return out;
}

Schedule finish(const Problem& p, const Incumbent& best) {
  Schedule s;
  s.placements = materialize(p, best.starts);
  auto value = evaluate_objective(s.placements, p);
  s.objective = value.total;
  s.breakdown = std::move(value.breakdown);
  return s;
}

[[noreturn]] void throw_infeasible(const std::string& why, nlohmann::json details) {
  throw Error(ErrorCode::Infeasible, why, std::move(details));
}

// Infeasibility that can be diagnosed before searching.
void precheck(const Problem& p) {
  const int count = slot_count(p.horizon);
  if (angry_or_stressed(p.emotion, p.thresholds)) {
    std::vector<std::string> sensitive;
    for (const auto& e : p.events) {
      if (e.sensitive) sensitive.push_back(e.id);
    }
    if (!sensitive.empty()) {
      throw_infeasible("sensitive events cannot be scheduled while angry or stressed",
                       {{"reason", "C4"}, {"sensitive_events", sensitive}});
    }
  }
  int exclusive = 0;
  for (const auto& e : p.events) {
    const int len = slots_needed(e.duration_min, p.horizon.slot_minutes);
    if (len > count) {
      throw_infeasible("event '" + e.id + "' is longer than the horizon",
                       {{"reason", "capacity"}, {"event", e.id}, {"slots_needed", len}, {"capacity", count}});
    }
    if (!e.multitask) exclusive += len;
  }
  if (exclusive > count) {
    throw_infeasible("non-multitask events need " + std::to_string(exclusive) + " slots but the horizon has " +
                         std::to_string(count),
                     {{"reason", "capacity"}, {"non_multitask_slots", exclusive}, {"capacity", count}});
  }
}

class BranchAndBound {
 public:
  BranchAndBound(const Problem& p, SolveStats& stats)
      : p_(p), stats_(stats), count_(slot_count(p.horizon)), n_(p.events.size()), by_id_(id_order(p.events)) {
    len_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) len_[i] = slots_needed(p.events[i].duration_min, p.horizon.slot_minutes);

    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto& ea = p.events[a];
      const auto& eb = p.events[b];
      if (ea.priority != eb.priority) return ea.priority > eb.priority;
      return ea.id < eb.id;
    });

    // Placement-independent parts of the lower bound.
    std::vector<double> products;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        products.push_back(p.events[i].cognitive_load * p.events[j].cognitive_load);
      }
    }
    std::sort(products.begin(), products.end());
    double cheapest_path = 0.0;
    for (std::size_t k = 0; k + 1 < n_; ++k) cheapest_path += products[k];
    const double cognitive_lb = n_ > 1 ? cheapest_path / static_cast<double>(n_ - 1) : 0.0;
    const double ready = readiness(p.emotion);
    double emotional = 0.0;
    for (const auto& e : p.events) emotional += std::max(0.0, e.cognitive_load - ready);
    emotional /= static_cast<double>(n_);
    static_bound_ = p.weights.alpha_cognitive * cognitive_lb + p.weights.alpha_emotional * emotional;
    remaining_after_.assign(n_ + 1, 0);
    for (std::size_t k = n_; k-- > 0;) remaining_after_[k] = remaining_after_[k + 1] + len_[order_[k]];
  }

  Incumbent run() {
    std::vector<std::vector<int>> domains(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& e = p_.events[i];
      const int lo = std::max(0, e.earliest.value_or(0));
      const int hi = std::min(count_ - len_[i], e.latest.value_or(count_));
      for (int s = lo; s <= hi; ++s) domains[i].push_back(s);
      if (domains[i].empty()) return {};
    }
    starts_.assign(n_, -1);
    descend(0, domains);
    return best_;
  }

 private:
  // Removes values of unassigned events that conflict with event `e` at slot `s`
  // under C1 or C2. Returns false when some domain becomes empty.
  bool forward_check(std::size_t depth, std::size_t e, int s, std::vector<std::vector<int>>& domains) const {
    const auto& ev = p_.events[e];
    for (std::size_t k = depth + 1; k < n_; ++k) {
      const std::size_t u = order_[k];
      const auto& eu = p_.events[u];
      const bool may_overlap = ev.multitask && eu.multitask;
      auto& dom = domains[u];
      std::erase_if(dom, [&](int su) {
        if (!may_overlap && su < s + len_[e] && s < su + len_[u]) return true;
        if (ev.priority > eu.priority && su < s) return true;
        if (eu.priority > ev.priority && su > s) return true;
        return false;
      });
      if (dom.empty()) return false;
    }
    return true;
  }

  double lower_bound(std::size_t assigned) const {
    int first = count_;
    int last = 0;
    std::vector<char> busy(static_cast<std::size_t>(count_), 0);
    for (std::size_t k = 0; k < assigned; ++k) {
      const std::size_t e = order_[k];
      first = std::min(first, starts_[e]);
      last = std::max(last, starts_[e] + len_[e]);
      for (int s = starts_[e]; s < starts_[e] + len_[e]; ++s) busy[static_cast<std::size_t>(s)] = 1;
    }
    const int covered = static_cast<int>(std::count(busy.begin(), busy.end(), 1));
    const int idle_lb = std::max(0, (last - first) - covered - remaining_after_[assigned]);
    return static_bound_ +
           p_.weights.alpha_temporal * static_cast<double>(idle_lb) / static_cast<double>(count_);
  }

  void descend(std::size_t depth, const std::vector<std::vector<int>>& domains) {
    ++stats_.nodes;
    if (depth == n_) {
      leaf();
      return;
    }
    const std::size_t e = order_[depth];
    for (int s : domains[e]) {
      starts_[e] = s;
      auto next = domains;
      if (!forward_check(depth, e, s, next)) continue;
      if (best_.found) {
        const double tol = 1e-9 * std::max(1.0, std::abs(best_.objective));
        if (lower_bound(depth + 1) > best_.objective + tol) {
          ++stats_.pruned_by_bound;
          continue;
        }
      }
      descend(depth + 1, next);
    }
    starts_[e] = -1;
  }

  void leaf() {
    ++stats_.leaves;
    const auto placements = materialize(p_, starts_);
    if (!check_c3(placements, p_.emotion, p_.thresholds).empty()) return;
    if (!check_c4(placements, p_.emotion, p_.thresholds).empty()) return;
    const double obj = evaluate_objective(placements, p_).total;
    if (best_.found && obj > best_.objective) return;
    auto key = tie_key(starts_, by_id_);
    if (best_.improved_by(obj, key)) {
      best_ = Incumbent{true, obj, std::move(key), starts_};
    }
  }

  const Problem& p_;
  SolveStats& stats_;
  int count_;
  std::size_t n_;
  std::vector<std::size_t> by_id_;
  std::vector<int> len_;
  std::vector<std::size_t> order_;
  std::vector<int> remaining_after_;
  double static_bound_ = 0.0;
  std::vector<int> starts_;
  Incumbent best_;
};

}  // namespace

Schedule solve(const Problem& p, SolveStats* stats) {
  p.validate();
  precheck(p);
  SolveStats local;
  BranchAndBound search(p, stats ? *stats : local);
  const Incumbent best = search.run();
  if (!best.found) {
    throw_infeasible("no assignment satisfies the scheduling constraints",
                     {{"reason", "search_exhausted"}, {"events", p.events.size()}, {"capacity", slot_count(p.horizon)}});
  }
  return finish(p, best);
}

Schedule brute_force_solve(const Problem& p) {
  p.validate();
  const int count = slot_count(p.horizon);
  if (p.events.size() > static_cast<std::size_t>(kBruteForceMaxEvents) || count > kBruteForceMaxSlots) {
    throw Error(ErrorCode::InstanceTooLarge, "instance exceeds the exhaustive-search guard",
                {{"events", p.events.size()}, {"slots", count}});
  }
  const auto by_id = id_order(p.events);
  const std::size_t n = p.events.size();
  std::vector<int> starts(n, 0);
  std::vector<ScheduledEvent> placed;  // in by_id order, for incremental filtering
  Incumbent best;

  // Enumerate every start slot for every event (in id order); pairwise and
  // per-event constraints are filtered as soon as both sides are placed.
  auto enumerate = [&](auto&& self, std::size_t k) -> void {
    if (k == n) {
      const auto placements = materialize(p, starts);
      if (!check_c3(placements, p.emotion, p.thresholds).empty()) return;
      const double obj = evaluate_objective(placements, p).total;
      auto key = tie_key(starts, by_id);
      if (best.improved_by(obj, key)) best = Incumbent{true, obj, std::move(key), starts};
      return;
    }
    const std::size_t e = by_id[k];
    const auto& ev = p.events[e];
    for (int s = 0; s < count; ++s) {
      const auto candidate = place(ev, s, p.horizon);
      if (candidate.end_slot > count) continue;
      if (ev.earliest && s < *ev.earliest) continue;
      if (ev.latest && s > *ev.latest) continue;
      const ScheduledEvent single[] = {candidate};
      if (!check_c4(single, p.emotion, p.thresholds).empty()) continue;
      bool ok = true;
      for (const auto& other : placed) {
        if (!check_c1(candidate, other) || !check_c2(candidate, other) || !check_c2(other, candidate)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      starts[e] = s;
      placed.push_back(candidate);
      self(self, k + 1);
      placed.pop_back();
    }
  };
  enumerate(enumerate, 0);

  if (!best.found) throw_infeasible("no assignment satisfies the scheduling constraints", {{"reason", "exhaustive"}});
  return finish(p, best);
}

}  // namespace emocal::sched
