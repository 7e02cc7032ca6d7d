#pragma once

#include "emocal/sched/problem.hpp"

namespace emocal::sched {

struct SolveStats {
  long long nodes = 0;
  long long leaves = 0;
  long long pruned_by_bound = 0;
};

/// Branch-and-bound search with forward checking on C1/C2. Returns the
/// feasible schedule with minimal objective; ties go to the schedule whose
/// start slots, listed in ascending event-id order, are lexicographically
/// smallest. Throws Infeasible with an explanation in details().
Schedule solve(const Problem& p, SolveStats* stats = nullptr);

inline constexpr int kBruteForceMaxEvents = 7;
inline constexpr int kBruteForceMaxSlots = 20;

/// Exhaustive enumeration with the same tie-break as solve(). Intended as a
/// verification oracle; throws InstanceTooLarge beyond 7 events or 20 slots.
Schedule brute_force_solve(const Problem& p);

}  // namespace emocal::sched
