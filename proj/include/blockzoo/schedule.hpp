#ifndef BLOCKZOO_SCHEDULE_HPP
#define BLOCKZOO_SCHEDULE_HPP

#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockzoo {

/// Sequence of cluster indices z_0..z_{T-1} with a declared period bound:
/// every cluster must appear in every window of period_bound consecutive
/// steps (essentially cluster cyclic update).
struct UpdateSchedule {
  std::vector<int> order;  // 1-based cluster indices
  int period_bound = 0;    // T_0

  int length() const { return int(order.size()); }
};

inline UpdateSchedule make_cyclic_schedule(int n_clusters, long iterations) {
  if (n_clusters < 1) throw std::invalid_argument("make_cyclic_schedule: s >= 1");
  if (iterations < 1) throw std::invalid_argument("make_cyclic_schedule: T >= 1");
  UpdateSchedule s;
  s.period_bound = n_clusters;
  s.order.resize(iterations);
  for (long k = 0; k < iterations; ++k) s.order[k] = int(k % n_clusters) + 1;
  return s;
}

struct ScheduleValidity {
  bool indices_in_range = false;
  bool windows_complete = false;
  long first_bad_window = -1;

  bool valid() const { return indices_in_range && windows_complete; }

  std::string describe() const {
    std::ostringstream os;
    os << (valid() ? "valid" : "invalid");
    if (!indices_in_range) os << " (cluster index out of range)";
    if (indices_in_range && !windows_complete)
      os << " (window at step " << first_bad_window << " misses a cluster)";
    return os.str();
  }
};

/// Checks that every window of period_bound consecutive steps contains every
/// cluster index 1..n_clusters.
inline ScheduleValidity validate_schedule(const UpdateSchedule& sched,
                                          int n_clusters) {
  ScheduleValidity v;
  if (sched.period_bound < n_clusters || sched.order.empty()) return v;
  v.indices_in_range = true;
  for (int z : sched.order)
    if (z < 1 || z > n_clusters) {
      v.indices_in_range = false;
      return v;
    }
  v.windows_complete = true;
  const long T = sched.length();
  const long T0 = sched.period_bound;
  for (long start = 0; start + T0 <= T; ++start) {
    std::set<int> seen;
    for (long k = start; k < start + T0; ++k) seen.insert(sched.order[k]);
    if (int(seen.size()) < n_clusters) {
      v.windows_complete = false;
      v.first_bad_window = start;
      return v;
    }
  }
  return v;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_SCHEDULE_HPP
