#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "latsearch/lattice.hpp"

namespace latsearch {

using Speed = boost::rational<std::int64_t>;

/// Inclusive range of region indices owned by one robot. Empty when last < first.
struct RegionRange {
  std::int64_t first = 0;
  std::int64_t last = -1;

  std::int64_t size() const { return last - first + 1; }
  friend bool operator==(const RegionRange&, const RegionRange&) = default;
};

struct JoinEvent {
  Time join_time{0};
  int added = 0;
  /// Largest radius whose closed ball had been fully explored at join_time.
  std::int64_t frontier_radius = 0;
  /// Worst number of steps any robot spent crossing explored ground before its
  /// first new point.
  std::int64_t max_transit = 0;
};

enum class Pattern { kHelix, kSector };

std::string pattern_name(Pattern p);

struct SearchPlan {
  int robot_count = 0;
  std::vector<std::int64_t> speeds;
  std::int64_t region_count = 0;
  std::vector<RegionRange> regions;
  std::int64_t max_radius = 0;
  std::vector<Trajectory> trajectories;
  std::vector<JoinEvent> join_schedule;
  Pattern pattern = Pattern::kHelix;

  /// Latest end time over all trajectories.
  Time horizon() const;
};

/// k = 4r robots. Arms 0..r-1 are built directly; the remaining 3r are their
/// quarter-turn rotations.
SearchPlan generate_even_work(int r, std::int64_t radius);

/// Any k >= 1 robots on unit speed; robot i owns regions 4i..4i+3.
SearchPlan generalize_to_any_k(int k, std::int64_t radius);

/// Scales rational speeds to coprime integers: multiply by the LCM of the
/// denominators, divide by the GCD. Throws on negative entries, an all-zero
/// vector or a scaled total above 4096.
std::vector<std::int64_t> normalize_speeds(const std::vector<Speed>& speeds);

/// Robot i receives 4 s_i consecutive regions and a share of every ring band
/// proportional to its speed. Zero-speed robots stay at the origin.
SearchPlan plan_with_speeds(const std::vector<Speed>& speeds, std::int64_t radius);

/// `added` unit-speed robots appear at the origin at join_time. Every robot keeps
/// the part of its path walked so far; the rest of the ball is replanned for the
/// enlarged team over the points not yet visited.
SearchPlan transition_on_join(const SearchPlan& plan, Time join_time, int added);

/// Points visited by any robot at or before time t.
std::vector<Point> visited_by(const SearchPlan& plan, Time t);

/// Largest n such that every point of the closed n-ball is visited by time t.
std::int64_t explored_radius(const SearchPlan& plan, Time t);

/// JSON header describing the plan (written next to the trajectory CSV).
void write_plan_metadata(std::ostream& os, const SearchPlan& plan);

}  // namespace latsearch
