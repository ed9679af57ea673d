#include "latsearch/strategy.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "latsearch/flow.hpp"

namespace latsearch {

std::string pattern_name(Pattern p) { return p == Pattern::kHelix ? "helix" : "sector"; }

Time SearchPlan::horizon() const {
  Time h(0);
  for (const auto& t : trajectories) h = std::max(h, t.end_time());
  return h;
}

namespace {

using PointSet = std::unordered_set<Point, PointHash>;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

// Dense first-visit table over the closed ball of a fixed radius.
class BallClock {
 public:
  explicit BallClock(std::int64_t radius)
      : radius_(radius), side_(2 * radius + 1),
        time_(static_cast<std::size_t>(side_ * side_)), seen_(time_.size(), 0) {}

  bool contains(Point p) const { return l1_norm(p) <= radius_; }

  void record(Point p, Time t) {
    if (!contains(p)) return;
    const auto i = index(p);
    if (!seen_[i] || t < time_[i]) {
      time_[i] = t;
      seen_[i] = 1;
    }
  }

  void record(const Trajectory& tr) {
    const auto pts = tr.positions();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      record(pts[i], tr.time_at(static_cast<std::int64_t>(i)));
    }
  }

  // Latest first-visit time over the ball, or nullopt if a point is missing.
  std::optional<Time> completion() const {
    Time worst(0);
    for (std::int64_t x = -radius_; x <= radius_; ++x) {
      const auto span = radius_ - std::llabs(x);
      for (std::int64_t y = -span; y <= span; ++y) {
        const auto i = index({x, y});
        if (!seen_[i]) return std::nullopt;
        worst = std::max(worst, time_[i]);
      }
    }
    return worst;
  }

 private:
  std::size_t index(Point p) const {
    return static_cast<std::size_t>((p.x + radius_) * side_ + (p.y + radius_));
  }

  std::int64_t radius_;
  std::int64_t side_;
  std::vector<Time> time_;
  std::vector<char> seen_;
};

// Cuts every trajectory at the moment the closed ball is covered. Fails when
// coverage is incomplete or, with `require_busy`, when a moving robot ran out of
// path before that moment.
bool cut_at_cover(std::vector<Trajectory>& trajectories, std::int64_t radius, bool require_busy) {
  BallClock clock(radius);
  for (const auto& t : trajectories) clock.record(t);
  const auto done = clock.completion();
  if (!done) return false;
  if (require_busy) {
    for (const auto& t : trajectories) {
      if (t.speed() > 0 && t.end_time() < *done) return false;
    }
  }
  for (auto& t : trajectories) t = t.truncated(t.steps_by(*done));
  return true;
}

struct RingSlot {
  std::int64_t turn;  // revolution count
  std::int64_t m;
  std::int64_t p;
};

// Orders slots by (turn + p / 4m, m, p).
bool slot_less(const RingSlot& a, const RingSlot& b) {
  const __int128 lhs = static_cast<__int128>(a.turn * 4 * a.m + a.p) * (4 * b.m);
  const __int128 rhs = static_cast<__int128>(b.turn * 4 * b.m + b.p) * (4 * a.m);
  if (lhs != rhs) return lhs < rhs;
  if (a.m != b.m) return a.m < b.m;
  return a.p < b.p;
}

// Rotating-arm decomposition of layers 1..layers into `arms` interleaved spiral
// bands. Point (m, p) sits at angle a = p / 4m; its band index is
// floor((m - 2 arms a) / 2), which picks the arm (band mod arms) and the
// revolution (band div arms). Each arm is listed in angular order, so a robot
// following it climbs one layer pair per revolution while its neighbours sweep
// the bands in between.
std::vector<std::vector<Point>> helix_targets(int arms, std::int64_t layers) {
  std::vector<std::vector<RingSlot>> slots(static_cast<std::size_t>(arms));
  const std::int64_t k = arms;
  for (std::int64_t m = 1; m <= layers; ++m) {
    for (std::int64_t p = 0; p < 4 * m; ++p) {
      const auto band = floor_div(4 * m * m - 2 * k * p, 8 * m);
      const auto arm = floor_mod(band, k);
      slots[static_cast<std::size_t>(arm)].push_back({floor_div(band, k), m, p});
    }
  }
  std::vector<std::vector<Point>> out(slots.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    std::sort(slots[j].begin(), slots[j].end(), slot_less);
    out[j].reserve(slots[j].size());
    for (const auto& s : slots[j]) out[j].push_back(ring_point(s.m, s.p));
  }
  return out;
}

// Walks `targets` in order, skipping anything in `skip`.
void follow(Trajectory& t, const std::vector<Point>& targets, const PointSet* skip) {
  for (const auto& p : targets) {
    if (skip && skip->count(p)) continue;
    t.walk_to(p);
  }
}

std::vector<RegionRange> regions_for(const std::vector<std::int64_t>& speeds) {
  std::vector<RegionRange> out;
  std::int64_t next = 0;
  for (auto s : speeds) {
    out.push_back({next, next + 4 * s - 1});
    next += 4 * s;
  }
  return out;
}

std::int64_t initial_layers(int arms, std::int64_t radius) { return radius + 2 * arms + 4; }

SearchPlan helix_plan(int k, std::int64_t radius, int base_arms) {
  SearchPlan plan;
  plan.robot_count = k;
  plan.speeds.assign(static_cast<std::size_t>(k), 1);
  plan.region_count = 4 * static_cast<std::int64_t>(k);
  plan.regions = regions_for(plan.speeds);
  plan.max_radius = radius;
  plan.pattern = Pattern::kHelix;

  for (auto layers = initial_layers(k, radius);; layers += 2 * k + 4) {
    const auto targets = helix_targets(k, layers);
    std::vector<Trajectory> base;
    for (int j = 0; j < base_arms; ++j) {
      Trajectory t(j, Point{0, 0});
      follow(t, targets[static_cast<std::size_t>(j)], nullptr);
      base.push_back(std::move(t));
    }
    std::vector<Trajectory> all;
    for (int i = 0; i < k; ++i) {
      if (base_arms == k) {
        all.push_back(base[static_cast<std::size_t>(i)]);
        continue;
      }
      // A quarter turn maps arm j onto arm j - r, so arm i is arm (i mod r)
      // turned ((j - i) mod k) / r times.
      const int j = i % base_arms;
      const int quarter = static_cast<int>(floor_mod(j - i, k)) / base_arms;
      auto t = base[static_cast<std::size_t>(j)].rotated(quarter);
      t.set_robot_id(i);
      all.push_back(std::move(t));
    }
    if (cut_at_cover(all, radius, true)) {
      plan.trajectories = std::move(all);
      return plan;
    }
  }
}

std::int64_t round_half_even(std::int64_t num, std::int64_t den) {
  auto q = floor_div(num, den);
  const auto twice_rem = 2 * (num - q * den);
  if (twice_rem > den || (twice_rem == den && (q % 2 != 0))) ++q;
  return q;
}

// One robot's share of a band under the current boundaries.
struct BandWalk {
  std::vector<Point> targets;
  Time end{0};
  std::optional<Time> lower_done;
};

class SectorPlanner {
 public:
  SectorPlanner(std::vector<Trajectory>& robots, const PointSet* skip) : robots_(robots), skip_(skip) {
    for (const auto& r : robots_) total_speed_ += r.speed();
  }

  void run(std::int64_t from_layer, std::int64_t radius) {
    std::int64_t band = 0;
    for (auto low = std::max<std::int64_t>(1, from_layer); low <= radius; low += 2, ++band) {
      plan_band({low, low + 1}, band % 2 == 1);
    }
  }

 private:
  using Bounds = std::vector<std::vector<std::int64_t>>;  // per layer, k + 1 cut points

  BandWalk evaluate(std::size_t i, const std::vector<std::int64_t>& layers, const Bounds& bounds,
                    bool clockwise) const {
    struct Key {
      std::int64_t m, p;
    };
    std::vector<Key> keys;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (auto p = bounds[l][i]; p < bounds[l][i + 1]; ++p) keys.push_back({layers[l], p});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
      const __int128 lhs = static_cast<__int128>(a.p) * (4 * b.m);
      const __int128 rhs = static_cast<__int128>(b.p) * (4 * a.m);
      if (lhs != rhs) return lhs < rhs;
      if (a.m != b.m) return a.m < b.m;
      return a.p < b.p;
    });
    if (clockwise) std::reverse(keys.begin(), keys.end());

    const auto& robot = robots_[i];
    BandWalk out;
    Point at = robot.end();
    std::int64_t steps = 0;
    std::optional<std::int64_t> lower_step;
    if (l1_norm(at) == layers.front()) lower_step = 0;
    for (const auto& k : keys) {
      const Point target = ring_point(k.m, k.p);
      if (skip_ && skip_->count(target)) continue;
      out.targets.push_back(target);
      while (at != target) {
        if (at.x != target.x) {
          at.x += at.x < target.x ? 1 : -1;
        } else {
          at.y += at.y < target.y ? 1 : -1;
        }
        ++steps;
        if (l1_norm(at) == layers.front()) lower_step = steps;
      }
    }
    const auto base = robot.step_count();
    out.end = robot.time_at(base + steps);
    if (lower_step) out.lower_done = robot.time_at(base + *lower_step);
    return out;
  }

  std::vector<BandWalk> evaluate_all(const std::vector<std::int64_t>& layers, const Bounds& bounds,
                                     bool clockwise) const {
    std::vector<BandWalk> out;
    for (std::size_t i = 0; i < robots_.size(); ++i) out.push_back(evaluate(i, layers, bounds, clockwise));
    return out;
  }

  // Spread of band end times or of lower-layer completion times, whichever is larger.
  static Time imbalance(const std::vector<BandWalk>& walks) {
    Time lo_end = walks.front().end, hi_end = walks.front().end;
    std::optional<Time> lo_low, hi_low;
    for (const auto& w : walks) {
      lo_end = std::min(lo_end, w.end);
      hi_end = std::max(hi_end, w.end);
      if (w.lower_done) {
        lo_low = lo_low ? std::min(*lo_low, *w.lower_done) : *w.lower_done;
        hi_low = hi_low ? std::max(*hi_low, *w.lower_done) : *w.lower_done;
      }
    }
    Time spread = hi_end - lo_end;
    if (lo_low) spread = std::max(spread, *hi_low - *lo_low);
    return spread;
  }

  void plan_band(const std::vector<std::int64_t>& layers, bool clockwise) {
    const auto k = robots_.size();
    Bounds bounds;
    for (auto m : layers) {
      std::vector<std::int64_t> cut{0};
      std::int64_t prefix = 0;
      for (std::size_t i = 0; i + 1 < k; ++i) {
        prefix += robots_[i].speed();
        cut.push_back(round_half_even(prefix * 4 * m, total_speed_));
      }
      cut.push_back(4 * m);
      bounds.push_back(std::move(cut));
    }

    auto walks = evaluate_all(layers, bounds, clockwise);
    auto best = imbalance(walks);
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 1; i < k; ++i) {
          for (int d : {-1, 1}) {
            const auto moved = bounds[l][i] + d;
            if (moved < bounds[l][i - 1] || moved > bounds[l][i + 1]) continue;
            bounds[l][i] = moved;
            auto trial = evaluate_all(layers, bounds, clockwise);
            const auto score = imbalance(trial);
            if (score < best) {
              best = score;
              walks = std::move(trial);
              improved = true;
            } else {
              bounds[l][i] -= d;
            }
          }
        }
      }
    }
    for (std::size_t i = 0; i < k; ++i) follow(robots_[i], walks[i].targets, nullptr);
  }

  std::vector<Trajectory>& robots_;
  const PointSet* skip_;
  std::int64_t total_speed_ = 0;
};

// Runs the sector planner over the moving robots in `all` and cuts at cover.
void sector_fill(std::vector<Trajectory>& all, std::int64_t from_layer, std::int64_t radius,
                 const PointSet* skip) {
  std::vector<Trajectory> moving;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].speed() > 0) {
      moving.push_back(all[i]);
      where.push_back(i);
    }
  }
  SectorPlanner planner(moving, skip);
  planner.run(from_layer, radius);
  for (std::size_t i = 0; i < where.size(); ++i) all[where[i]] = std::move(moving[i]);
  if (!cut_at_cover(all, radius, false)) {
    throw std::logic_error("sector planner left points of the ball unvisited");
  }
}

bool all_unit(const std::vector<std::int64_t>& speeds) {
  return std::all_of(speeds.begin(), speeds.end(), [](auto s) { return s == 1; });
}

void check_radius(std::int64_t radius) {
  if (radius < 1) throw std::invalid_argument("radius must be >= 1");
  if (radius > 1'000'000) throw std::invalid_argument("radius above 10^6");
}

PointSet visited_set(const SearchPlan& plan, Time t) {
  PointSet out;
  for (const auto& tr : plan.trajectories) {
    if (t < tr.start_time()) continue;
    const auto upto = tr.steps_by(t);
    const auto pts = tr.truncated(upto).positions();
    out.insert(pts.begin(), pts.end());
  }
  return out;
}

std::int64_t radius_of(const PointSet& seen) {
  std::vector<std::int64_t> per_layer;
  for (const auto& p : seen) {
    const auto m = static_cast<std::size_t>(l1_norm(p));
    if (per_layer.size() <= m) per_layer.resize(m + 1, 0);
    ++per_layer[m];
  }
  std::int64_t n = -1;
  while (static_cast<std::size_t>(n + 1) < per_layer.size() &&
         per_layer[static_cast<std::size_t>(n + 1)] == sphere_size(n + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

SearchPlan generate_even_work(int r, std::int64_t radius) {
  if (r < 1) throw std::invalid_argument("generate_even_work: r must be >= 1");
  check_radius(radius);
  return helix_plan(4 * r, radius, r);
}

SearchPlan generalize_to_any_k(int k, std::int64_t radius) {
  if (k < 1) throw std::invalid_argument("generalize_to_any_k: k must be >= 1");
  check_radius(radius);
  return helix_plan(k, radius, k);
}

std::vector<std::int64_t> normalize_speeds(const std::vector<Speed>& speeds) {
  if (speeds.empty()) throw std::invalid_argument("speed vector is empty");
  std::int64_t lcm = 1;
  for (const auto& s : speeds) {
    if (s < 0) throw std::invalid_argument("speeds must be non-negative");
    lcm = std::lcm(lcm, s.denominator());
    if (lcm > 1'000'000) throw std::invalid_argument("speed denominators too large");
  }
  std::vector<std::int64_t> out;
  std::int64_t g = 0;
  for (const auto& s : speeds) {
    const auto scaled = s * Speed(lcm);
    out.push_back(scaled.numerator());
    g = std::gcd(g, scaled.numerator());
  }
  if (g == 0) throw std::invalid_argument("all speeds are zero");
  std::int64_t total = 0;
  for (auto& s : out) {
    s /= g;
    total += s;
    if (total > 4096) throw std::invalid_argument("scaled speeds sum above 4096");
  }
  return out;
}

SearchPlan plan_with_speeds(const std::vector<Speed>& speeds, std::int64_t radius) {
  check_radius(radius);
  const auto scaled = normalize_speeds(speeds);
  std::vector<std::int64_t> moving;
  for (auto s : scaled) {
    if (s > 0) moving.push_back(s);
  }

  SearchPlan plan;
  if (all_unit(moving)) {
    plan = generalize_to_any_k(static_cast<int>(moving.size()), radius);
    if (moving.size() != scaled.size()) {
      // Put idle robots back in their original slots.
      std::vector<Trajectory> all;
      std::size_t next = 0;
      for (std::size_t i = 0; i < scaled.size(); ++i) {
        if (scaled[i] > 0) {
          all.push_back(plan.trajectories[next++]);
        } else {
          all.emplace_back(0, Point{0, 0}, 0);
        }
        all.back().set_robot_id(static_cast<int>(i));
      }
      plan.trajectories = std::move(all);
    }
  } else {
    plan.pattern = Pattern::kSector;
    plan.max_radius = radius;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      plan.trajectories.emplace_back(static_cast<int>(i), Point{0, 0}, scaled[i]);
    }
    sector_fill(plan.trajectories, 1, radius, nullptr);
  }
  plan.robot_count = static_cast<int>(scaled.size());
  plan.speeds = scaled;
  plan.regions = regions_for(scaled);
  plan.region_count = 4 * std::accumulate(scaled.begin(), scaled.end(), std::int64_t{0});
  return plan;
}

std::vector<Point> visited_by(const SearchPlan& plan, Time t) {
  const auto seen = visited_set(plan, t);
  std::vector<Point> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t explored_radius(const SearchPlan& plan, Time t) { return radius_of(visited_set(plan, t)); }

SearchPlan transition_on_join(const SearchPlan& plan, Time join_time, int added) {
  if (added < 0) throw std::invalid_argument("transition_on_join: negative robot count");
  if (added == 0) return plan;
  if (join_time < 0) throw std::invalid_argument("transition_on_join: negative join time");
  if (join_time > plan.horizon()) {
    throw std::invalid_argument("transition_on_join: join time beyond the plan horizon");
  }

  const auto seen = visited_set(plan, join_time);
  const auto frontier = radius_of(seen);

  std::vector<Trajectory> kept;
  for (const auto& t : plan.trajectories) kept.push_back(t.truncated(t.steps_by(join_time)));
  const auto old_count = static_cast<int>(kept.size());
  for (int j = 0; j < added; ++j) kept.emplace_back(old_count + j, Point{0, 0}, 1, join_time);

  SearchPlan out = plan;
  out.robot_count = old_count + added;
  out.speeds.resize(static_cast<std::size_t>(out.robot_count), 1);
  out.regions = regions_for(out.speeds);
  out.region_count = 4 * std::accumulate(out.speeds.begin(), out.speeds.end(), std::int64_t{0});

  std::vector<std::int64_t> moving_speeds;
  std::vector<std::size_t> moving;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].speed() > 0) {
      moving.push_back(i);
      moving_speeds.push_back(kept[i].speed());
    }
  }
  const auto radius = plan.max_radius;
  if (all_unit(moving_speeds)) {
    out.pattern = Pattern::kHelix;
    const int k = static_cast<int>(moving.size());
    for (auto layers = initial_layers(k, radius);; layers += 2 * k + 4) {
      auto arms = helix_targets(k, layers);
      for (auto& arm : arms) {
        std::erase_if(arm, [&](const Point& p) { return seen.count(p) != 0; });
      }
      // Match robots to arms so the walk to each arm's first open point is short.
      std::vector<std::vector<std::int64_t>> cost(moving.size(), std::vector<std::int64_t>(arms.size()));
      for (std::size_t r = 0; r < moving.size(); ++r) {
        for (std::size_t a = 0; a < arms.size(); ++a) {
          cost[r][a] = arms[a].empty() ? 0 : l1_distance(kept[moving[r]].end(), arms[a].front());
        }
      }
      const auto match = solve_min_cost(assignment_problem(cost));
      auto next = kept;
      for (const auto& mv : match.moves) {
        follow(next[moving[static_cast<std::size_t>(mv.from_supercell)]],
               arms[static_cast<std::size_t>(mv.to_supercell)], nullptr);
      }
      if (cut_at_cover(next, radius, true)) {
        out.trajectories = std::move(next);
        break;
      }
    }
  } else {
    out.pattern = Pattern::kSector;
    out.trajectories = kept;
    sector_fill(out.trajectories, frontier + 1, radius, &seen);
  }

  std::int64_t transit = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto pts = out.trajectories[i].positions();
    const auto from = static_cast<std::size_t>(kept[i].step_count());
    std::size_t s = from;
    while (s < pts.size() && seen.count(pts[s])) ++s;
    transit = std::max<std::int64_t>(transit, static_cast<std::int64_t>(s - from));
  }
  out.join_schedule.push_back({join_time, added, frontier, transit});
  return out;
}

void write_plan_metadata(std::ostream& os, const SearchPlan& plan) {
  using nlohmann::json;
  auto time_str = [](Time t) {
    return t.denominator() == 1 ? std::to_string(t.numerator())
                                : std::to_string(t.numerator()) + "/" + std::to_string(t.denominator());
  };
  json j;
  j["robots"] = plan.robot_count;
  j["speeds"] = plan.speeds;
  j["region_count"] = plan.region_count;
  json regions = json::array();
  for (std::size_t i = 0; i < plan.regions.size(); ++i) {
    regions.push_back({{"robot_id", i}, {"first", plan.regions[i].first}, {"last", plan.regions[i].last}});
  }
  j["regions"] = regions;
  j["radius"] = plan.max_radius;
  j["pattern"] = pattern_name(plan.pattern);
  json robots = json::array();
  for (const auto& t : plan.trajectories) {
    robots.push_back({{"robot_id", t.robot_id()},
                      {"speed", t.speed()},
                      {"start_time", time_str(t.start_time())},
                      {"steps", t.step_count()}});
  }
  j["trajectories"] = robots;
  json joins = json::array();
  for (const auto& e : plan.join_schedule) {
    joins.push_back({{"join_time", time_str(e.join_time)},
                     {"added", e.added},
                     {"frontier_radius", e.frontier_radius},
                     {"max_transit", e.max_transit}});
  }
  j["join_schedule"] = joins;
  os << j.dump(2) << '\n';
}

}  // namespace latsearch
