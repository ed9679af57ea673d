#include "latsearch/analysis.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace latsearch {

namespace {

std::string describe_missing(Point p) {
  std::ostringstream os;
  os << "point " << p << " is never visited";
  return os.str();
}

// Earliest visit time and first visitor for every point of a closed ball.
class FirstVisits {
 public:
  FirstVisits(const std::vector<Trajectory>& trajectories, std::int64_t radius)
      : radius_(radius), side_(2 * radius + 1), when_(static_cast<std::size_t>(side_ * side_)),
        who_(when_.size(), -1) {
    for (std::size_t r = 0; r < trajectories.size(); ++r) {
      const auto& t = trajectories[r];
      const auto pts = t.positions();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (l1_norm(pts[i]) > radius_) continue;
        const auto at = t.time_at(static_cast<std::int64_t>(i));
        const auto slot = index(pts[i]);
        if (who_[slot] < 0 || at < when_[slot]) {
          when_[slot] = at;
          who_[slot] = static_cast<int>(r);
        }
      }
    }
  }

  bool seen(Point p) const { return who_[index(p)] >= 0; }
  Time when(Point p) const { return when_[index(p)]; }
  int who(Point p) const { return who_[index(p)]; }

 private:
  std::size_t index(Point p) const {
    return static_cast<std::size_t>((p.x + radius_) * side_ + (p.y + radius_));
  }

  std::int64_t radius_;
  std::int64_t side_;
  std::vector<Time> when_;
  std::vector<int> who_;
};

std::string time_string(Time t) { return format_time(t); }

}  // namespace

IncompleteCoverage::IncompleteCoverage(Point missing)
    : std::runtime_error(describe_missing(missing)), missing_(missing) {}

const BallAudit& RatioReport::at(std::int64_t n) const {
  if (n < 1 || n > static_cast<std::int64_t>(per_ball.size())) {
    throw std::out_of_range("no audit for this radius");
  }
  return per_ball[static_cast<std::size_t>(n - 1)];
}

Rational lower_envelope(std::int64_t n, std::int64_t k) {
  if (n < 1 || k < 1) throw std::invalid_argument("lower_envelope: n and k must be >= 1");
  return (Rational(2 * n + 4) + Rational(4, 3 * n)) / k;
}

Rational upper_envelope(std::int64_t n, std::int64_t k) {
  if (n < 1 || k < 1) throw std::invalid_argument("upper_envelope: n and k must be >= 1");
  return (Rational(2 * n) + Rational(743, 100)) / k;
}

Rational theoretical_g(std::int64_t n, std::int64_t k) {
  if (n < 1 || k < 1) throw std::invalid_argument("theoretical_g: n and k must be >= 1");
  return Rational(2 * n) + Rational((4 - k) * n, 3 * n + 1);
}

RatioReport audit_plan(const std::vector<Trajectory>& trajectories, std::int64_t radius) {
  if (radius < 1) throw std::invalid_argument("audit_plan: radius must be >= 1");
  const FirstVisits first(trajectories, radius + 1);
  for (std::int64_t m = 0; m <= radius; ++m) {
    for (const auto& p : sphere_points(m)) {
      if (!first.seen(p)) throw IncompleteCoverage(p);
    }
  }

  RatioReport report;
  report.radius = radius;
  report.robots = static_cast<int>(trajectories.size());
  for (std::int64_t n = 1; n < radius; ++n) {
    BallAudit b;
    b.n = n;
    bool any = false;
    for (const auto& p : sphere_points(n)) {
      if (!any || first.when(p) > b.last_visit_time) {
        b.last_visit_time = first.when(p);
        b.worst_point = p;
        any = true;
      }
    }
    for (const auto& t : trajectories) {
      b.a_n += t.steps_by(b.last_visit_time);
      if (t.speed() > 0 && t.start_time() <= b.last_visit_time) ++b.robots;
    }
    for (const auto& p : sphere_points(n + 1)) {
      if (first.seen(p) && first.when(p) <= b.last_visit_time) ++b.g_n;
    }
    const auto k = std::max(b.robots, 1);
    b.ratio = Rational(b.a_n, static_cast<std::int64_t>(k) * n);
    b.time_ratio = b.last_visit_time / n;
    b.lower = lower_envelope(n, k);
    b.upper = upper_envelope(n, k);
    report.per_ball.push_back(b);
  }
  return report;
}

RatioReport audit_plan(const SearchPlan& plan, std::int64_t radius) {
  return audit_plan(plan.trajectories, radius);
}

std::vector<Time> completion_skew(const std::vector<Trajectory>& trajectories, std::int64_t radius) {
  const FirstVisits first(trajectories, radius);
  std::vector<std::optional<Time>> done(trajectories.size());
  std::vector<Time> out;
  for (std::int64_t n = 1; n <= radius; ++n) {
    for (const auto& p : sphere_points(n)) {
      if (!first.seen(p)) throw IncompleteCoverage(p);
      auto& d = done[static_cast<std::size_t>(first.who(p))];
      d = d ? std::max(*d, first.when(p)) : first.when(p);
    }
    std::optional<Time> lo, hi;
    for (const auto& d : done) {
      if (!d) continue;
      lo = lo ? std::min(*lo, *d) : *d;
      hi = hi ? std::max(*hi, *d) : *d;
    }
    out.push_back(lo ? *hi - *lo : Time(0));
  }
  return out;
}

std::int64_t step_imbalance(const std::vector<Trajectory>& trajectories) {
  std::optional<std::int64_t> lo, hi;
  for (const auto& t : trajectories) {
    if (t.speed() == 0) continue;
    lo = lo ? std::min(*lo, t.step_count()) : t.step_count();
    hi = hi ? std::max(*hi, t.step_count()) : t.step_count();
  }
  return lo ? *hi - *lo : 0;
}

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

void write_report_json(std::ostream& os, const RatioReport& report) {
  using nlohmann::json;
  json balls = json::array();
  for (const auto& b : report.per_ball) {
    balls.push_back({{"n", b.n},
                     {"A_n", b.a_n},
                     {"g_n", b.g_n},
                     {"last_visit_time", to_double(b.last_visit_time)},
                     {"last_visit_time_exact", time_string(b.last_visit_time)},
                     {"robots", b.robots},
                     {"ratio", to_double(b.ratio)},
                     {"time_ratio", to_double(b.time_ratio)},
                     {"lower", to_double(b.lower)},
                     {"upper", to_double(b.upper)},
                     {"worst_point", {b.worst_point.x, b.worst_point.y}}});
  }
  json j;
  j["robots"] = report.robots;
  j["radius"] = report.radius;
  j["per_ball"] = balls;
  os << j.dump(2) << '\n';
}

}  // namespace latsearch
