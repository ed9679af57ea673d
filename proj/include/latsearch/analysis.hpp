#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "latsearch/lattice.hpp"
#include "latsearch/strategy.hpp"

namespace latsearch {

using Rational = boost::rational<std::int64_t>;

/// Accounting for one sphere of the audited ball.
struct BallAudit {
  std::int64_t n = 0;
  /// When the last point of the n-sphere is first reached.
  Time last_visit_time{0};
  /// Combined unit steps of all robots up to last_visit_time.
  std::int64_t a_n = 0;
  /// Points of the (n+1)-sphere already visited at last_visit_time.
  std::int64_t g_n = 0;
  /// Sphere point reached last (the worst target at this distance).
  Point worst_point{};
  /// Robots moving at last_visit_time.
  int robots = 0;
  /// A(n) / (k n).
  Rational ratio{0};
  /// last_visit_time / n.
  Rational time_ratio{0};
  Rational lower{0};
  Rational upper{0};
};

struct RatioReport {
  std::int64_t radius = 0;
  int robots = 0;
  /// Entry i describes n = i + 1; the outermost ring is left out.
  std::vector<BallAudit> per_ball;

  const BallAudit& at(std::int64_t n) const;
};

class IncompleteCoverage : public std::runtime_error {
 public:
  explicit IncompleteCoverage(Point missing);
  Point missing() const { return missing_; }

 private:
  Point missing_;
};

/// (2n + 4 + 4/(3n)) / k.
Rational lower_envelope(std::int64_t n, std::int64_t k);
/// (2n + 7.43) / k.
Rational upper_envelope(std::int64_t n, std::int64_t k);
/// 2n + (4 - k) n / (3n + 1).
Rational theoretical_g(std::int64_t n, std::int64_t k);

/// Audits n = 1..radius-1. Throws IncompleteCoverage naming the first point of
/// the closed ball (by layer, then ring order) that no trajectory reaches.
RatioReport audit_plan(const std::vector<Trajectory>& trajectories, std::int64_t radius);
RatioReport audit_plan(const SearchPlan& plan, std::int64_t radius);

/// For each n = 1..radius: spread between robots of the time each one finishes
/// its own share of the n-ball (origin excluded). A point is credited to the
/// robot that reaches it first, lower id on ties.
std::vector<Time> completion_skew(const std::vector<Trajectory>& trajectories, std::int64_t radius);

/// Largest step count minus smallest over the moving robots.
std::int64_t step_imbalance(const std::vector<Trajectory>& trajectories);

double to_double(const Rational& r);

/// {"robots", "radius", "per_ball": [{n, A_n, g_n, last_visit_time, ratio, time_ratio, lower, upper, worst_point}]}
void write_report_json(std::ostream& os, const RatioReport& report);

}  // namespace latsearch
