#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/rational.hpp>

namespace latsearch {

/// Exact wall-clock time. Times are step indices divided by integral speeds.
using Time = boost::rational<std::int64_t>;

/// Largest |coordinate| a point may carry; arithmetic past it is an error.
inline constexpr std::int64_t kMaxCoordinate = std::int64_t{1} << 40;

struct Point {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

std::ostream& operator<<(std::ostream& os, const Point& p);

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept {
    auto h = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(p.y) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

enum class Direction : std::uint8_t { kUp, kDown, kLeft, kRight };

char direction_code(Direction d);

/// Moves `p` one unit in direction `d`; throws std::overflow_error past kMaxCoordinate.
Point advance(Point p, Direction d);

/// Rotates a point 90 degrees counterclockwise about the origin, `quarter_turns` times.
Point rotate(Point p, int quarter_turns);

/// The unit direction leading from `from` to an L1-adjacent `to`.
Direction direction_between(Point from, Point to);

std::int64_t l1_norm(Point p);
std::int64_t l1_distance(Point a, Point b);

/// All points with l1_norm == n, in ring order (counterclockwise from the +x axis).
std::vector<Point> sphere_points(std::int64_t n);

/// 2n^2 + 2n + 1.
std::int64_t closed_ball_count(std::int64_t n);

/// Number of points on the n-sphere: 1 for n == 0, 4n otherwise.
std::int64_t sphere_size(std::int64_t n);

/// Ring coordinates: layer m >= 1 has 4m points indexed 0..4m-1 counterclockwise
/// starting on the +x axis. Index p lies in quadrant p / m at offset p % m.
Point ring_point(std::int64_t layer, std::int64_t index);
std::int64_t ring_index(Point p);

struct Step {
  Direction direction = Direction::kRight;
  std::int64_t count = 1;

  friend bool operator==(const Step&, const Step&) = default;
};

/// A unit-step path of one robot. Steps are run-length encoded; the robot moves
/// one lattice unit per 1/speed time units starting at start_time. Speed 0 means
/// the robot never leaves its start.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(int robot_id, Point start, std::int64_t speed = 1, Time start_time = Time(0));

  /// Builds a trajectory that walks through every point of `path` in order;
  /// consecutive points must be L1-adjacent.
  static Trajectory from_path(int robot_id, const std::vector<Point>& path,
                              std::int64_t speed = 1, Time start_time = Time(0));

  void push(Direction d, std::int64_t count = 1);
  /// Appends an L1-shortest walk to `target` (x first, then y).
  void walk_to(Point target);

  int robot_id() const { return robot_id_; }
  void set_robot_id(int id) { robot_id_ = id; }
  Point start() const { return start_; }
  std::int64_t speed() const { return speed_; }
  Time start_time() const { return start_time_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::int64_t step_count() const { return step_count_; }
  Point end() const { return end_; }
  Time end_time() const { return time_at(step_count_); }

  /// Wall-clock time of the i-th position (i = 0 is the start).
  Time time_at(std::int64_t step_index) const {
    return speed_ == 0 ? start_time_ : start_time_ + Time(step_index, speed_);
  }
  /// Number of unit steps completed by wall-clock time t (clamped to [0, step_count]).
  std::int64_t steps_by(Time t) const;

  /// Every position along the path, including the start.
  std::vector<Point> positions() const;
  Point position_at_step(std::int64_t step_index) const;

  /// First prefix of `count` steps.
  Trajectory truncated(std::int64_t count) const;
  /// Applies `quarter_turns` counterclockwise rotations to the whole path.
  Trajectory rotated(int quarter_turns) const;

  /// Earliest step index at which each point is visited.
  std::unordered_map<Point, std::int64_t, PointHash> first_visit_steps() const;
  /// How many times each point is occupied along the path (start included).
  std::unordered_map<Point, std::int64_t, PointHash> visit_counts() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  int robot_id_ = 0;
  Point start_{};
  std::int64_t speed_ = 1;
  Time start_time_{0};
  std::vector<Step> steps_;
  std::int64_t step_count_ = 0;
  Point end_{};
};

/// Decimal rendering of an exact time: integers plain, otherwise up to 9 fractional digits.
std::string format_time(Time t);

/// Writes `robot_id,t,x,y` rows sorted by (robot_id, t), one per position.
void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajectories);

struct CsvTrajectory {
  int robot_id = 0;
  std::vector<Point> path;
  std::vector<double> times;
};

/// Parses the CSV produced by write_trajectories_csv. Throws std::runtime_error
/// on malformed rows or non-adjacent consecutive positions.
std::vector<CsvTrajectory> read_trajectories_csv(std::istream& is);

}  // namespace latsearch
