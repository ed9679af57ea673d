#include "latsearch/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace latsearch {

std::ostream& operator<<(std::ostream& os, const Point& p) {
  return os << '(' << p.x << ',' << p.y << ')';
}

char direction_code(Direction d) {
  switch (d) {
    case Direction::kUp: return 'U';
    case Direction::kDown: return 'D';
    case Direction::kLeft: return 'L';
    case Direction::kRight: return 'R';
  }
  return '?';
}

namespace {

std::int64_t checked(std::int64_t v) {
  if (v > kMaxCoordinate || v < -kMaxCoordinate) {
    throw std::overflow_error("lattice coordinate out of range");
  }
  return v;
}

}  // namespace

Point advance(Point p, Direction d) {
  switch (d) {
    case Direction::kUp: return {p.x, checked(p.y + 1)};
    case Direction::kDown: return {p.x, checked(p.y - 1)};
    case Direction::kLeft: return {checked(p.x - 1), p.y};
    case Direction::kRight: return {checked(p.x + 1), p.y};
  }
  return p;
}

Point rotate(Point p, int quarter_turns) {
  quarter_turns = ((quarter_turns % 4) + 4) % 4;
  for (int i = 0; i < quarter_turns; ++i) p = {-p.y, p.x};
  return p;
}

Direction direction_between(Point from, Point to) {
  if (l1_distance(from, to) != 1) {
    std::ostringstream msg;
    msg << "points " << from << " and " << to << " are not adjacent";
    throw std::invalid_argument(msg.str());
  }
  if (to.x > from.x) return Direction::kRight;
  if (to.x < from.x) return Direction::kLeft;
  return to.y > from.y ? Direction::kUp : Direction::kDown;
}

std::int64_t l1_norm(Point p) { return std::llabs(p.x) + std::llabs(p.y); }

std::int64_t l1_distance(Point a, Point b) {
  return std::llabs(a.x - b.x) + std::llabs(a.y - b.y);
}

std::int64_t closed_ball_count(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("closed_ball_count: negative radius");
  return 2 * n * n + 2 * n + 1;
}

std::int64_t sphere_size(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("sphere_size: negative radius");
  return n == 0 ? 1 : 4 * n;
}

Point ring_point(std::int64_t layer, std::int64_t index) {
  if (layer < 1 || index < 0 || index >= 4 * layer) {
    throw std::out_of_range("ring_point: index outside layer");
  }
  const auto quadrant = static_cast<int>(index / layer);
  const auto offset = index % layer;
  return rotate(Point{checked(layer - offset), offset}, quadrant);
}

std::int64_t ring_index(Point p) {
  const auto m = l1_norm(p);
  if (m == 0) return 0;
  // Undo rotations until the point sits in {x > 0, y >= 0}.
  for (int q = 0; q < 4; ++q) {
    const Point base = rotate(p, -q);
    if (base.x > 0 && base.y >= 0) return q * m + base.y;
  }
  return 0;
}

std::vector<Point> sphere_points(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("sphere_points: negative radius");
  if (n == 0) return {Point{0, 0}};
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(4 * n));
  for (std::int64_t p = 0; p < 4 * n; ++p) out.push_back(ring_point(n, p));
  return out;
}

Trajectory::Trajectory(int robot_id, Point start, std::int64_t speed, Time start_time)
    : robot_id_(robot_id), start_(start), speed_(speed), start_time_(start_time), end_(start) {
  if (speed < 0) throw std::invalid_argument("trajectory speed must be non-negative");
}

Trajectory Trajectory::from_path(int robot_id, const std::vector<Point>& path,
                                 std::int64_t speed, Time start_time) {
  if (path.empty()) throw std::invalid_argument("from_path: empty path");
  Trajectory t(robot_id, path.front(), speed, start_time);
  for (std::size_t i = 1; i < path.size(); ++i) {
    t.push(direction_between(path[i - 1], path[i]));
  }
  return t;
}

void Trajectory::push(Direction d, std::int64_t count) {
  if (count < 1) throw std::invalid_argument("step count must be >= 1");
  if (speed_ == 0) throw std::logic_error("a robot with speed 0 cannot move");
  Point e = end_;
  for (std::int64_t i = 0; i < count; ++i) e = advance(e, d);
  end_ = e;
  if (!steps_.empty() && steps_.back().direction == d) {
    steps_.back().count += count;
  } else {
    steps_.push_back({d, count});
  }
  step_count_ += count;
}

void Trajectory::walk_to(Point target) {
  const auto dx = target.x - end_.x;
  const auto dy = target.y - end_.y;
  if (dx != 0) push(dx > 0 ? Direction::kRight : Direction::kLeft, std::llabs(dx));
  if (dy != 0) push(dy > 0 ? Direction::kUp : Direction::kDown, std::llabs(dy));
}

std::int64_t Trajectory::steps_by(Time t) const {
  if (t < start_time_ || speed_ == 0) return 0;
  const Time elapsed = (t - start_time_) * Time(speed_);
  const auto done = elapsed.numerator() / elapsed.denominator();
  return std::min(done, step_count_);
}

std::vector<Point> Trajectory::positions() const {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(step_count_ + 1));
  Point p = start_;
  out.push_back(p);
  for (const auto& s : steps_) {
    for (std::int64_t i = 0; i < s.count; ++i) {
      p = advance(p, s.direction);
      out.push_back(p);
    }
  }
  return out;
}

Point Trajectory::position_at_step(std::int64_t step_index) const {
  if (step_index < 0 || step_index > step_count_) {
    throw std::out_of_range("position_at_step: index beyond trajectory");
  }
  Point p = start_;
  std::int64_t remaining = step_index;
  for (const auto& s : steps_) {
    const auto take = std::min(remaining, s.count);
    switch (s.direction) {
      case Direction::kUp: p.y += take; break;
      case Direction::kDown: p.y -= take; break;
      case Direction::kLeft: p.x -= take; break;
      case Direction::kRight: p.x += take; break;
    }
    remaining -= take;
    if (remaining == 0) break;
  }
  return p;
}

Trajectory Trajectory::truncated(std::int64_t count) const {
  Trajectory t(robot_id_, start_, speed_, start_time_);
  std::int64_t remaining = std::max<std::int64_t>(0, count);
  for (const auto& s : steps_) {
    if (remaining == 0) break;
    const auto take = std::min(remaining, s.count);
    t.push(s.direction, take);
    remaining -= take;
  }
  return t;
}

Trajectory Trajectory::rotated(int quarter_turns) const {
  Trajectory t(robot_id_, rotate(start_, quarter_turns), speed_, start_time_);
  for (const auto& s : steps_) {
    const Point unit = advance(Point{0, 0}, s.direction);
    t.push(direction_between(Point{0, 0}, rotate(unit, quarter_turns)), s.count);
  }
  return t;
}

std::unordered_map<Point, std::int64_t, PointHash> Trajectory::first_visit_steps() const {
  std::unordered_map<Point, std::int64_t, PointHash> out;
  const auto pts = positions();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.try_emplace(pts[i], static_cast<std::int64_t>(i));
  }
  return out;
}

std::unordered_map<Point, std::int64_t, PointHash> Trajectory::visit_counts() const {
  std::unordered_map<Point, std::int64_t, PointHash> out;
  for (const auto& p : positions()) ++out[p];
  return out;
}

std::string format_time(Time t) {
  const auto num = t.numerator();
  const auto den = t.denominator();
  if (den == 1) return std::to_string(num);
  std::ostringstream os;
  if (num < 0) os << '-';
  const auto whole = std::llabs(num) / den;
  auto rem = std::llabs(num) % den;
  os << whole << '.';
  std::string frac;
  for (int i = 0; i < 9 && rem != 0; ++i) {
    rem *= 10;
    frac.push_back(static_cast<char>('0' + rem / den));
    rem %= den;
  }
  os << frac;
  return os.str();
}

void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajectories) {
  std::vector<const Trajectory*> order;
  for (const auto& t : trajectories) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Trajectory* a, const Trajectory* b) {
    return a->robot_id() < b->robot_id();
  });
  os << "robot_id,t,x,y\n";
  for (const auto* t : order) {
    const auto pts = t->positions();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << t->robot_id() << ',' << format_time(t->time_at(static_cast<std::int64_t>(i))) << ','
         << pts[i].x << ',' << pts[i].y << '\n';
    }
  }
}

std::vector<CsvTrajectory> read_trajectories_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("plan csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "robot_id,t,x,y") throw std::runtime_error("plan csv: unexpected header '" + line + "'");

  std::map<int, CsvTrajectory> by_robot;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(row, f[i], ',')) {
        throw std::runtime_error("plan csv: short row at line " + std::to_string(lineno));
      }
    }
    try {
      const int id = std::stoi(f[0]);
      auto& tr = by_robot[id];
      tr.robot_id = id;
      tr.times.push_back(std::stod(f[1]));
      tr.path.push_back(Point{std::stoll(f[2]), std::stoll(f[3])});
    } catch (const std::logic_error&) {
      throw std::runtime_error("plan csv: bad number at line " + std::to_string(lineno));
    }
  }
  std::vector<CsvTrajectory> out;
  for (auto& [id, tr] : by_robot) {
    for (std::size_t i = 1; i < tr.path.size(); ++i) {
      if (l1_distance(tr.path[i - 1], tr.path[i]) != 1) {
        throw std::runtime_error("plan csv: robot " + std::to_string(id) + " jumps between rows");
      }
      if (!(tr.times[i] > tr.times[i - 1])) {
        throw std::runtime_error("plan csv: robot " + std::to_string(id) + " times not increasing");
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace latsearch
