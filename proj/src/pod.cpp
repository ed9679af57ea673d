#include "latsearch/pod.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace latsearch {

double PodGrid::total_residual() const {
  double total = 0.0;
  for (int c = 0; c < static_cast<int>(cell_prob.size()); ++c) total += residual(c);
  return total;
}

PodGrid make_pod_grid(std::int64_t width, std::int64_t height, std::vector<double> weights,
                      double pod_per_pass) {
  if (width < 1 || height < 1) throw std::runtime_error("pod grid: dimensions must be positive");
  if (static_cast<std::int64_t>(weights.size()) != width * height) {
    throw std::runtime_error("pod grid: expected " + std::to_string(width * height) + " cells, got " +
                             std::to_string(weights.size()));
  }
  if (!(pod_per_pass > 0.0 && pod_per_pass <= 1.0)) {
    throw std::invalid_argument("pod per pass must lie in (0, 1]");
  }
  double total = 0.0;
  for (auto w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::runtime_error("pod grid: negative or invalid cell value");
    total += w;
  }
  if (total <= 0.0) throw std::runtime_error("pod grid: all cells are zero");
  for (auto& w : weights) w /= total;
  PodGrid g;
  g.width = width;
  g.height = height;
  g.cell_prob = std::move(weights);
  g.pod_per_pass = pod_per_pass;
  g.visit_count.assign(g.cell_prob.size(), 0);
  return g;
}

PodGrid load_pod_grid(std::istream& is, double pod_per_pass) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw std::runtime_error("pod grid: missing header");
  std::istringstream head(rows.front());
  std::int64_t width = 0, height = 0;
  std::string extra;
  if (!(head >> width >> height) || (head >> extra)) {
    throw std::runtime_error("pod grid: header must be 'width height'");
  }
  if (width < 1 || height < 1) throw std::runtime_error("pod grid: dimensions must be positive");
  if (static_cast<std::int64_t>(rows.size()) - 1 != height) {
    throw std::runtime_error("pod grid: expected " + std::to_string(height) + " rows, got " +
                             std::to_string(rows.size() - 1));
  }
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(width * height));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::istringstream row(rows[r]);
    std::string token;
    std::int64_t count = 0;
    while (row >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used != token.size()) throw std::runtime_error("pod grid: bad value '" + token + "'");
      weights.push_back(v);
      ++count;
    }
    if (count != width) {
      throw std::runtime_error("pod grid: row " + std::to_string(r) + " has " + std::to_string(count) +
                               " values, expected " + std::to_string(width));
    }
  }
  return make_pod_grid(width, height, std::move(weights), pod_per_pass);
}

std::vector<Point> sweep_order(std::int64_t width, std::int64_t height) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(width * height));
  for (std::int64_t d = 0; d <= width + height - 2; ++d) {
    const auto lo = std::max<std::int64_t>(0, d - (height - 1));
    const auto hi = std::min<std::int64_t>(d, width - 1);
    if (d % 2 == 0) {
      for (auto x = hi; x >= lo; --x) out.push_back({x, d - x});
    } else {
      for (auto x = lo; x <= hi; ++x) out.push_back({x, d - x});
    }
  }
  return out;
}

std::int64_t default_supercell_side(std::int64_t width, std::int64_t height, std::int64_t robots) {
  if (robots < 1) throw std::invalid_argument("robot count must be positive");
  const double area = static_cast<double>(width) * static_cast<double>(height);
  auto side = static_cast<std::int64_t>(std::ceil(std::sqrt(area / (4.0 * static_cast<double>(robots)))));
  return std::clamp<std::int64_t>(side, 1, std::min(width, height));
}

PodScheduler::PodScheduler(PodGrid grid, SchedulerConfig config)
    : grid_(std::move(grid)), config_(config) {
  if (config_.robots < 1) throw std::invalid_argument("scheduler needs at least one robot");
  if (config_.supercell_side < 0) throw std::invalid_argument("supercell side must be non-negative");
  if (config_.threshold < 0.0) throw std::invalid_argument("threshold must be non-negative");
  if (config_.horizon < 1) throw std::invalid_argument("horizon must be positive");
  side_ = config_.supercell_side > 0 ? config_.supercell_side
                                     : default_supercell_side(grid_.width, grid_.height, config_.robots);
  double mass = std::accumulate(grid_.cell_prob.begin(), grid_.cell_prob.end(), 0.0);
  abandon_ = config_.threshold * mass;

  for (std::int64_t by = 0; by * side_ < grid_.height; ++by) {
    for (std::int64_t bx = 0; bx * side_ < grid_.width; ++bx) {
      Supercell s;
      s.index = static_cast<int>(cells_.size());
      s.origin = {bx * side_, by * side_};
      s.width = std::min(side_, grid_.width - s.origin.x);
      s.height = std::min(side_, grid_.height - s.origin.y);
      for (const auto& p : sweep_order(s.width, s.height)) {
        s.cells.push_back(grid_.cell_id(s.origin.x + p.x, s.origin.y + p.y));
      }
      cells_.push_back(std::move(s));
    }
  }
  cursor_.assign(cells_.size(), 0);
  unswept_.resize(cells_.size());
  arriving_.resize(cells_.size());
  for (std::size_t s = 0; s < cells_.size(); ++s) {
    unswept_[s] = 0;
    for (int c : cells_[s].cells) {
      if (grid_.visit_count[static_cast<std::size_t>(c)] == 0) ++unswept_[s];
    }
    cells_[s].fully_swept = unswept_[s] == 0;
    refresh(static_cast<int>(s));
  }
}

void PodScheduler::refresh(int s) {
  auto& sc = cells_[static_cast<std::size_t>(s)];
  double sum = 0.0;
  for (int c : sc.cells) sum += grid_.residual(c);
  sc.combined_prob = sum;
}

std::int64_t PodScheduler::in_transit(int s) const {
  std::int64_t n = 0;
  for (const auto& a : arriving_[static_cast<std::size_t>(s)]) n += a.robots;
  return n;
}

std::vector<Point> PodScheduler::centers() const {
  std::vector<Point> out;
  for (const auto& s : cells_) out.push_back(s.center());
  return out;
}

bool PodScheduler::blocked(int s) const {
  const auto& sc = cells_[static_cast<std::size_t>(s)];
  const auto n = static_cast<std::int64_t>(sc.cells.size());
  return sc.robots == 1 && (!sc.fully_swept || cursor_[static_cast<std::size_t>(s)] % n != 0);
}

int PodScheduler::best_gainer() const {
  int best = 0;
  double key = -1.0;
  for (const auto& s : cells_) {
    const double k = s.combined_prob / static_cast<double>(s.robots + 1);
    if (k > key) {
      key = k;
      best = s.index;
    }
  }
  return best;
}

int PodScheduler::best_loser() const {
  int best = -1;
  double key = std::numeric_limits<double>::infinity();
  for (const auto& s : cells_) {
    if (s.robots < 1 || blocked(s.index)) continue;
    const double k = s.combined_prob / static_cast<double>(s.robots);
    if (k < key) {
      key = k;
      best = s.index;
    }
  }
  return best;
}

double PodScheduler::stability_gap() const {
  const auto& g = cells_[static_cast<std::size_t>(best_gainer())];
  const int l = best_loser();
  if (l < 0) return -std::numeric_limits<double>::infinity();
  const auto& lo = cells_[static_cast<std::size_t>(l)];
  return g.combined_prob / static_cast<double>(g.robots + 1) -
         lo.combined_prob / static_cast<double>(lo.robots);
}

void PodScheduler::allocate_initial() {
  if (allocated_) throw std::logic_error("robots already allocated");
  for (std::int64_t r = 0; r < config_.robots; ++r) ++cells_[static_cast<std::size_t>(best_gainer())].robots;
  allocated_ = true;
}

bool PodScheduler::terminated() const {
  if (time_ >= config_.horizon) return true;
  return std::all_of(cells_.begin(), cells_.end(),
                     [this](const Supercell& s) { return s.combined_prob <= abandon_; });
}

StepRecord PodScheduler::step() {
  if (!allocated_) allocate_initial();
  StepRecord rec;
  const auto now = time_;

  // Robots that have arrived sweep their next cells.
  for (auto& s : cells_) {
    auto& inbound = arriving_[static_cast<std::size_t>(s.index)];
    std::erase_if(inbound, [now](const Arrival& a) { return a.time <= now; });
    const auto active = s.robots - in_transit(s.index);
    const auto n = static_cast<std::int64_t>(s.cells.size());
    auto& cur = cursor_[static_cast<std::size_t>(s.index)];
    for (std::int64_t r = 0; r < active; ++r) {
      const int c = s.cells[static_cast<std::size_t>(cur % n)];
      ++cur;
      if (grid_.visit_count[static_cast<std::size_t>(c)]++ == 0) --unswept_[static_cast<std::size_t>(s.index)];
      rec.passes.push_back(c);
    }
    s.fully_swept = unswept_[static_cast<std::size_t>(s.index)] == 0;
    if (active > 0) refresh(s.index);
  }

  // Move single robots from the cheapest active supercell to the most valuable one.
  std::vector<std::int64_t> before;
  for (const auto& s : cells_) before.push_back(s.robots);
  const auto cap = config_.robots * static_cast<std::int64_t>(cells_.size()) + 1;
  while (rec.rebalance_iterations < cap) {
    const int g = best_gainer();
    const int l = best_loser();
    if (l < 0 || g == l) break;
    auto& gs = cells_[static_cast<std::size_t>(g)];
    auto& ls = cells_[static_cast<std::size_t>(l)];
    if (!(gs.combined_prob / static_cast<double>(gs.robots + 1) >
          ls.combined_prob / static_cast<double>(ls.robots))) {
      break;
    }
    --ls.robots;
    ++gs.robots;
    ++rec.rebalance_iterations;
  }

  for (std::size_t s = 0; s < cells_.size(); ++s) {
    if (cells_[s].robots != before[s]) rec.ledger.push_back({static_cast<int>(s), before[s], cells_[s].robots});
  }
  if (!rec.ledger.empty()) {
    const auto where = centers();
    const auto plan = solve_min_cost(build_flow(rec.ledger, where, config_.robots));
    rec.transit_cost = plan.total_cost;
    for (const auto& mv : plan.moves) {
      rec.transfers.push_back({mv.from_supercell, mv.to_supercell, mv.robots});
      // Robots that were still heading for the losing supercell are redirected
      // first, latest arrival first; they are charged from its center.
      auto& inbound = arriving_[static_cast<std::size_t>(mv.from_supercell)];
      auto excess = in_transit(mv.from_supercell) - cells_[static_cast<std::size_t>(mv.from_supercell)].robots;
      while (excess > 0 && !inbound.empty()) {
        const auto take = std::min(excess, inbound.back().robots);
        inbound.back().robots -= take;
        excess -= take;
        if (inbound.back().robots == 0) inbound.pop_back();
      }
      const auto d = l1_distance(where[static_cast<std::size_t>(mv.from_supercell)],
                                 where[static_cast<std::size_t>(mv.to_supercell)]);
      arriving_[static_cast<std::size_t>(mv.to_supercell)].push_back({now + 1 + d, mv.robots});
    }
  }

  time_ = now + 1;
  rec.t = time_;
  rec.residual_total = 0.0;
  for (const auto& s : cells_) rec.residual_total += s.combined_prob;
  return rec;
}

std::string event_json(const StepRecord& record, const std::vector<Point>& centers) {
  using nlohmann::json;
  json transfers = json::array();
  for (const auto& t : record.transfers) {
    transfers.push_back({{"from", t.from}, {"to", t.to}, {"robots", t.robots}});
  }
  json ledger = json::array();
  for (const auto& e : record.ledger) {
    const auto& c = centers.at(static_cast<std::size_t>(e.supercell));
    ledger.push_back({{"supercell", e.supercell}, {"x", c.x}, {"y", c.y}, {"old", e.old_robots}, {"new", e.new_robots}});
  }
  json j;
  j["t"] = record.t;
  j["transfers"] = transfers;
  j["residual_total"] = record.residual_total;
  j["ledger"] = ledger;
  j["transit_cost"] = record.transit_cost;
  return j.dump();
}

std::vector<TeleportVisit> greedy_teleport_schedule(const PodGrid& grid, std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  const auto order = greedy_teleport_order(grid.cell_prob, grid.pod_per_pass, horizon);
  std::vector<double> residual = grid.cell_prob;
  std::vector<TeleportVisit> out;
  for (std::size_t t = 0; t < order.size(); ++t) {
    auto& r = residual[static_cast<std::size_t>(order[t])];
    const double q = r * grid.pod_per_pass;
    out.push_back({static_cast<std::int64_t>(t + 1), order[t], q});
    r -= q;
  }
  return out;
}

}  // namespace latsearch
