#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "latsearch/flow.hpp"
#include "latsearch/lattice.hpp"

namespace latsearch {

/// Cell priors of a rectangular search area. Cell (x, y) has id y * width + x.
struct PodGrid {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<double> cell_prob;
  /// Chance that one pass over the target's cell detects it.
  double pod_per_pass = 1.0;
  std::vector<std::int64_t> visit_count;

  std::int64_t cell_count() const { return width * height; }
  int cell_id(std::int64_t x, std::int64_t y) const { return static_cast<int>(y * width + x); }
  /// prior * (1 - p)^m, always computed from the visit count.
  double residual(int cell) const {
    const auto c = static_cast<std::size_t>(cell);
    return cell_prob[c] * std::pow(1.0 - pod_per_pass, static_cast<double>(visit_count[c]));
  }
  double total_residual() const;
};

/// Parses `width height` followed by `height` rows of `width` non-negative
/// numbers; lines starting with '#' are skipped. Normalizes to total 1.
/// Throws std::runtime_error on malformed input.
PodGrid load_pod_grid(std::istream& is, double pod_per_pass = 1.0);
PodGrid make_pod_grid(std::int64_t width, std::int64_t height, std::vector<double> weights,
                      double pod_per_pass = 1.0);

struct Supercell {
  int index = 0;
  Point origin{};
  std::int64_t width = 0;
  std::int64_t height = 0;
  /// Member cells in sweep order.
  std::vector<int> cells;
  double combined_prob = 0.0;
  std::int64_t robots = 0;
  bool fully_swept = false;

  /// Integer center in cell units.
  Point center() const { return {origin.x + width / 2, origin.y + height / 2}; }
};

/// Diagonal snake through a w x h block starting at its corner: anti-diagonal
/// d = dx + dy, direction alternating from one diagonal to the next.
std::vector<Point> sweep_order(std::int64_t width, std::int64_t height);

/// Default supercell side: ceil(sqrt(w h / 4k)) clamped to [1, min(w, h)].
std::int64_t default_supercell_side(std::int64_t width, std::int64_t height, std::int64_t robots);

struct SchedulerConfig {
  std::int64_t robots = 1;
  /// 0 picks default_supercell_side.
  std::int64_t supercell_side = 0;
  /// Stop once every supercell's residual is at most this fraction of the prior mass.
  double threshold = 1e-4;
  std::int64_t horizon = 1'000'000;
};

struct Transfer {
  int from = 0;
  int to = 0;
  std::int64_t robots = 0;
};

struct StepRecord {
  /// Time after the step.
  std::int64_t t = 0;
  /// Cells passed over during the step, one entry per robot pass.
  std::vector<int> passes;
  LossGainLedger ledger;
  std::vector<Transfer> transfers;
  std::int64_t transit_cost = 0;
  std::int64_t rebalance_iterations = 0;
  double residual_total = 0.0;
};

/// Supercell-level allocation: robots go where p / (r + 1) is largest and leave
/// where p / r is smallest, one at a time, until no such pair improves.
class PodScheduler {
 public:
  PodScheduler(PodGrid grid, SchedulerConfig config);

  /// Hands out all robots greedily by p / (r + 1), lowest index on ties.
  void allocate_initial();
  /// One time unit: sweep, decay, rebalance, route the moved robots.
  StepRecord step();
  bool terminated() const;

  const PodGrid& grid() const { return grid_; }
  const std::vector<Supercell>& supercells() const { return cells_; }
  std::int64_t time() const { return time_; }
  std::int64_t total_robots() const { return config_.robots; }
  std::int64_t supercell_side() const { return side_; }
  double abandon_threshold() const { return abandon_; }
  /// Robots of supercell s still travelling toward it.
  std::int64_t in_transit(int s) const;
  std::vector<Point> centers() const;

  /// max over all p/(r+1) minus min over active, non-blocked p/r (<= 0 when stable).
  double stability_gap() const;
  /// The last robot of a supercell may not leave while cells were never visited
  /// or while its current sweep round is unfinished.
  bool blocked(int s) const;

 private:
  void refresh(int s);
  int best_gainer() const;
  int best_loser() const;

  PodGrid grid_;
  SchedulerConfig config_;
  std::int64_t side_ = 1;
  double abandon_ = 0.0;
  std::vector<Supercell> cells_;
  std::vector<std::int64_t> cursor_;
  std::vector<std::int64_t> unswept_;
  struct Arrival {
    std::int64_t time;
    std::int64_t robots;
  };
  std::vector<std::vector<Arrival>> arriving_;
  std::int64_t time_ = 0;
  bool allocated_ = false;
};

/// One JSON line for the event log.
std::string event_json(const StepRecord& record, const std::vector<Point>& centers);

struct TeleportVisit {
  std::int64_t time = 0;
  int cell = 0;
  double discovery_prob = 0.0;
};

/// Single free-moving searcher: at every time visit the cell with the highest
/// chance of detection right now, lowest index on ties.
std::vector<TeleportVisit> greedy_teleport_schedule(const PodGrid& grid, std::int64_t horizon);

/// Same rule over any exact field (e.g. boost::rational). Returns cell choices.
template <class Real>
std::vector<int> greedy_teleport_order(const std::vector<Real>& priors, const Real& pod,
                                       std::int64_t horizon) {
  std::vector<Real> residual = priors;
  std::vector<int> out;
  for (std::int64_t t = 0; t < horizon; ++t) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(residual.size()); ++i) {
      if (residual[static_cast<std::size_t>(i)] > residual[static_cast<std::size_t>(best)]) best = i;
    }
    out.push_back(best);
    residual[static_cast<std::size_t>(best)] *= Real(1) - pod;
  }
  return out;
}

/// Expected discovery time of a visit sequence, sum_t t * q_t, where the mass
/// still undetected after the last visit is charged at time horizon + 1.
template <class Real>
Real teleport_expected_time(const std::vector<Real>& priors, const Real& pod, const std::vector<int>& order) {
  std::vector<Real> residual = priors;
  Real total(0);
  for (const auto& p : priors) total += p;
  Real expected(0);
  Real found(0);
  for (std::size_t t = 0; t < order.size(); ++t) {
    auto& r = residual[static_cast<std::size_t>(order[t])];
    const Real q = r * pod;
    expected += q * Real(static_cast<std::int64_t>(t + 1));
    found += q;
    r -= q;
  }
  return expected + (total - found) * Real(static_cast<std::int64_t>(order.size() + 1));
}

}  // namespace latsearch
