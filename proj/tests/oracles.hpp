#pragma once

// Brute-force reference solvers shared by the unit and acceptance tests.

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include <boost/rational.hpp>

#include "latsearch/flow.hpp"
#include "latsearch/pod.hpp"

namespace latsearch::oracle {

// Exhaustive search over every integral transport plan.
class TransportOracle {
 public:
  explicit TransportOracle(const FlowProblem& p) : p_(p) {
    for (const auto& e : p.losing) supply_.push_back(e.old_robots - e.new_robots);
    for (const auto& e : p.gaining) room_.push_back(e.new_robots - e.old_robots);
  }

  std::int64_t minimum() {
    best_ = std::numeric_limits<std::int64_t>::max();
    fill(0, 0, 0);
    return best_;
  }

 private:
  void fill(std::size_t i, std::size_t j, std::int64_t cost) {
    if (cost >= best_) return;
    if (i == supply_.size()) {
      for (auto r : room_) {
        if (r != 0) return;
      }
      best_ = cost;
      return;
    }
    if (j == room_.size()) {
      if (supply_[i] == 0) fill(i + 1, 0, cost);
      return;
    }
    const auto most = std::min(supply_[i], room_[j]);
    for (std::int64_t x = 0; x <= most; ++x) {
      supply_[i] -= x;
      room_[j] -= x;
      fill(i, j + 1, cost + x * p_.distance[i][j]);
      supply_[i] += x;
      room_[j] += x;
    }
  }

  const FlowProblem& p_;
  std::vector<std::int64_t> supply_;
  std::vector<std::int64_t> room_;
  std::int64_t best_ = 0;
};

// Balanced instance with 1..4 losers and gainers, per-node deltas in [1, 3].
inline FlowProblem random_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4), delta(1, 3), coord(-6, 6);
  auto sum = [](const auto& v) { return std::accumulate(v.begin(), v.end(), std::int64_t{0}); };
  std::vector<std::int64_t> loss, gain;
  do {
    loss.assign(static_cast<std::size_t>(count(rng)), 0);
    gain.assign(static_cast<std::size_t>(count(rng)), 0);
    for (auto& v : loss) v = delta(rng);
    for (auto& v : gain) v = delta(rng);
    // Nudge entries within [1, 3] until both sides agree, or redraw if they cannot.
    while (sum(loss) != sum(gain)) {
      auto& big = sum(loss) > sum(gain) ? loss : gain;
      auto& small = sum(loss) > sum(gain) ? gain : loss;
      auto down = std::find_if(big.begin(), big.end(), [](auto v) { return v > 1; });
      auto up = std::find_if(small.begin(), small.end(), [](auto v) { return v < 3; });
      if (down != big.end()) {
        --*down;
      } else if (up != small.end()) {
        ++*up;
      } else {
        break;
      }
    }
  } while (sum(loss) != sum(gain));
  LossGainLedger ledger;
  std::vector<Point> centers;
  for (auto v : loss) {
    ledger.push_back({static_cast<int>(centers.size()), v + 1, 1});
    centers.push_back({coord(rng), coord(rng)});
  }
  for (auto v : gain) {
    ledger.push_back({static_cast<int>(centers.size()), 0, v});
    centers.push_back({coord(rng), coord(rng)});
  }
  return build_flow(ledger, centers, sum(loss));
}

using Q = boost::rational<std::int64_t>;

// Smallest expected discovery time over every visit sequence of the given length.
inline Q best_teleport_time(const std::vector<Q>& priors, const Q& pod, int horizon) {
  std::vector<int> seq(static_cast<std::size_t>(horizon), 0);
  const int n = static_cast<int>(priors.size());
  std::optional<Q> best;
  std::function<void(int)> rec = [&](int t) {
    if (t == horizon) {
      const auto e = teleport_expected_time(priors, pod, seq);
      if (!best || e < *best) best = e;
      return;
    }
    for (int c = 0; c < n; ++c) {
      seq[static_cast<std::size_t>(t)] = c;
      rec(t + 1);
    }
  };
  rec(0);
  return *best;
}

struct TeleportCase {
  std::vector<Q> priors;
  Q pod;
};

// Twenty fixed instances: ten prior vectors, two detection rates each.
inline std::vector<TeleportCase> teleport_cases() {
  const std::vector<std::vector<Q>> priors{
      {Q(1)},
      {Q(1, 2), Q(1, 2)},
      {Q(2, 3), Q(1, 3)},
      {Q(9, 10), Q(1, 10)},
      {Q(1, 3), Q(1, 3), Q(1, 3)},
      {Q(1, 2), Q(1, 4), Q(1, 4)},
      {Q(3, 5), Q(3, 10), Q(1, 10)},
      {Q(7, 10), Q(1, 5), Q(1, 10)},
      {Q(2, 5), Q(2, 5), Q(1, 5)},
      {Q(5, 8), Q(1, 4), Q(1, 8)},
  };
  std::vector<TeleportCase> out;
  for (const auto& p : priors) {
    for (const auto& pod : {Q(1, 2), Q(4, 5)}) out.push_back({p, pod});
  }
  return out;
}

}  // namespace latsearch::oracle
