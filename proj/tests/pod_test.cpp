#include <gtest/gtest.h>

#include <boost/rational.hpp>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "latsearch/pod.hpp"
#include "oracles.hpp"

namespace latsearch {
namespace {

using Q = boost::rational<std::int64_t>;

PodGrid grid_from(const std::string& text, double pod = 1.0) {
  std::istringstream is(text);
  return load_pod_grid(is, pod);
}

TEST(PodGrid, UniformNormalization) {
  const auto g = grid_from("2 2\n1 1\n1 1\n");
  for (auto p : g.cell_prob) EXPECT_DOUBLE_EQ(p, 0.25);
  EXPECT_EQ(g.visit_count, (std::vector<std::int64_t>(4, 0)));
}

TEST(PodGrid, ProportionalNormalizationAndComments) {
  const auto g = grid_from("# a comment\n3 1\n\n# another\n3 0 1\n");
  EXPECT_EQ(g.width, 3);
  EXPECT_DOUBLE_EQ(g.cell_prob[0], 0.75);
  EXPECT_DOUBLE_EQ(g.cell_prob[1], 0.0);
  EXPECT_DOUBLE_EQ(g.cell_prob[2], 0.25);
}

TEST(PodGrid, RejectsMalformedInput) {
  EXPECT_THROW(grid_from(""), std::runtime_error);
  EXPECT_THROW(grid_from("2\n1 1\n"), std::runtime_error);
  EXPECT_THROW(grid_from("0 1\n\n"), std::runtime_error);
  EXPECT_THROW(grid_from("2 1\n1\n"), std::runtime_error);
  EXPECT_THROW(grid_from("2 2\n1 1\n"), std::runtime_error);
  EXPECT_THROW(grid_from("2 1\n1 -1\n"), std::runtime_error);
  EXPECT_THROW(grid_from("2 1\n0 0\n"), std::runtime_error);
  EXPECT_THROW(grid_from("2 1\n1 x\n"), std::runtime_error);
  EXPECT_THROW(grid_from("1 1\n1\n", 0.0), std::invalid_argument);
}

TEST(PodGrid, ResidualDecay) {
  auto g = grid_from("2 1\n1 3\n", 0.5);
  g.visit_count[1] = 3;
  EXPECT_DOUBLE_EQ(g.residual(1), 0.75 * 0.125);
  EXPECT_DOUBLE_EQ(g.residual(0), 0.25);

  // Exact check of the same rule over rationals, driven by the greedy teleport order.
  const std::vector<Q> priors{Q(1, 4), Q(3, 4)};
  const Q pod(1, 3);
  const auto order = greedy_teleport_order(priors, pod, 8);
  std::vector<std::int64_t> visits(2, 0);
  std::vector<Q> residual = priors;
  for (int c : order) {
    ++visits[static_cast<std::size_t>(c)];
    residual[static_cast<std::size_t>(c)] *= Q(1) - pod;
  }
  for (std::size_t c = 0; c < 2; ++c) {
    Q expect = priors[c];
    for (std::int64_t m = 0; m < visits[c]; ++m) expect *= Q(2, 3);
    EXPECT_EQ(residual[c], expect);
  }
}

// Three nested square rings on a 40 x 40 map, aligned to 4-cell supercells.
int ring_of(std::int64_t x, std::int64_t y) {
  const auto d = std::max(std::llabs(2 * x - 39), std::llabs(2 * y - 39));
  return d < 16 ? 0 : (d < 32 ? 1 : 2);
}

TEST(PodGrid, SupercellsReproduceRingWeights) {
  const double weight[3] = {0.5, 0.3, 0.2};
  std::int64_t count[3] = {0, 0, 0};
  for (std::int64_t y = 0; y < 40; ++y)
    for (std::int64_t x = 0; x < 40; ++x) ++count[ring_of(x, y)];
  std::vector<double> cells;
  for (std::int64_t y = 0; y < 40; ++y)
    for (std::int64_t x = 0; x < 40; ++x) cells.push_back(weight[ring_of(x, y)] / static_cast<double>(count[ring_of(x, y)]));
  PodScheduler s(make_pod_grid(40, 40, cells), {4, 4, 1e-4, 100});
  ASSERT_EQ(s.supercells().size(), 100u);
  double sums[3] = {0, 0, 0};
  for (const auto& sc : s.supercells()) {
    const int r = ring_of(sc.origin.x, sc.origin.y);
    for (int c : sc.cells) ASSERT_EQ(ring_of(c % 40, c / 40), r);
    sums[r] += sc.combined_prob;
  }
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(sums[r], weight[r], 1e-9);
}

TEST(Supercells, SweepOrderAndSide) {
  for (auto [w, h] : {std::pair<int, int>{1, 1}, {3, 2}, {4, 4}, {2, 5}}) {
    const auto order = sweep_order(w, h);
    EXPECT_EQ(order.front(), (Point{0, 0}));
    EXPECT_EQ(std::set<Point>(order.begin(), order.end()).size(), static_cast<std::size_t>(w * h));
    for (std::size_t i = 1; i < order.size(); ++i) {
      EXPECT_LE(std::max(std::llabs(order[i].x - order[i - 1].x), std::llabs(order[i].y - order[i - 1].y)), 2);
    }
  }
  EXPECT_EQ(default_supercell_side(40, 40, 12), 6);
  EXPECT_EQ(default_supercell_side(3, 100, 1), 3);
  EXPECT_EQ(default_supercell_side(1, 1, 50), 1);
  // Partial blocks at the edges.
  PodScheduler s(make_pod_grid(5, 3, std::vector<double>(15, 1.0)), {1, 2, 1e-4, 10});
  ASSERT_EQ(s.supercells().size(), 6u);
  EXPECT_EQ(s.supercells()[2].width, 1);
  EXPECT_EQ(s.supercells()[5].cells.size(), 1u);
}

std::vector<std::int64_t> allocation(const std::vector<double>& p, std::int64_t k) {
  PodScheduler s(make_pod_grid(static_cast<std::int64_t>(p.size()), 1, p), {k, 1, 1e-4, 10});
  s.allocate_initial();
  std::vector<std::int64_t> out;
  for (const auto& sc : s.supercells()) out.push_back(sc.robots);
  return out;
}

bool stable(const std::vector<double>& p, const std::vector<std::int64_t>& r) {
  double hi = 0.0, lo = 1e300;
  for (std::size_t i = 0; i < p.size(); ++i) {
    hi = std::max(hi, p[i] / static_cast<double>(r[i] + 1));
    if (r[i] > 0) lo = std::min(lo, p[i] / static_cast<double>(r[i]));
  }
  return hi <= lo + 1e-12;
}

TEST(Allocate, InequalityOneExamples) {
  EXPECT_EQ(allocation({0.6, 0.2}, 4), (std::vector<std::int64_t>{3, 1}));
  EXPECT_EQ(allocation({0.5, 0.5}, 2), (std::vector<std::int64_t>{1, 1}));
}

TEST(Allocate, MatchesBruteForceStableCompositions) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<std::vector<double>> cases{{0.9, 0.05, 0.05}};
  for (int i = 0; i < 30; ++i) cases.push_back({u(rng), u(rng), u(rng)});
  for (auto p : cases) {
    double total = p[0] + p[1] + p[2];
    for (auto& v : p) v /= total;
    for (std::int64_t k = 1; k <= 6; ++k) {
      std::vector<std::vector<std::int64_t>> good;
      for (std::int64_t a = 0; a <= k; ++a)
        for (std::int64_t b = 0; a + b <= k; ++b)
          if (stable(p, {a, b, k - a - b})) good.push_back({a, b, k - a - b});
      const auto got = allocation(p, k);
      EXPECT_NE(std::find(good.begin(), good.end(), got), good.end());
    }
  }
  EXPECT_EQ(allocation({0.9, 0.05, 0.05}, 3), (std::vector<std::int64_t>{3, 0, 0}));
}

TEST(Scheduler, SingleSupercellDecays) {
  PodScheduler s(make_pod_grid(3, 3, std::vector<double>(9, 1.0), 0.3), {2, 3, 1e-4, 100});
  s.allocate_initial();
  double last = s.grid().total_residual();
  for (int i = 0; i < 20; ++i) {
    const auto rec = s.step();
    EXPECT_TRUE(rec.ledger.empty());
    EXPECT_EQ(rec.passes.size(), 2u);
    EXPECT_LT(rec.residual_total, last);
    last = rec.residual_total;
  }
}

TEST(Scheduler, SweptCellReleasesItsRobot) {
  PodScheduler s(make_pod_grid(2, 1, {1.0, 1.0}, 1.0), {1, 1, 0.0, 100});
  s.allocate_initial();
  EXPECT_EQ(s.supercells()[0].robots, 1);
  auto rec = s.step();
  EXPECT_EQ(rec.passes, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(s.supercells()[0].combined_prob, 0.0);
  ASSERT_EQ(rec.transfers.size(), 1u);
  EXPECT_EQ(rec.transfers[0].from, 0);
  EXPECT_EQ(rec.transfers[0].to, 1);
  EXPECT_EQ(rec.transit_cost, 1);
  EXPECT_EQ(s.supercells()[1].robots, 1);
  EXPECT_EQ(s.in_transit(1), 1);
  rec = s.step();
  EXPECT_TRUE(rec.passes.empty());
  EXPECT_FALSE(s.terminated());
  rec = s.step();
  EXPECT_EQ(rec.passes, std::vector<int>{1});
  EXPECT_TRUE(s.terminated());
}

TEST(Scheduler, LastRobotStaysUntilSwept) {
  // After its first pass supercell 0 holds almost nothing, but two of its cells
  // are still unvisited, so its only robot has to stay.
  std::vector<double> w{0.5, 0.001, 0.001, 0.4, 0.4, 0.4};
  PodScheduler s(make_pod_grid(6, 1, w, 1.0), {3, 3, 0.0, 100});
  s.allocate_initial();
  EXPECT_EQ(s.supercells()[0].robots, 1);
  EXPECT_EQ(s.supercells()[1].robots, 2);
  const auto rec = s.step();
  EXPECT_TRUE(rec.ledger.empty());
  EXPECT_TRUE(s.blocked(0));
  while (!s.terminated()) {
    s.step();
    if (!s.supercells()[0].fully_swept) EXPECT_GE(s.supercells()[0].robots, 1);
  }
  EXPECT_TRUE(s.supercells()[0].fully_swept);
}

TEST(Scheduler, LoneRobotFinishesItsRound) {
  // Two 2x2 supercells and one robot: it only leaves after a whole round.
  PodScheduler s(make_pod_grid(4, 2, std::vector<double>(8, 1.0), 0.5), {1, 2, 1e-3, 200});
  s.allocate_initial();
  std::int64_t passes = 0;
  int moves = 0;
  while (!s.terminated()) {
    const auto rec = s.step();
    passes += static_cast<std::int64_t>(rec.passes.size());
    if (!rec.transfers.empty()) {
      EXPECT_EQ(passes % 4, 0) << "left mid-round at t=" << rec.t;
      passes = 0;
      ++moves;
    }
  }
  EXPECT_GE(moves, 3);
}

TEST(Scheduler, InvariantsOnRandomGrid) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(1600);
  for (auto& v : w) v = u(rng) * u(rng);
  const std::int64_t k = 12;
  PodScheduler s(make_pod_grid(40, 40, w, 0.05), {k, 0, 1e-6, 1000});
  s.allocate_initial();
  EXPECT_LE(s.stability_gap(), 1e-12);
  double last = s.grid().total_residual();
  int steps = 0;
  while (!s.terminated()) {
    const auto rec = s.step();
    ++steps;
    std::int64_t total = 0;
    for (const auto& sc : s.supercells()) total += sc.robots;
    ASSERT_EQ(total, k);
    EXPECT_LE(s.stability_gap(), 1e-12) << "t=" << rec.t;
    EXPECT_LE(rec.residual_total, last + 1e-15);
    EXPECT_LE(rec.rebalance_iterations, k);
    last = rec.residual_total;
    for (const auto& sc : s.supercells()) {
      double sum = 0.0;
      for (int c : sc.cells) sum += s.grid().residual(c);
      ASSERT_NEAR(sum, sc.combined_prob, 1e-12);
    }
  }
  EXPECT_EQ(steps, 1000);
}

TEST(Scheduler, EventLine) {
  PodScheduler s(make_pod_grid(2, 1, {1.0, 1.0}, 1.0), {1, 1, 0.0, 100});
  s.allocate_initial();
  const auto line = event_json(s.step(), s.centers());
  EXPECT_EQ(line.find('\n'), std::string::npos);
  for (const char* key : {"\"t\":1", "\"transfers\"", "\"residual_total\"", "\"ledger\""}) {
    EXPECT_NE(line.find(key), std::string::npos) << key;
  }
}

TEST(Teleport, HandExamples) {
  EXPECT_EQ(teleport_expected_time<Q>({Q(1)}, Q(1), greedy_teleport_order<Q>({Q(1)}, Q(1), 1)), Q(1));
  const std::vector<Q> halves{Q(1, 2), Q(1, 2)};
  EXPECT_EQ(teleport_expected_time(halves, Q(1), greedy_teleport_order(halves, Q(1), 2)), Q(3, 2));
  const auto sched = greedy_teleport_schedule(make_pod_grid(2, 1, {1, 1}, 1.0), 2);
  ASSERT_EQ(sched.size(), 2u);
  EXPECT_DOUBLE_EQ(sched[0].discovery_prob * 1 + sched[1].discovery_prob * 2, 1.5);
}

TEST(Teleport, GreedyIsOptimal) {
  const std::vector<Q> given{Q(1, 2), Q(3, 10), Q(1, 5)};
  EXPECT_EQ(teleport_expected_time(given, Q(3, 5), greedy_teleport_order(given, Q(3, 5), 6)),
            oracle::best_teleport_time(given, Q(3, 5), 6));

  int checked = 0;
  for (const auto& c : oracle::teleport_cases()) {
    const auto greedy = teleport_expected_time(c.priors, c.pod, greedy_teleport_order(c.priors, c.pod, 6));
    EXPECT_EQ(greedy, oracle::best_teleport_time(c.priors, c.pod, 6));
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

}  // namespace
}  // namespace latsearch
