// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>

#include "latsearch/analysis.hpp"
#include "latsearch/montecarlo.hpp"
#include "latsearch/pod.hpp"
#include "latsearch/strategy.hpp"
#include "oracles.hpp"

using namespace latsearch;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    out.ok = false;
    out.detail += " (over the " + std::to_string(budget_s) + " s budget)";
  }
  if (!out.ok) ++failures;
  std::cout << (out.ok ? "PASS" : "FAIL") << " [" << id << "] " << name << " (" << std::fixed
            << std::setprecision(2) << secs << " s) " << out.detail << std::endl;
}

SearchPlan plan_for(int k, std::int64_t radius) {
  return k % 4 == 0 ? generate_even_work(k / 4, radius) : generalize_to_any_k(k, radius);
}

std::int64_t count_misses(const SearchPlan& plan, std::int64_t radius) {
  std::unordered_set<Point, PointHash> seen;
  for (const auto& t : plan.trajectories) {
    for (const auto& p : t.positions()) seen.insert(p);
  }
  std::int64_t missing = 0;
  for (std::int64_t x = -radius; x <= radius; ++x) {
    for (std::int64_t y = -radius; y <= radius; ++y) {
      if (std::llabs(x) + std::llabs(y) <= radius && !seen.count({x, y})) ++missing;
    }
  }
  return missing;
}

const std::vector<int> kCoverageTeams{4, 7, 8, 12, 16};

}  // namespace

int main() {
  criterion(1, "lattice sphere and ball counts, n <= 200", 1.0, [] {
    for (std::int64_t n = 0; n <= 200; ++n) {
      std::int64_t sphere = 0, ball = 0;
      for (std::int64_t x = -n; x <= n; ++x) {
        for (std::int64_t y = -n; y <= n; ++y) {
          const auto d = std::llabs(x) + std::llabs(y);
          sphere += d == n;
          ball += d <= n;
        }
      }
      const auto expect_sphere = n == 0 ? 1 : 4 * n;
      if (sphere != expect_sphere || static_cast<std::int64_t>(sphere_points(n).size()) != expect_sphere ||
          ball != 2 * n * n + 2 * n + 1 || closed_ball_count(n) != ball) {
        return Outcome{false, "mismatch at n=" + std::to_string(n)};
      }
    }
    return Outcome{true, "201 radii"};
  });

  criterion(2, "coverage of the closed 60-ball for k in {4,7,8,12,16}", 10.0, [] {
    std::ostringstream os;
    for (int k : kCoverageTeams) {
      const auto misses = count_misses(plan_for(k, 60), 60);
      if (misses != 0) return Outcome{false, "k=" + std::to_string(k) + " misses " + std::to_string(misses)};
      os << "k=" << k << ":0 ";
    }
    return Outcome{true, os.str()};
  });

  criterion(3, "upper envelope, k=4, N=40, 20 <= n <= 38", 5.0, [] {
    const auto report = audit_plan(generate_even_work(1, 40), 40);
    double margin = -1e9;
    for (std::int64_t n = 20; n <= 38; ++n) {
      const auto& b = report.at(n);
      const double slack = to_double(b.upper) + 1.0 / static_cast<double>(n) - to_double(b.ratio);
      margin = margin < -1e8 ? slack : std::min(margin, slack);
      if (slack < 0) return Outcome{false, "n=" + std::to_string(n) + " ratio " + std::to_string(to_double(b.ratio))};
    }
    return Outcome{true, "min slack " + std::to_string(margin)};
  });

  criterion(4, "lower envelope soundness for the coverage plans", 10.0, [] {
    double margin = 1e9;
    for (int k : kCoverageTeams) {
      const auto report = audit_plan(plan_for(k, 60), 60);
      for (std::int64_t n = 5; n <= 58; ++n) {
        const auto& b = report.at(n);
        const double slack = to_double(b.ratio) - (to_double(b.lower) - 0.5);
        margin = std::min(margin, slack);
        if (slack < 0) return Outcome{false, "k=" + std::to_string(k) + " n=" + std::to_string(n)};
      }
    }
    return Outcome{true, "min slack " + std::to_string(margin)};
  });

  criterion(5, "variable speeds (1,2) and (1,3), N=30, skew <= 2", 5.0, [] {
    std::ostringstream os;
    for (const auto& speeds : {std::vector<Speed>{1, 2}, std::vector<Speed>{1, 3}}) {
      const auto plan = plan_with_speeds(speeds, 30);
      if (count_misses(plan, 30) != 0) return Outcome{false, "coverage lost"};
      Time worst(0);
      for (const auto& s : completion_skew(plan.trajectories, 30)) worst = std::max(worst, s);
      os << "(" << speeds[0].numerator() << "," << speeds[1].numerator() << "): " << format_time(worst) << " ";
      if (worst > Time(2)) return Outcome{false, os.str()};
    }
    return Outcome{true, "worst skew " + os.str()};
  });

  criterion(6, "late arrival 4 -> 5 at t=50, N=100", 10.0, [] {
    const auto base = generalize_to_any_k(4, 100);
    const auto joined = transition_on_join(base, Time(50), 1);
    const auto misses = count_misses(joined, 100);
    const auto& j = joined.join_schedule.at(0);
    std::ostringstream os;
    os << "misses " << misses << ", n*=" << j.frontier_radius << ", transit " << j.max_transit;
    return Outcome{misses == 0 && j.max_transit <= 2 * j.frontier_radius, os.str()};
  });

  criterion(7, "greedy teleport equals brute force on 20 instances", 5.0, [] {
    int n = 0;
    for (const auto& c : oracle::teleport_cases()) {
      const auto greedy = teleport_expected_time(c.priors, c.pod, greedy_teleport_order(c.priors, c.pod, 6));
      if (greedy != oracle::best_teleport_time(c.priors, c.pod, 6)) {
        return Outcome{false, "instance " + std::to_string(n)};
      }
      ++n;
    }
    return Outcome{n == 20, std::to_string(n) + " instances"};
  });

  criterion(8, "min-cost flow vs exhaustive search, 200 instances", 10.0, [] {
    std::mt19937_64 rng(20240917);
    for (int i = 0; i < 200; ++i) {
      const auto p = oracle::random_problem(rng);
      const auto r = solve_min_cost(p);
      if (r.total_cost != oracle::TransportOracle(p).minimum()) return Outcome{false, "cost at " + std::to_string(i)};
      std::string why;
      if (!verify_certificate(to_network(p), r.edge_flow, r.potentials, &why)) {
        return Outcome{false, "certificate at " + std::to_string(i) + ": " + why};
      }
    }
    return Outcome{true, "200 instances"};
  });

  criterion(9, "scheduler invariants, 40x40, k=12, 1000 steps", 30.0, [] {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(1600);
    for (auto& v : w) v = u(rng) * u(rng);
    const std::int64_t k = 12;
    PodScheduler s(make_pod_grid(40, 40, w, 0.05), {k, 0, 1e-6, 1000});
    s.allocate_initial();
    double last = s.grid().total_residual();
    int steps = 0;
    while (!s.terminated()) {
      const auto rec = s.step();
      ++steps;
      std::int64_t total = 0;
      for (const auto& sc : s.supercells()) total += sc.robots;
      if (total != k) return Outcome{false, "robot count at t=" + std::to_string(rec.t)};
      if (s.stability_gap() > 1e-12) return Outcome{false, "unstable at t=" + std::to_string(rec.t)};
      if (rec.residual_total > last + 1e-15) return Outcome{false, "mass grew at t=" + std::to_string(rec.t)};
      last = rec.residual_total;
    }
    return Outcome{steps == 1000, std::to_string(steps) + " steps"};
  });

  criterion(10, "detection calibration, p=0.5, 1e5 trials", 10.0, [] {
    SimulationParams p;
    p.scheduler.robots = 1;
    p.trials = 100000;
    p.seed = 11;
    const auto r = run_trials(make_pod_grid(1, 1, {1.0}, 0.5), p);
    const double m = r.mean_passes_to_detection;
    return Outcome{std::abs(m - 2.0) <= 0.04, "mean passes " + std::to_string(m)};
  });

  criterion(11, "simulate is byte-identical across runs and thread counts", 30.0, [] {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "latsearch_acceptance";
    fs::create_directories(dir);
    std::ofstream(dir / "map.txt") << "6 6\n"
                                      "1 1 1 1 1 1\n1 2 2 2 2 1\n1 2 5 5 2 1\n"
                                      "1 2 5 5 2 1\n1 2 2 2 2 1\n1 1 1 1 1 1\n";
    auto run = [&](int threads, const std::string& out) {
      const std::string cmd = std::string(LATSEARCH_CLI) + " simulate --pod " + (dir / "map.txt").string() +
                              " --robots 4 --pod-per-pass 0.6 --trials 2000 --seed 123456789 --threads " +
                              std::to_string(threads) + " --out " + (dir / out).string() + " > /dev/null";
      const int status = std::system(cmd.c_str());
      return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    if (!run(1, "a.json") || !run(1, "b.json") || !run(6, "c.json")) return Outcome{false, "simulate failed"};
    auto slurp = [&](const std::string& name) {
      std::ifstream in(dir / name);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const auto a = slurp("a.json");
    const bool same = !a.empty() && a == slurp("b.json") && a == slurp("c.json");
    fs::remove_all(dir);
    return Outcome{same, std::to_string(a.size()) + " bytes"};
  });

  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
