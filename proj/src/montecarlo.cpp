#include "latsearch/montecarlo.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace latsearch {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::mt19937_64 trial_stream(std::uint64_t seed, std::int64_t trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
  return std::mt19937_64(seq);
}

TrialOutcome run_one(const PassTimeline& timeline, const std::vector<double>& cumulative, double pod,
                     std::uint64_t seed, std::int64_t trial) {
  auto rng = trial_stream(seed, trial);
  TrialOutcome out;
  out.trial = trial;
  const double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  out.target_cell = static_cast<int>(it - cumulative.begin());
  for (auto when : timeline.pass_times[static_cast<std::size_t>(out.target_cell)]) {
    ++out.passes;
    if (uniform01(rng) < pod) {
      out.time = when;
      break;
    }
  }
  return out;
}

}  // namespace

PassTimeline record_passes(const PodGrid& grid, const SchedulerConfig& config) {
  PodScheduler scheduler(grid, config);
  scheduler.allocate_initial();
  PassTimeline out;
  out.robots = config.robots;
  out.pass_times.resize(grid.cell_prob.size());
  while (!scheduler.terminated()) {
    const auto rec = scheduler.step();
    for (int c : rec.passes) out.pass_times[static_cast<std::size_t>(c)].push_back(rec.t);
  }
  out.end_time = scheduler.time();
  return out;
}

SimulationReport run_trials(const PodGrid& grid, const SimulationParams& params) {
  if (params.trials < 1) throw std::invalid_argument("trials must be positive");
  if (params.threads < 1) throw std::invalid_argument("threads must be positive");
  const auto timeline = record_passes(grid, params.scheduler);

  std::vector<double> cumulative;
  double acc = 0.0;
  for (auto p : grid.cell_prob) cumulative.push_back(acc += p);

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(params.trials));
  auto work = [&](std::int64_t begin, std::int64_t end) {
    for (auto t = begin; t < end; ++t) {
      outcomes[static_cast<std::size_t>(t)] = run_one(timeline, cumulative, grid.pod_per_pass, params.seed, t);
    }
  };
  const auto threads = std::min<std::int64_t>(params.threads, params.trials);
  if (threads <= 1) {
    work(0, params.trials);
  } else {
    std::vector<std::thread> pool;
    const auto chunk = (params.trials + threads - 1) / threads;
    for (std::int64_t b = 0; b < params.trials; b += chunk) {
      pool.emplace_back(work, b, std::min(params.trials, b + chunk));
    }
    for (auto& th : pool) th.join();
  }

  SimulationReport r;
  r.trials = params.trials;
  r.seed = params.seed;
  r.robots = params.scheduler.robots;
  double time_sum = 0.0;
  double pass_sum = 0.0;
  std::vector<std::int64_t> found_times;
  for (const auto& o : outcomes) {
    const auto stop = o.time ? *o.time : timeline.end_time;
    r.total_effort += stop * timeline.robots;
    if (!o.time) continue;
    ++r.found;
    time_sum += static_cast<double>(*o.time);
    pass_sum += static_cast<double>(o.passes);
    found_times.push_back(*o.time);
  }
  r.found_fraction = static_cast<double>(r.found) / static_cast<double>(r.trials);
  if (r.found > 0) {
    r.mean_time_to_discovery = time_sum / static_cast<double>(r.found);
    r.mean_passes_to_detection = pass_sum / static_cast<double>(r.found);
  }
  std::sort(found_times.begin(), found_times.end());
  // Checkpoints 1, 2, 5, 10, 20, 50, ... up to the scheduler's end time.
  std::vector<std::int64_t> marks;
  for (std::int64_t scale = 1; scale <= timeline.end_time; scale *= 10) {
    for (std::int64_t m : {1, 2, 5}) {
      if (m * scale <= timeline.end_time) marks.push_back(m * scale);
    }
    if (scale > timeline.end_time / 10) break;
  }
  if (marks.empty() || marks.back() != timeline.end_time) marks.push_back(timeline.end_time);
  for (auto m : marks) {
    const auto n = std::upper_bound(found_times.begin(), found_times.end(), m) - found_times.begin();
    r.prob_found_by.emplace_back(m, static_cast<double>(n) / static_cast<double>(r.trials));
  }
  r.outcomes = std::move(outcomes);
  return r;
}

void write_simulation_json(std::ostream& os, const SimulationReport& report) {
  using nlohmann::json;
  json j;
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["robots"] = report.robots;
  j["found"] = report.found;
  j["found_fraction"] = report.found_fraction;
  j["mean_time_to_discovery"] = report.mean_time_to_discovery;
  j["mean_passes_to_detection"] = report.mean_passes_to_detection;
  j["total_effort"] = report.total_effort;
  json by = json::array();
  for (const auto& [t, f] : report.prob_found_by) by.push_back({{"t", t}, {"fraction", f}});
  j["prob_found_by"] = by;
  json times = json::array();
  for (const auto& o : report.outcomes) {
    times.push_back({{"trial", o.trial}, {"time", o.time ? json(*o.time) : json(nullptr)}});
  }
  j["discovery_times"] = times;
  os << j.dump() << '\n';
}

}  // namespace latsearch
