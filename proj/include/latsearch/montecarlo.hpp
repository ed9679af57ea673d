#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "latsearch/pod.hpp"

namespace latsearch {

struct SimulationParams {
  SchedulerConfig scheduler;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  /// Worker threads; results never depend on it.
  int threads = 1;
};

/// When each cell was passed over by the scheduler, in time order.
struct PassTimeline {
  std::vector<std::vector<std::int64_t>> pass_times;
  /// Time at which the scheduler stopped.
  std::int64_t end_time = 0;
  std::int64_t robots = 0;
};

/// Runs the scheduler to termination once. The run never sees the target, so
/// every trial can share it.
PassTimeline record_passes(const PodGrid& grid, const SchedulerConfig& config);

struct TrialOutcome {
  std::int64_t trial = 0;
  int target_cell = 0;
  std::optional<std::int64_t> time;
  /// Passes over the target cell until detection (or all of them if missed).
  std::int64_t passes = 0;
};

struct SimulationReport {
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::int64_t robots = 0;
  std::int64_t found = 0;
  double found_fraction = 0.0;
  /// Over found trials only.
  double mean_time_to_discovery = 0.0;
  double mean_passes_to_detection = 0.0;
  /// Robot-time units spent, summed over trials (each trial stops at discovery).
  std::int64_t total_effort = 0;
  std::vector<std::pair<std::int64_t, double>> prob_found_by;
  std::vector<TrialOutcome> outcomes;
};

/// Trial t draws from its own generator seeded by (seed, t), so outcomes do not
/// depend on trial order or thread count.
SimulationReport run_trials(const PodGrid& grid, const SimulationParams& params);

void write_simulation_json(std::ostream& os, const SimulationReport& report);

}  // namespace latsearch
