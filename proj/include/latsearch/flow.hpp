#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latsearch/lattice.hpp"

namespace latsearch {

/// Net robot change of one supercell during one scheduler step.
struct LedgerEntry {
  int supercell = 0;
  std::int64_t old_robots = 0;
  std::int64_t new_robots = 0;

  std::int64_t delta() const { return new_robots - old_robots; }
  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

using LossGainLedger = std::vector<LedgerEntry>;

/// Bipartite transportation instance: supercells that lose robots on the left,
/// supercells that gain robots on the right, L1 transit distance between them.
struct FlowProblem {
  std::vector<LedgerEntry> losing;
  std::vector<LedgerEntry> gaining;
  /// distance[i][j]: transit cost from losing[i] to gaining[j].
  std::vector<std::vector<std::int64_t>> distance;
  /// Capacity used for the uncapacitated cross edges.
  std::int64_t cross_capacity = 0;

  std::int64_t supply() const;
  std::int64_t demand() const;
  bool balanced() const { return supply() == demand(); }
  bool empty() const { return losing.empty() && gaining.empty(); }
};

/// Builds the reassignment instance from a balanced ledger. `centers[s]` is the
/// center of supercell s. Entries with zero delta are dropped. Throws
/// std::logic_error when gains and losses differ.
FlowProblem build_flow(const LossGainLedger& ledger, std::span<const Point> centers,
                       std::int64_t total_robots);

/// Assignment instance: every row supplies one unit, every column absorbs one.
FlowProblem assignment_problem(const std::vector<std::vector<std::int64_t>>& cost);

struct NetworkEdge {
  int from = 0;
  int to = 0;
  std::int64_t capacity = 0;
  std::int64_t cost = 0;
};

/// Source/sink network: node 0 is the source, losing nodes follow, then gaining
/// nodes, and the sink is last. Every supercell node gets a source arc of
/// capacity old_robots and a sink arc of capacity new_robots at cost zero; cross
/// arcs losing -> gaining carry the transit distance.
struct FlowNetwork {
  int node_count = 0;
  int source = 0;
  int sink = 0;
  std::vector<NetworkEdge> edges;
  std::size_t first_cross_edge = 0;
  std::size_t cross_edge_count = 0;
};

FlowNetwork to_network(const FlowProblem& problem);

struct Move {
  int from_supercell = 0;
  int to_supercell = 0;
  std::int64_t robots = 0;

  friend bool operator==(const Move&, const Move&) = default;
};

struct Reassignment {
  std::vector<Move> moves;
  std::int64_t total_cost = 0;
  /// Flow on each edge of to_network(problem), same order.
  std::vector<std::int64_t> edge_flow;
  /// Node potentials certifying optimality (reduced costs of residual arcs >= 0).
  std::vector<std::int64_t> potentials;
};

/// Integral minimum-cost flow by successive shortest augmenting paths with node
/// potentials. Ties between equal-cost paths resolve toward lower node indices.
Reassignment solve_min_cost(const FlowProblem& problem);

/// Checks capacity bounds, flow conservation, saturation of every sink arc and
/// non-negative reduced cost on every residual arc. Uses nothing from the solver.
bool verify_certificate(const FlowNetwork& network, std::span<const std::int64_t> edge_flow,
                        std::span<const std::int64_t> potentials, std::string* why = nullptr);

}  // namespace latsearch
