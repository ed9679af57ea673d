#include "latsearch/flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace latsearch {

std::int64_t FlowProblem::supply() const {
  std::int64_t s = 0;
  for (const auto& e : losing) s += e.old_robots - e.new_robots;
  return s;
}

std::int64_t FlowProblem::demand() const {
  std::int64_t d = 0;
  for (const auto& e : gaining) d += e.new_robots - e.old_robots;
  return d;
}

FlowProblem build_flow(const LossGainLedger& ledger, std::span<const Point> centers,
                       std::int64_t total_robots) {
  FlowProblem problem;
  problem.cross_capacity = total_robots;
  std::vector<Point> lose_at;
  std::vector<Point> gain_at;
  for (const auto& e : ledger) {
    if (e.supercell < 0 || static_cast<std::size_t>(e.supercell) >= centers.size()) {
      throw std::out_of_range("build_flow: ledger names an unknown supercell");
    }
    if (e.delta() < 0) {
      problem.losing.push_back(e);
      lose_at.push_back(centers[static_cast<std::size_t>(e.supercell)]);
    } else if (e.delta() > 0) {
      problem.gaining.push_back(e);
      gain_at.push_back(centers[static_cast<std::size_t>(e.supercell)]);
    }
  }
  if (!problem.balanced()) {
    std::ostringstream msg;
    msg << "build_flow: unbalanced ledger (losses " << problem.supply() << ", gains "
        << problem.demand() << ")";
    throw std::logic_error(msg.str());
  }
  problem.distance.assign(lose_at.size(), std::vector<std::int64_t>(gain_at.size(), 0));
  for (std::size_t i = 0; i < lose_at.size(); ++i) {
    for (std::size_t j = 0; j < gain_at.size(); ++j) {
      problem.distance[i][j] = l1_distance(lose_at[i], gain_at[j]);
    }
  }
  return problem;
}

FlowProblem assignment_problem(const std::vector<std::vector<std::int64_t>>& cost) {
  FlowProblem problem;
  const auto rows = cost.size();
  const auto cols = rows == 0 ? 0 : cost.front().size();
  if (cols < rows) throw std::invalid_argument("assignment_problem: fewer columns than rows");
  for (std::size_t i = 0; i < rows; ++i) {
    if (cost[i].size() != cols) throw std::invalid_argument("assignment_problem: ragged cost matrix");
    problem.losing.push_back({static_cast<int>(i), 1, 0});
  }
  // Surplus columns are padded so the instance stays balanced: only `rows` of them get a unit.
  for (std::size_t j = 0; j < cols; ++j) problem.gaining.push_back({static_cast<int>(j), 0, 1});
  problem.distance = cost;
  problem.cross_capacity = 1;
  if (cols > rows) {
    // Extra supply node at zero cost absorbs the unused columns.
    problem.losing.push_back({-1, static_cast<std::int64_t>(cols - rows), 0});
    problem.distance.emplace_back(cols, 0);
  }
  return problem;
}

FlowNetwork to_network(const FlowProblem& problem) {
  FlowNetwork net;
  const int nl = static_cast<int>(problem.losing.size());
  const int ng = static_cast<int>(problem.gaining.size());
  net.node_count = nl + ng + 2;
  net.source = 0;
  net.sink = nl + ng + 1;
  auto node_of_losing = [](int i) { return 1 + i; };
  auto node_of_gaining = [nl](int j) { return 1 + nl + j; };
  for (int i = 0; i < nl; ++i) {
    net.edges.push_back({net.source, node_of_losing(i), problem.losing[i].old_robots, 0});
    net.edges.push_back({node_of_losing(i), net.sink, problem.losing[i].new_robots, 0});
  }
  for (int j = 0; j < ng; ++j) {
    net.edges.push_back({net.source, node_of_gaining(j), problem.gaining[j].old_robots, 0});
    net.edges.push_back({node_of_gaining(j), net.sink, problem.gaining[j].new_robots, 0});
  }
  std::int64_t cap = problem.cross_capacity;
  if (cap <= 0) cap = std::max<std::int64_t>(problem.supply(), 0);
  net.first_cross_edge = net.edges.size();
  for (int i = 0; i < nl; ++i) {
    for (int j = 0; j < ng; ++j) {
      net.edges.push_back({node_of_losing(i), node_of_gaining(j), cap,
                           problem.distance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]});
    }
  }
  net.cross_edge_count = net.edges.size() - net.first_cross_edge;
  return net;
}

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Arc {
  int to;
  int rev;
  std::int64_t residual;
  std::int64_t cost;
  int edge;  // index into network edges, -1 for reverse arcs
};

class Residual {
 public:
  explicit Residual(const FlowNetwork& net) : adj_(static_cast<std::size_t>(net.node_count)) {
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      const auto& ed = net.edges[e];
      auto& fwd = adj_[static_cast<std::size_t>(ed.from)];
      auto& bwd = adj_[static_cast<std::size_t>(ed.to)];
      fwd.push_back({ed.to, static_cast<int>(bwd.size()), ed.capacity, ed.cost, static_cast<int>(e)});
      bwd.push_back({ed.from, static_cast<int>(fwd.size()) - 1, 0, -ed.cost, -1});
    }
  }

  std::vector<std::vector<Arc>>& adj() { return adj_; }

 private:
  std::vector<std::vector<Arc>> adj_;
};

}  // namespace

Reassignment solve_min_cost(const FlowProblem& problem) {
  if (!problem.balanced()) throw std::logic_error("solve_min_cost: unbalanced problem");
  const FlowNetwork net = to_network(problem);
  Residual res(net);
  auto& adj = res.adj();
  const auto n = static_cast<std::size_t>(net.node_count);

  // Label-correcting pass for the initial potentials.
  std::vector<std::int64_t> pot(n, kInf);
  pot[static_cast<std::size_t>(net.source)] = 0;
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (pot[u] == kInf) continue;
      for (const auto& a : adj[u]) {
        if (a.residual > 0 && pot[u] + a.cost < pot[static_cast<std::size_t>(a.to)]) {
          pot[static_cast<std::size_t>(a.to)] = pot[u] + a.cost;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  for (auto& p : pot) {
    if (p == kInf) p = 0;
  }

  std::int64_t required = 0;
  for (const auto& e : net.edges) {
    if (e.to == net.sink) required += e.capacity;
  }

  std::int64_t pushed = 0;
  std::vector<std::int64_t> dist(n);
  std::vector<int> parent_node(n);
  std::vector<int> parent_arc(n);
  while (pushed < required) {
    // Label-setting pass on reduced costs; the queue orders ties by node index.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent_node.begin(), parent_node.end(), -1);
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<std::size_t>(net.source)] = 0;
    pq.push({0, net.source});
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      const auto uu = static_cast<std::size_t>(u);
      if (d != dist[uu]) continue;
      for (std::size_t ai = 0; ai < adj[uu].size(); ++ai) {
        const auto& a = adj[uu][ai];
        if (a.residual <= 0) continue;
        const auto vv = static_cast<std::size_t>(a.to);
        const auto nd = d + a.cost + pot[uu] - pot[vv];
        if (nd < dist[vv]) {
          dist[vv] = nd;
          parent_node[vv] = u;
          parent_arc[vv] = static_cast<int>(ai);
          pq.push({nd, a.to});
        }
      }
    }
    const auto t = static_cast<std::size_t>(net.sink);
    if (dist[t] == kInf) throw std::logic_error("solve_min_cost: demand cannot be routed");
    for (std::size_t v = 0; v < n; ++v) pot[v] += std::min(dist[v], dist[t]);

    std::int64_t bottleneck = required - pushed;
    for (int v = net.sink; v != net.source; v = parent_node[static_cast<std::size_t>(v)]) {
      const auto& a = adj[static_cast<std::size_t>(parent_node[static_cast<std::size_t>(v)])]
                         [static_cast<std::size_t>(parent_arc[static_cast<std::size_t>(v)])];
      bottleneck = std::min(bottleneck, a.residual);
    }
    for (int v = net.sink; v != net.source; v = parent_node[static_cast<std::size_t>(v)]) {
      auto& a = adj[static_cast<std::size_t>(parent_node[static_cast<std::size_t>(v)])]
                   [static_cast<std::size_t>(parent_arc[static_cast<std::size_t>(v)])];
      a.residual -= bottleneck;
      adj[static_cast<std::size_t>(a.to)][static_cast<std::size_t>(a.rev)].residual += bottleneck;
    }
    pushed += bottleneck;
  }

  Reassignment out;
  out.edge_flow.assign(net.edges.size(), 0);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& a : adj[u]) {
      if (a.edge >= 0) {
        out.edge_flow[static_cast<std::size_t>(a.edge)] =
            net.edges[static_cast<std::size_t>(a.edge)].capacity - a.residual;
      }
    }
  }
  out.potentials = pot;
  const int nl = static_cast<int>(problem.losing.size());
  for (std::size_t e = net.first_cross_edge; e < net.edges.size(); ++e) {
    const auto f = out.edge_flow[e];
    if (f == 0) continue;
    const auto& ed = net.edges[e];
    const auto& from = problem.losing[static_cast<std::size_t>(ed.from - 1)];
    const auto& to = problem.gaining[static_cast<std::size_t>(ed.to - 1 - nl)];
    out.total_cost += f * ed.cost;
    if (from.supercell < 0) continue;  // padding row of an assignment instance
    out.moves.push_back({from.supercell, to.supercell, f});
  }
  std::sort(out.moves.begin(), out.moves.end(), [](const Move& a, const Move& b) {
    return std::pair(a.from_supercell, a.to_supercell) < std::pair(b.from_supercell, b.to_supercell);
  });
  return out;
}

bool verify_certificate(const FlowNetwork& network, std::span<const std::int64_t> edge_flow,
                        std::span<const std::int64_t> potentials, std::string* why) {
  auto fail = [why](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (edge_flow.size() != network.edges.size()) return fail("flow vector size mismatch");
  if (potentials.size() != static_cast<std::size_t>(network.node_count)) {
    return fail("potential vector size mismatch");
  }
  std::vector<std::int64_t> balance(static_cast<std::size_t>(network.node_count), 0);
  for (std::size_t e = 0; e < network.edges.size(); ++e) {
    const auto& ed = network.edges[e];
    const auto f = edge_flow[e];
    if (f < 0 || f > ed.capacity) return fail("edge " + std::to_string(e) + " violates capacity");
    balance[static_cast<std::size_t>(ed.from)] -= f;
    balance[static_cast<std::size_t>(ed.to)] += f;
    if (ed.to == network.sink && f != ed.capacity) {
      return fail("sink arc " + std::to_string(e) + " not saturated");
    }
  }
  for (int v = 0; v < network.node_count; ++v) {
    if (v == network.source || v == network.sink) continue;
    if (balance[static_cast<std::size_t>(v)] != 0) {
      return fail("conservation fails at node " + std::to_string(v));
    }
  }
  for (std::size_t e = 0; e < network.edges.size(); ++e) {
    const auto& ed = network.edges[e];
    const auto reduced = ed.cost + potentials[static_cast<std::size_t>(ed.from)] -
                         potentials[static_cast<std::size_t>(ed.to)];
    if (edge_flow[e] < ed.capacity && reduced < 0) {
      return fail("forward residual arc " + std::to_string(e) + " has negative reduced cost");
    }
    if (edge_flow[e] > 0 && reduced > 0) {
      return fail("backward residual arc " + std::to_string(e) + " has negative reduced cost");
    }
  }
  return true;
}

}  // namespace latsearch
