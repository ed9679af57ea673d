#include "latsearch/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "latsearch/analysis.hpp"
#include "latsearch/flow.hpp"
#include "latsearch/montecarlo.hpp"
#include "latsearch/pod.hpp"

namespace latsearch {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Input files that cannot be read are runtime failures, not validation ones.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

fs::path metadata_path(const std::string& csv) { return fs::path(csv).replace_extension(".json"); }

std::int64_t to_int(const std::string& s, const char* what) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  return v;
}

struct PlanArgs {
  int robots = 0;
  std::int64_t radius = 0;
  std::string speeds;
  std::vector<std::string> joins;
  std::string out;
};

int do_plan(const PlanArgs& a) {
  if (a.radius < 1) throw std::invalid_argument("--radius must be >= 1");
  SearchPlan plan;
  if (!a.speeds.empty()) {
    const auto speeds = parse_speeds(a.speeds);
    if (a.robots != 0 && static_cast<std::size_t>(a.robots) != speeds.size()) {
      throw std::invalid_argument("--speeds lists " + std::to_string(speeds.size()) + " robots but --robots is " +
                                  std::to_string(a.robots));
    }
    plan = plan_with_speeds(speeds, a.radius);
  } else {
    if (a.robots < 1) throw std::invalid_argument("--robots must be >= 1");
    plan = a.robots % 4 == 0 ? generate_even_work(a.robots / 4, a.radius)
                             : generalize_to_any_k(a.robots, a.radius);
  }
  std::vector<std::pair<Time, int>> joins;
  for (const auto& j : a.joins) {
    const auto colon = j.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--join expects T:M, got '" + j + "'");
    const auto added = to_int(j.substr(colon + 1), "--join robot count");
    if (added < 0) throw std::invalid_argument("--join robot count must be non-negative");
    joins.emplace_back(parse_rational(j.substr(0, colon)), static_cast<int>(added));
  }
  std::sort(joins.begin(), joins.end());
  for (const auto& [when, added] : joins) plan = transition_on_join(plan, when, added);

  auto csv = open_out(a.out);
  write_trajectories_csv(csv, plan.trajectories);
  auto meta = open_out(metadata_path(a.out).string());
  write_plan_metadata(meta, plan);
  std::cout << "robots " << plan.robot_count << ", radius " << plan.max_radius << ", cover time "
            << format_time(plan.horizon()) << '\n';
  return kExitOk;
}

struct RobotMeta {
  std::int64_t speed = 1;
  Time start{0};
};

std::vector<Trajectory> rebuild(const std::vector<CsvTrajectory>& rows, const std::map<int, RobotMeta>& meta) {
  std::vector<Trajectory> out;
  for (const auto& r : rows) {
    RobotMeta m;
    if (auto it = meta.find(r.robot_id); it != meta.end()) {
      m = it->second;
    } else {
      if (r.times.size() > 1) m.speed = std::llround(1.0 / (r.times[1] - r.times[0]));
      if (m.speed < 1) m.speed = 1;
      m.start = Time(std::llround(r.times.front() * static_cast<double>(m.speed) * 1000.0), m.speed * 1000);
    }
    if (m.speed == 0 && r.path.size() > 1) throw InputError("idle robot moves in plan csv");
    out.push_back(Trajectory::from_path(r.robot_id, r.path, m.speed, m.start));
  }
  return out;
}

int do_verify(const std::string& plan_path, const std::string& report_path, std::int64_t radius) {
  auto in = open_in(plan_path);
  const auto rows = read_trajectories_csv(in);
  if (rows.empty()) throw InputError("plan csv has no rows");

  std::map<int, RobotMeta> meta;
  std::int64_t meta_radius = 0;
  const auto mp = metadata_path(plan_path);
  if (fs::exists(mp)) {
    auto min = open_in(mp.string());
    json j;
    try {
      j = json::parse(min);
      meta_radius = j.value("radius", std::int64_t{0});
      for (const auto& r : j.at("trajectories")) {
        meta[r.at("robot_id").get<int>()] = {r.at("speed").get<std::int64_t>(),
                                             parse_rational(r.at("start_time").get<std::string>())};
      }
    } catch (const json::exception& e) {
      throw InputError(std::string("bad plan metadata: ") + e.what());
    }
  }
  const auto trajectories = rebuild(rows, meta);

  if (radius == 0) radius = meta_radius;
  if (radius == 0) {
    std::unordered_set<Point, PointHash> seen;
    for (const auto& r : rows) seen.insert(r.path.begin(), r.path.end());
    while (true) {
      const auto pts = sphere_points(radius + 1);
      if (!std::all_of(pts.begin(), pts.end(), [&](const Point& p) { return seen.count(p) != 0; })) break;
      ++radius;
    }
  }
  if (radius < 2) throw std::invalid_argument("plan covers too small a ball to audit");

  const auto report = audit_plan(trajectories, radius);
  auto out = open_out(report_path);
  write_report_json(out, report);
  std::int64_t above = 0;
  for (const auto& b : report.per_ball) {
    if (to_double(b.ratio) > to_double(b.upper) + 1.0 / static_cast<double>(b.n)) ++above;
  }
  std::cout << "audited n = 1.." << radius - 1 << ", " << above << " balls above the upper envelope\n";
  return kExitOk;
}

struct SearchArgs {
  std::string pod;
  std::int64_t robots = 1;
  std::int64_t supercell = 0;
  double pod_per_pass = 1.0;
  double threshold = 1e-4;
  std::int64_t horizon = 1'000'000;
  std::string out;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

PodGrid read_grid(const SearchArgs& a) {
  if (!(a.pod_per_pass > 0.0 && a.pod_per_pass <= 1.0)) throw std::invalid_argument("--pod-per-pass must lie in (0, 1]");
  auto in = open_in(a.pod);
  return load_pod_grid(in, a.pod_per_pass);
}

SchedulerConfig scheduler_config(const SearchArgs& a) {
  if (a.robots < 1) throw std::invalid_argument("--robots must be >= 1");
  return {a.robots, a.supercell, a.threshold, a.horizon};
}

int do_search(const SearchArgs& a) {
  const auto cfg = scheduler_config(a);
  PodScheduler s(read_grid(a), cfg);
  s.allocate_initial();
  auto out = open_out(a.out);
  const auto centers = s.centers();
  while (!s.terminated()) out << event_json(s.step(), centers) << '\n';
  std::cout << "stopped at t = " << s.time() << ", residual " << s.grid().total_residual() << '\n';
  return kExitOk;
}

LedgerEntry parse_entry(const json& e, std::map<int, Point>& centers) {
  LedgerEntry out;
  out.supercell = e.at("supercell").get<int>();
  if (out.supercell < 0) throw std::invalid_argument("ledger supercell index must be non-negative");
  if (e.contains("delta")) {
    const auto d = e.at("delta").get<std::int64_t>();
    out.old_robots = std::max<std::int64_t>(0, -d);
    out.new_robots = std::max<std::int64_t>(0, d);
  } else {
    out.old_robots = e.at("old").get<std::int64_t>();
    out.new_robots = e.at("new").get<std::int64_t>();
  }
  if (out.old_robots < 0 || out.new_robots < 0) throw std::invalid_argument("ledger robot counts must be non-negative");
  const Point c{e.at("x").get<std::int64_t>(), e.at("y").get<std::int64_t>()};
  auto [it, fresh] = centers.emplace(out.supercell, c);
  if (!fresh && it->second != c) throw std::invalid_argument("ledger gives two centers for one supercell");
  return out;
}

json solve_ledger(std::int64_t t, const LossGainLedger& ledger, const std::map<int, Point>& centers) {
  std::vector<Point> dense;
  for (const auto& [id, c] : centers) {
    if (dense.size() <= static_cast<std::size_t>(id)) dense.resize(static_cast<std::size_t>(id) + 1);
    dense[static_cast<std::size_t>(id)] = c;
  }
  std::int64_t total = 0;
  for (const auto& e : ledger) total += e.old_robots;
  const auto plan = solve_min_cost(build_flow(ledger, dense, total));
  json moves = json::array();
  for (const auto& m : plan.moves) {
    moves.push_back({{"from", m.from_supercell}, {"to", m.to_supercell}, {"robots", m.robots}});
  }
  return {{"t", t}, {"moves", moves}, {"total_cost", plan.total_cost}};
}

int do_flow(const std::string& ledger_path, const std::string& out_path) {
  auto in = open_in(ledger_path);
  auto out = open_out(out_path);
  LossGainLedger loose;
  std::map<int, Point> loose_centers;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw InputError("ledger line " + std::to_string(lineno) + " is not JSON");
    }
    try {
      if (j.contains("ledger")) {
        std::map<int, Point> centers;
        LossGainLedger ledger;
        for (const auto& e : j.at("ledger")) ledger.push_back(parse_entry(e, centers));
        out << solve_ledger(j.value("t", std::int64_t{0}), ledger, centers).dump() << '\n';
      } else {
        loose.push_back(parse_entry(j, loose_centers));
      }
    } catch (const json::exception& e) {
      throw std::invalid_argument("ledger line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!loose.empty()) out << solve_ledger(0, loose, loose_centers).dump() << '\n';
  return kExitOk;
}

int do_simulate(const SearchArgs& a) {
  SimulationParams p;
  p.scheduler = scheduler_config(a);
  if (a.trials < 1) throw std::invalid_argument("--trials must be >= 1");
  if (a.threads < 1) throw std::invalid_argument("--threads must be >= 1");
  p.trials = a.trials;
  p.seed = a.seed;
  p.threads = a.threads;
  const auto report = run_trials(read_grid(a), p);
  auto out = open_out(a.out);
  write_simulation_json(out, report);
  std::cout << "found " << report.found << "/" << report.trials << ", mean time to discovery "
            << report.mean_time_to_discovery << '\n';
  return kExitOk;
}

void add_pod_flags(CLI::App* cmd, SearchArgs& a) {
  cmd->add_option("--pod", a.pod, "POD grid file")->required();
  cmd->add_option("--robots", a.robots, "number of robots")->capture_default_str();
  cmd->add_option("--supercell", a.supercell, "supercell side in cells (0 = automatic)")->capture_default_str();
  cmd->add_option("--pod-per-pass", a.pod_per_pass, "detection probability of one pass")->capture_default_str();
  cmd->add_option("--threshold", a.threshold, "abandon threshold as a fraction of the prior mass")
      ->capture_default_str();
  cmd->add_option("--horizon", a.horizon, "maximum number of time steps")->capture_default_str();
  cmd->add_option("--out", a.out, "output file")->required();
}

}  // namespace

Speed parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const auto den = to_int(text.substr(slash + 1), "denominator");
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Speed(to_int(text.substr(0, slash), "numerator"), den);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Speed(to_int(text, "number"));
  const auto whole = text.substr(0, dot);
  const auto frac = text.substr(dot + 1);
  if (frac.empty() || frac.size() > 9 || frac.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("bad decimal '" + text + "'");
  }
  std::int64_t scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  const bool negative = !whole.empty() && whole[0] == '-';
  const auto w = (whole.empty() || whole == "-") ? 0 : std::llabs(to_int(whole, "number"));
  const auto num = w * scale + to_int(frac, "fraction");
  return Speed(negative ? -num : num, scale);
}

std::vector<Speed> parse_speeds(const std::string& text) {
  std::vector<Speed> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
  if (out.empty()) throw std::invalid_argument("--speeds is empty");
  return out;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Multi-robot lattice search planner and probabilistic search scheduler"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "generate search trajectories");
  plan_cmd->add_option("--robots", plan.robots, "number of robots (implied by --speeds)")->capture_default_str();
  plan_cmd->add_option("--radius", plan.radius, "radius of the ball to cover")->required();
  plan_cmd->add_option("--speeds", plan.speeds, "comma-separated robot speeds (integers, a/b or decimals)");
  plan_cmd->add_option("--join", plan.joins, "T:M adds M robots at time T (repeatable)");
  plan_cmd->add_option("--out", plan.out, "trajectory CSV; metadata goes next to it as .json")->required();

  std::string verify_plan, verify_report;
  std::int64_t verify_radius = 0;
  auto* verify_cmd = app.add_subcommand("verify", "audit a plan against the competitive-ratio bounds");
  verify_cmd->add_option("--plan", verify_plan, "trajectory CSV")->required();
  verify_cmd->add_option("--report", verify_report, "report JSON")->required();
  verify_cmd->add_option("--radius", verify_radius, "audited radius (0 = from metadata or coverage)")
      ->capture_default_str();

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "run the POD scheduler and write its event log");
  add_pod_flags(search_cmd, search);

  std::string ledger, flow_out;
  auto* flow_cmd = app.add_subcommand("flow", "route robots for loss/gain ledgers at minimum transit cost");
  flow_cmd->add_option("--ledger", ledger, "ledger JSON lines")->required();
  flow_cmd->add_option("--out", flow_out, "moves JSON lines")->required();

  SearchArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo time-to-discovery study");
  add_pod_flags(sim_cmd, sim);
  sim_cmd->add_option("--trials", sim.trials, "number of trials")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "root random seed")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "worker threads (does not change results)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*plan_cmd) return do_plan(plan);
    if (*verify_cmd) return do_verify(verify_plan, verify_report, verify_radius);
    if (*search_cmd) return do_search(search);
    if (*flow_cmd) return do_flow(ledger, flow_out);
    if (*sim_cmd) return do_simulate(sim);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::logic_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"latsearch"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace latsearch
