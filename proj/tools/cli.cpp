#include "cli.hpp"

#include <pthread.h>

#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "blockpath/error.hpp"
#include "blockpath/server.hpp"
#include "blockpath/skygraph.hpp"
#include "blockpath/text.hpp"

namespace fs = std::filesystem;

namespace blockpath::cli {

AlgorithmSpec parse_algo(const std::string& text) {
  std::string rest = text, label;
  if (const auto eq = rest.find('='); eq != std::string::npos) {
    label = rest.substr(eq + 1);
    rest.resize(eq);
    if (label.empty()) throw ArgumentError("empty label in --algo '" + text + "'");
  }
  auto heuristic = HeuristicKind::Octile;
  if (const auto colon = rest.find(':'); colon != std::string::npos) {
    heuristic = parse_heuristic(rest.substr(colon + 1));
    rest.resize(colon);
  }
  return AlgorithmSpec::make(parse_algorithm(rest), heuristic, label);
}

Cell parse_cell(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ArgumentError("cells are written x,z (got '" + text + "')");
  try {
    return Cell{static_cast<int>(text::parse_int(text.substr(0, comma), 0)),
                static_cast<int>(text::parse_int(text.substr(comma + 1), 0))};
  } catch (const ParseError&) {
    throw ArgumentError("cells are written x,z (got '" + text + "')");
  }
}

void print_table(std::ostream& out, const ComparisonReport& report, bool wall_time) {
  std::size_t w = 9;
  for (const auto& r : report.rows) w = std::max(w, r.label.size() + 2);
  out << std::left << std::setw(static_cast<int>(w)) << "algorithm" << std::right << std::setw(9)
      << "visited" << std::setw(12) << "expansions" << std::setw(12) << "cost" << std::setw(8)
      << "steps";
  if (wall_time) out << std::setw(11) << "wall_ms";
  out << "\n";
  for (const auto& r : report.rows) {
    const auto& m = r.metrics;
    char cost[32] = "-";
    if (!std::isinf(m.path_cost)) std::snprintf(cost, sizeof cost, "%.3f", m.path_cost);
    out << std::left << std::setw(static_cast<int>(w)) << r.label << std::right << std::setw(9)
        << m.visited_nodes << std::setw(12) << m.expansions << std::setw(12) << cost
        << std::setw(8) << m.path_steps;
    if (wall_time) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f",
                    std::chrono::duration<double, std::milli>(m.wall_time).count());
      out << std::setw(11) << buf;
    }
    out << "\n";
  }
  for (const auto& q : report.ratios) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", q.ratio);
    out << q.numerator << "/" << q.denominator << " visited ratio " << buf << "\n";
  }
}

namespace {

struct Inputs {
  std::string map;
  std::string weights;
  std::string start;
  std::string goal;
};

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--map", in.map, "Map file")->required();
  cmd->add_option("--weights", in.weights, "Weight table file (defaults if omitted)");
  cmd->add_option("--start", in.start, "Start cell x,z")->required();
  cmd->add_option("--goal", in.goal, "Goal cell x,z")->required();
}

struct Loaded {
  WorldModel world;
  WeightTable table;
  TerrainSnapshot snapshot;
  GridNode start, goal;
};

Loaded load(const Inputs& in) {
  auto world = load_map_file(in.map);
  auto table = in.weights.empty() ? WeightTable::defaults()
                                  : load_weights_file(in.weights, world.registry());
  auto snap = world.scan_surface();
  const auto s = parse_cell(in.start), g = parse_cell(in.goal);
  auto sn = node_at(snap, s.x, s.z);
  auto gn = node_at(snap, g.x, g.z);
  return {std::move(world), std::move(table), std::move(snap), sn, gn};
}

int serve(ServerConfig config, const std::string& listen, std::ostream& out) {
  const auto [host, port] = parse_listen_address(listen);
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  Engine engine(std::move(config));
  TcpServer server(engine, host, port);
  out << "listening on " << host << ":" << server.port() << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  engine.shutdown();
  out << "stopped" << std::endl;
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grid pathfinding engine: runs, oracle checks, puzzles and the session server"};
  app.require_subcommand(1);

  Inputs run_in;
  std::vector<std::string> algos;
  std::string trace_out;
  bool no_wall = false;
  auto* run_cmd = app.add_subcommand("run", "Run algorithms and print the comparison table");
  add_inputs(run_cmd, run_in);
  run_cmd->add_option("--algo", algos, "kind[:heuristic][=label], repeatable")->required();
  run_cmd->add_option("--trace-out", trace_out, "Directory for <label>.trace exports");
  run_cmd->add_flag("--no-wall-time", no_wall, "Leave wall time out of the table");

  Inputs oracle_in;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force shortest cost inside the search disc");
  add_inputs(oracle_cmd, oracle_in);

  std::string puzzle_file, solution_file, generate;
  std::size_t edits = 0;
  auto* verify_cmd = app.add_subcommand("verify-puzzle", "Check a puzzle file or a proposed solution");
  verify_cmd->add_option("puzzle", puzzle_file, "Puzzle file");
  verify_cmd->add_option("--solution", solution_file, "Graph file to check against the goal");
  verify_cmd->add_option("--edits", edits, "Edits used to reach the solution");
  verify_cmd->add_option("--generate", generate, "kind:size:seed; prints the generated puzzle");

  ServerConfig config;
  std::string listen = "127.0.0.1:7420";
  std::string data_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Start the session server");
  serve_cmd->add_option("--content", config.content_dir, "Content directory")->capture_default_str();
  serve_cmd->add_option("--data-dir", data_dir, "Saved maps, gates and telemetry");
  serve_cmd->add_option("--listen", listen, "host:port or :port")->capture_default_str();
  serve_cmd->add_option("--speed", config.default_speed, "Default playback speed, steps/second")
      ->capture_default_str();
  serve_cmd->add_option("--batch", config.batch_size, "Steps per trace_steps message")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*run_cmd) {
      auto in = load(run_in);
      std::vector<AlgorithmSpec> specs;
      for (const auto& a : algos) specs.push_back(parse_algo(a));
      auto result = run_parallel(specs, in.snapshot, in.table, in.start, in.goal);
      print_table(out, result.report, !no_wall);
      if (!trace_out.empty()) {
        fs::create_directories(trace_out);
        for (const auto& t : result.traces) {
          text::write_file((fs::path(trace_out) / (t.spec.label + ".trace")).string(), export_trace(t));
        }
      }
      return 0;
    }
    if (*oracle_cmd) {
      auto in = load(oracle_in);
      const auto region = build_region(in.start, in.goal, HeuristicKind::Octile, in.table);
      const auto cost = brute_force_shortest(in.snapshot, in.table, in.start, in.goal, region);
      out << (cost ? text::format_double(*cost) : std::string("unreachable")) << "\n";
      return 0;
    }
    if (*verify_cmd) {
      if (!generate.empty()) {
        std::vector<std::string> parts;
        std::string part;
        for (std::istringstream ss(generate); std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 3) throw ArgumentError("--generate takes kind:size:seed");
        const auto p = generate_puzzle(parse_puzzle_kind(parts[0]),
                                       static_cast<int>(text::parse_int(parts[1], 0)),
                                       static_cast<std::uint64_t>(text::parse_int(parts[2], 0)));
        const auto v = check_solution(p, *p.witness, p.witness_edits);
        if (v.kind != VerdictKind::Solved) throw ConfigError("generated witness fails: " + v.reason);
        out << save_puzzle(p);
        return 0;
      }
      if (puzzle_file.empty()) throw ArgumentError("verify-puzzle needs a puzzle file or --generate");
      const auto p = load_puzzle(text::read_file(puzzle_file));
      const auto& g = solution_file.empty() ? p.initial : load_graph(text::read_file(solution_file));
      const auto v = check_solution(p, g, solution_file.empty() ? 0 : edits);
      out << to_string(p.kind) << ": " << p.initial.node_count() << " nodes, "
          << p.initial.edge_count() << " edges, budget "
          << (p.budget ? std::to_string(*p.budget) : std::string("none")) << "\n";
      out << (solution_file.empty() ? "initial graph: " : "solution: ") << to_string(v.kind);
      if (!v.reason.empty()) out << " (" << v.reason << ")";
      out << "\n";
      return solution_file.empty() || v.kind == VerdictKind::Solved ? 0 : 1;
    }
    if (*serve_cmd) {
      if (!data_dir.empty()) config.data_dir = data_dir;
      return serve(std::move(config), listen, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace blockpath::cli
