// rollsim command line: run, sweep, verify.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rollsim/rollsim.hpp"
#include "rollsim/verify.hpp"

namespace fs = std::filesystem;
using namespace rollsim;

namespace {

constexpr int exit_config = 1;
constexpr int exit_integrity = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string default_out_dir() {
  if (const char* env = std::getenv("ROLLSIM_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "rollsim-out";
}

// Short stable tag for output file names.
std::string config_hash(const SimConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : print_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

std::vector<int> parse_levels(const std::string& spec) {
  auto to_int = [&spec](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw ConfigError("--levels: cannot parse '" + spec + "' (expected A..B or a,b,c)");
    }
    return v;
  };
  std::vector<int> out;
  if (const auto dots = spec.find(".."); dots != std::string::npos) {
    const int a = to_int(std::string_view(spec).substr(0, dots));
    const int b = to_int(std::string_view(spec).substr(dots + 2));
    if (a > b) throw ConfigError("--levels: empty range '" + spec + "'");
    for (int l = a; l <= b; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(to_int(item));
  return out;
}

std::vector<RecoveryStrategy> parse_strategies(const std::string& spec) {
  std::vector<RecoveryStrategy> out;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item == "default" || item == "Default") {
      out.push_back(RecoveryStrategy::default_rollback);
    } else if (item == "dependency" || item == "Dependency") {
      out.push_back(RecoveryStrategy::dependency_aware);
    } else {
      throw ConfigError("--recovery: unknown strategy '" + item + "'");
    }
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || p != item.data() + item.size()) {
      throw ConfigError("--seeds: cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

void print_brief(const RunSummary& s) {
  std::cout << "makespan_s=" << s.makespan << " aggregated_processing_s=" << s.aggregated_processing
            << " cancelled=" << s.cancelled_count << " replays=" << s.replay_count
            << " failures=" << s.failures.size() << " tc_triangles=" << s.tc_triangles << "\n";
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets,
            const std::string& out_dir, bool trace) {
  const SimConfig cfg = load_config(read_file(config_path), sets);
  SimOptions opts;
  opts.keep_trace = trace;
  Simulator sim(cfg, opts);
  const SimResult r = sim.run();
  fs::create_directories(out_dir);
  write_file_atomic(fs::path(out_dir) / "summary.json", emit_json(r.summary));
  write_file_atomic(fs::path(out_dir) / "profile.csv", profile_table(r.summary.profile));
  if (trace) {
    std::ostringstream os;
    write_trace_csv(os, r.trace, [&sim](TaskIndex t) { return sim.kernel().label(t); });
    write_file_atomic(fs::path(out_dir) / "trace.csv", os.str());
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  print_brief(r.summary);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& levels, const std::string& recovery, const std::string& seeds,
              const std::string& out_dir, unsigned threads) {
  const SimConfig base = load_config(read_file(config_path), sets);
  const auto strategies = parse_strategies(recovery);
  const auto points = sweep_points(parse_levels(levels), strategies, parse_seeds(seeds));
  const auto entries = run_sweep(base, points, threads);
  fs::create_directories(out_dir);
  const std::string tag = config_hash(base);
  for (const auto& e : entries) {
    const std::string name = tag + "_L" + std::to_string(e.point.level) + "_" +
                             (e.point.strategy == RecoveryStrategy::default_rollback
                                  ? "default"
                                  : "dependency") +
                             "_s" + std::to_string(e.point.seed) + ".json";
    write_file_atomic(fs::path(out_dir) / name, emit_json(e.summary));
  }
  for (RecoveryStrategy s : strategies) {
    const std::string name = s == RecoveryStrategy::default_rollback ? "series_default.csv"
                                                                     : "series_dependency.csv";
    write_file_atomic(fs::path(out_dir) / name, series_csv(entries, s));
  }
  if (strategies.size() == 2) {
    write_file_atomic(fs::path(out_dir) / "comparison.csv", comparison_csv(entries));
  }
  std::cout << entries.size() << " runs written to " << out_dir << "\n";
  return 0;
}

int cmd_verify(int max_grid) {
  bool ok = true;
  for (const auto& c : run_verify(max_grid)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    ok = ok && c.passed;
  }
  return ok ? 0 : exit_integrity;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of checkpointing and rollback recovery for stencil task graphs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir = default_out_dir();
  bool trace = false;
  auto* run = app.add_subcommand("run", "Run one simulation");
  run->add_option("--config", config_path, "INI configuration file")->required();
  run->add_option("--set", sets, "Override a key, KEY=VALUE (repeatable)");
  run->add_option("--out", out_dir, "Output directory (default $ROLLSIM_OUT_DIR or ./rollsim-out)");
  run->add_flag("--trace", trace, "Also write trace.csv");

  std::string levels = "1..6";
  std::string recovery = "default,dependency";
  std::string seeds = "1";
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a level x strategy x seed sweep");
  sweep->add_option("--config", config_path, "INI configuration file")->required();
  sweep->add_option("--set", sets, "Override a key, KEY=VALUE (repeatable)");
  sweep->add_option("--levels", levels, "Checkpoint levels, A..B or a,b,c");
  sweep->add_option("--recovery", recovery, "Strategies: default,dependency");
  sweep->add_option("--seeds", seeds, "Comma-separated seeds");
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--threads", threads, "Parallel runs (default: hardware threads)");

  int max_grid = 16;
  auto* verify = app.add_subcommand("verify", "Run the oracle suites");
  verify->add_option("--max-grid", max_grid, "Largest grid side checked")->check(CLI::Range(4, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_config;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, sets, out_dir, trace);
    if (sweep->parsed()) {
      return cmd_sweep(config_path, sets, levels, recovery, seeds, out_dir, threads);
    }
    if (verify->parsed()) return cmd_verify(max_grid);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return exit_integrity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_integrity;
  }
  return 0;
}
