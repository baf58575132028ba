#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gossipmon/compare.hpp"
#include "gossipmon/errors.hpp"
#include "gossipmon/report_io.hpp"
#include "gossipmon/scenario_io.hpp"
#include "gossipmon/simulator.hpp"
#include "gossipmon/trace.hpp"

namespace fs = std::filesystem;
using namespace gossipmon;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError(dir.string(), "cannot create output directory");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  return out;
}

// Splits "a,b,[1,2]" on top-level commas only.
std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '[' || c == '{') ++depth;
    if (c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void print_summary(std::ostream& os, const std::vector<MetricsReport>& reports) {
  for (const auto& s : summarize_ratios(reports)) {
    os << "overhead_ratio " << to_string(s.scheme) << ": mean " << s.mean << "% min " << s.min
       << "% max " << s.max << "% spread " << s.spread() << " pp over " << s.runs << " seeds\n";
  }
}

struct SimulateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  bool trace = false;
};

int simulate(const SimulateArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  if (a.seed) sc.seed = *a.seed;
  const fs::path dir(a.out);
  ensure_dir(dir);

  RunOptions opts;
  std::ofstream trace_file;
  std::optional<JsonLinesTraceWriter> writer;
  if (a.trace) {
    trace_file = open_out(dir / "trace.jsonl");
    writer.emplace(trace_file);
    opts.sinks.push_back(&*writer);
  }
  const auto result = run(sc, opts);
  if (a.trace) {
    trace_file.flush();
    if (!trace_file) throw IoError((dir / "trace.jsonl").string(), "write failed");
  }
  emit_report(result.report, ReportFormat::csv, dir / "report.csv");
  emit_report(result.report, ReportFormat::json, dir / "report.json");

  const auto& r = result.report;
  std::cout << to_string(r.scheme) << " population " << r.population << " groups " << r.groups
            << " regions " << r.regions << " rounds " << r.rounds << " seed " << r.seed
            << ": total " << r.total_messages() << " messages, convergence round ";
  if (r.convergence_round) {
    std::cout << *r.convergence_round << '\n';
  } else {
    std::cout << "none\n";
  }
  return 0;
}

struct CompareArgs {
  std::string scenario;
  std::string schemes = "layered,flat,central";
  std::uint32_t seeds = 5;
  std::string out;
};

void write_rows(const std::string& out, const std::string& rows) {
  if (out.empty()) {
    std::cout << kCompareHeader << '\n' << rows;
    return;
  }
  const fs::path path(out);
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  auto f = open_out(path);
  f << kCompareHeader << '\n' << rows;
  if (!f.flush()) throw IoError(out, "write failed");
}

int compare(const CompareArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  const auto schemes = parse_scheme_list(a.schemes);
  const auto reports = compare_schemes(sc, schemes, a.seeds);
  write_rows(a.out, compare_csv_rows(reports));
  print_summary(std::cerr, reports);
  return 0;
}

struct SweepArgs {
  std::string scenario;
  std::string param;
  std::string schemes = "layered,flat,central";
  std::uint32_t seeds = 1;
  std::string out;
};

int sweep(const SweepArgs& a) {
  const auto eq = a.param.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == a.param.size()) {
    throw ConfigError("param", "expected key=v1,v2,...");
  }
  const std::string key = a.param.substr(0, eq);
  const auto values = split_values(a.param.substr(eq + 1));
  const auto schemes = parse_scheme_list(a.schemes);
  const auto base = read_scenario_json(a.scenario);

  std::string rows;
  for (const auto& v : values) {
    auto doc = base;
    apply_override(doc, key, v);
    const Scenario sc = parse_scenario(doc);
    const auto reports = compare_schemes(sc, schemes, a.seeds);
    rows += compare_csv_rows(reports, key, v);
    std::cerr << key << '=' << v << '\n';
    print_summary(std::cerr, reports);
  }
  write_rows(a.out, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered gossip monitoring simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run one scenario and write its reports");
  s->add_option("--scenario", sim.scenario, "Scenario JSON file")->required();
  s->add_option("--seed", sim.seed, "Override the scenario seed");
  s->add_option("--out", sim.out, "Output directory")->capture_default_str();
  s->add_flag("--trace", sim.trace, "Also write trace.jsonl");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Run several schemes on the same seeds");
  c->add_option("--scenario", cmp.scenario, "Scenario JSON file")->required();
  c->add_option("--schemes", cmp.schemes, "Comma-separated schemes")->capture_default_str();
  c->add_option("--seeds", cmp.seeds, "Number of consecutive seeds from the scenario seed")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--out", cmp.out, "CSV file (stdout when absent)");

  SweepArgs swp;
  auto* w = app.add_subcommand("sweep", "Compare schemes across values of one scenario field");
  w->add_option("--scenario", swp.scenario, "Scenario JSON file")->required();
  w->add_option("--param", swp.param, "key=v1,v2,... with a dotted scenario key")->required();
  w->add_option("--schemes", swp.schemes, "Comma-separated schemes")->capture_default_str();
  w->add_option("--seeds", swp.seeds, "Seeds per value")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  w->add_option("--out", swp.out, "CSV file (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (s->parsed()) return simulate(sim);
    if (c->parsed()) return compare(cmp);
    return sweep(swp);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}
