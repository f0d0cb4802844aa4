// acep: benchmark, planning and workload-generation front end.
// Talks to the engine exclusively through the C API.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "acep/acep.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

bool read_file(const std::string& path, std::string& out, std::string& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err = "cannot open file: " + path;
    return false;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

int report(int rc) {
  std::cerr << "acep: " << acep_last_error() << "\n";
  return rc == ACEP_ERR_INPUT ? kExitConfig : kExitRuntime;
}

struct StringOut {
  char* ptr = nullptr;
  ~StringOut() { acep_string_free(ptr); }
};

int run_bench(const std::string& config_path) {
  std::string config, err;
  if (!read_file(config_path, config, err)) {
    std::cerr << "acep: " << err << "\n";
    return kExitConfig;
  }
  StringOut csv;
  int rc = acep_bench_run(config.c_str(), &csv.ptr);
  if (rc != ACEP_OK) return report(rc);
  std::cout << csv.ptr;
  return kExitOk;
}

int run_plan(const std::string& pattern_path, const std::string& stats_path,
             const std::string& planner, const std::string& k_text, const std::string& d_text) {
  std::string pattern_text, stats_text, err;
  if (!read_file(pattern_path, pattern_text, err) || !read_file(stats_path, stats_text, err)) {
    std::cerr << "acep: " << err << "\n";
    return kExitConfig;
  }
  int k = 1;
  if (k_text == "ALL" || k_text == "all") {
    k = -1;
  } else {
    try {
      k = std::stoi(k_text);
    } catch (const std::exception&) {
      std::cerr << "acep: --k expects an integer or ALL\n";
      return kExitConfig;
    }
  }
  double d = 0;
  int auto_d = 0;
  if (d_text == "auto") {
    auto_d = 1;
  } else {
    try {
      d = std::stod(d_text);
    } catch (const std::exception&) {
      std::cerr << "acep: --d expects a number or auto\n";
      return kExitConfig;
    }
  }

  acep_pattern* pat = nullptr;
  int rc = acep_pattern_parse(pattern_text.c_str(), &pat);
  if (rc != ACEP_OK) return report(rc);
  std::unique_ptr<acep_pattern, decltype(&acep_pattern_free)> pat_guard(pat, acep_pattern_free);

  acep_stats* stats = nullptr;
  rc = acep_stats_from_csv(stats_text.c_str(), &stats);
  if (rc != ACEP_OK) return report(rc);
  std::unique_ptr<acep_stats, decltype(&acep_stats_free)> stats_guard(stats, acep_stats_free);

  StringOut reportText;
  rc = acep_explain(pat, stats, planner.c_str(), k, d, auto_d, &reportText.ptr);
  if (rc != ACEP_OK) return report(rc);
  std::cout << reportText.ptr;
  return kExitOk;
}

int run_gen(const std::string& script_path, const std::string& out_path) {
  std::string script, err;
  if (!read_file(script_path, script, err)) {
    std::cerr << "acep: " << err << "\n";
    return kExitConfig;
  }
  StringOut csv;
  int rc = acep_generate(script.c_str(), &csv.ptr);
  if (rc != ACEP_OK) return report(rc);
  std::ofstream out(out_path, std::ios::binary);
  if (!out || !(out << csv.ptr)) {
    std::cerr << "acep: cannot write " << out_path << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive complex event processing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(acep_version()));

  std::string config_path;
  auto* bench = app.add_subcommand("bench", "run a benchmark matrix");
  bench->add_option("--config", config_path, "benchmark config file")->required();

  std::string pattern_path, stats_path, planner = "greedy", k_text = "1", d_text = "0";
  auto* plan = app.add_subcommand("plan", "plan a pattern and explain the invariants");
  plan->add_option("--pattern", pattern_path, "pattern file")->required();
  plan->add_option("--stats", stats_path, "statistics CSV file")->required();
  plan->add_option("--planner", planner, "greedy or zstream")->required();
  plan->add_option("--k", k_text, "invariants per block, or ALL");
  plan->add_option("--d", d_text, "invariant distance, or auto");

  std::string script_path, out_path;
  auto* gen = app.add_subcommand("gen", "generate a synthetic event stream");
  gen->add_option("--script", script_path, "drift script file")->required();
  gen->add_option("--out", out_path, "output event CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (bench->parsed()) return run_bench(config_path);
  if (plan->parsed()) return run_plan(pattern_path, stats_path, planner, k_text, d_text);
  return run_gen(script_path, out_path);
}
