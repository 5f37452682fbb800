// treesolve command-line front end.
//
// Drives problem generation, the simulated distributed solve,
// verification against the sequential reference, and scaling reports.
// Uses only the public C API from treesolve.h.
//
// Exit codes: 0 success, 1 usage, 2 numerical failure, 3 deadlock,
// 4 I/O or format problems (including mismatched inputs).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treesolve/treesolve.h"

namespace {

int exit_code(ts_status status) {
  switch (status) {
    case TS_OK: return 0;
    case TS_ERR_USAGE: return 1;
    case TS_ERR_NUMERIC: return 2;
    case TS_ERR_DEADLOCK: return 3;
    case TS_ERR_IO: return 4;
    case TS_ERR_MISMATCH: return 4;
  }
  return 1;
}

[[noreturn]] void die(ts_status status) {
  std::fprintf(stderr, "error: category=%s %s\n", ts_status_name(status),
               ts_last_error());
  std::exit(exit_code(status));
}

void check(ts_status status) {
  if (status != TS_OK) die(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: category=io cannot open '%s'\n", path.c_str());
    std::exit(4);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) {
    std::fprintf(stderr, "error: category=io cannot write '%s'\n", path.c_str());
    std::exit(4);
  }
}

struct ProblemHandle {
  ts_problem* p = nullptr;
  ~ProblemHandle() { ts_problem_free(p); }
};

struct SolutionHandle {
  ts_solution* s = nullptr;
  ~SolutionHandle() { ts_solution_free(s); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree-parallel banded linear solver and network simulator"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a problem instance");
  std::string gen_kind = "tridiag-dd";
  std::uint64_t leaves = 8, block = 2, rhs = 1, seed = 1;
  std::int64_t bandwidth = -1;
  std::string gen_out = "problem.tsp";
  gen->add_option("--generator", gen_kind, "identity | tridiag-dd | spd-banded");
  gen->add_option("--leaves", leaves, "number of block rows (power of two)");
  gen->add_option("--block-size", block, "block dimension m");
  gen->add_option("--rhs", rhs, "right-hand-side column count");
  gen->add_option("--bandwidth", bandwidth, "scalar bandwidth (default: block size)");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--out", gen_out, "output problem file");

  // solve
  auto* solve = app.add_subcommand("solve", "run the simulated distributed solve");
  std::string solve_problem;
  std::string solve_out = "solution.tsx";
  std::string metrics_out;
  ts_cost_model cost{0.0, 1.0, 1.0};
  solve->add_option("problem", solve_problem, "problem file")->required();
  solve->add_option("--latency", cost.latency, "latency cost per message");
  solve->add_option("--per-element", cost.per_element, "cost per transferred scalar");
  solve->add_option("--flop", cost.flop, "cost per arithmetic operation");
  solve->add_option("--out", solve_out, "output solution file");
  solve->add_option("--metrics", metrics_out, "write the simulation report JSON here");

  // verify
  auto* verify = app.add_subcommand("verify", "check a solution against the problem");
  std::string verify_problem, verify_solution;
  double tol = 1e-8;
  verify->add_option("problem", verify_problem, "problem file")->required();
  verify->add_option("solution", verify_solution, "solution file")->required();
  verify->add_option("--tol", tol, "residual tolerance");

  // report
  auto* report = app.add_subcommand("report", "scaling CSV from solve reports");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("reports", report_inputs, "report JSON files")->required();
  report->add_option("--out", report_out, "output CSV file (default: stdout)");

  // dump
  auto* dump = app.add_subcommand("dump", "print a problem file as text");
  std::string dump_problem;
  dump->add_option("problem", dump_problem, "problem file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    ProblemHandle p;
    const std::uint64_t b = bandwidth < 0 ? block : static_cast<std::uint64_t>(bandwidth);
    check(ts_problem_generate(gen_kind.c_str(), leaves, block, rhs, b, seed, &p.p));
    check(ts_problem_write(p.p, gen_out.c_str()));
    std::printf("wrote %s: generator=%s leaves=%llu block=%llu rhs=%llu bandwidth=%llu seed=%llu\n",
                gen_out.c_str(), gen_kind.c_str(),
                (unsigned long long)ts_problem_leaves(p.p),
                (unsigned long long)ts_problem_block_size(p.p),
                (unsigned long long)ts_problem_rhs_cols(p.p),
                (unsigned long long)ts_problem_bandwidth(p.p),
                (unsigned long long)ts_problem_seed(p.p));
    return 0;
  }

  if (*solve) {
    ProblemHandle p;
    check(ts_problem_read(solve_problem.c_str(), &p.p));
    SolutionHandle s;
    check(ts_solve(p.p, &cost, &s.s));
    check(ts_solution_write(s.s, solve_out.c_str()));
    double residual = 0.0;
    check(ts_residual(p.p, s.s, &residual));
    char* json = nullptr;
    check(ts_solution_report_json(s.s, &json));
    std::string report_json(json);
    ts_string_free(json);
    if (!metrics_out.empty()) write_file(metrics_out, report_json);
    // Makespan is cheap to surface without a JSON parser in the CLI.
    const double predicted = ts_predicted_time(ts_problem_leaves(p.p),
                                               ts_problem_block_size(p.p),
                                               ts_problem_rhs_cols(p.p), &cost);
    std::printf("solved %s: residual=%.3e predicted_time=%.6g solution=%s%s%s\n",
                solve_problem.c_str(), residual, predicted, solve_out.c_str(),
                metrics_out.empty() ? "" : " metrics=",
                metrics_out.empty() ? "" : metrics_out.c_str());
    return 0;
  }

  if (*verify) {
    ProblemHandle p;
    check(ts_problem_read(verify_problem.c_str(), &p.p));
    SolutionHandle s;
    check(ts_solution_read(verify_solution.c_str(), &s.s));
    double residual = 0.0, oracle_diff = 0.0;
    const ts_status status = ts_verify(p.p, s.s, tol, &residual, &oracle_diff);
    if (status != TS_OK && status != TS_ERR_NUMERIC) die(status);
    std::printf("residual=%.6e tolerance=%.6e reference_diff=%.6e verdict=%s\n",
                residual, tol, oracle_diff, status == TS_OK ? "ok" : "fail");
    if (status != TS_OK) {
      std::fprintf(stderr, "error: category=numerical %s\n", ts_last_error());
      return 2;
    }
    return 0;
  }

  if (*report) {
    std::vector<std::string> contents;
    std::vector<const char*> pointers;
    contents.reserve(report_inputs.size());
    for (const std::string& path : report_inputs) {
      contents.push_back(read_file(path));
    }
    for (const std::string& c : contents) pointers.push_back(c.c_str());
    char* csv = nullptr;
    check(ts_scaling_csv(pointers.data(), pointers.size(), &csv));
    std::string text(csv);
    ts_string_free(csv);
    if (report_out.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      write_file(report_out, text);
      std::printf("wrote %s (%zu rows)\n", report_out.c_str(), contents.size());
    }
    return 0;
  }

  if (*dump) {
    ProblemHandle p;
    check(ts_problem_read(dump_problem.c_str(), &p.p));
    char* text = nullptr;
    check(ts_problem_dump_text(p.p, &text));
    std::fputs(text, stdout);
    ts_string_free(text);
    return 0;
  }

  return 1;
}
