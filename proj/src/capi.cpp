#include "treesolve/treesolve.h"

#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "treesolve/analysis.hpp"
#include "treesolve/dense.hpp"
#include "treesolve/error.hpp"
#include "treesolve/netsim.hpp"
#include "treesolve/oracle.hpp"
#include "treesolve/problem_io.hpp"
#include "treesolve/solver.hpp"
#include "treesolve/topology.hpp"

struct ts_problem {
  ts::io::Problem value;
};

struct ts_solution {
  std::size_t leaves = 0;
  std::size_t block_size = 0;
  std::size_t rhs_cols = 0;
  ts::dense::Matrix x;
  std::string report_json;  // empty when no simulation report is attached
};

namespace {

thread_local std::string g_last_error;

ts_status status_from_code(ts::ErrorCode code) {
  switch (code) {
    case ts::ErrorCode::singular_matrix:
      return TS_ERR_NUMERIC;
    case ts::ErrorCode::deadlock:
      return TS_ERR_DEADLOCK;
    case ts::ErrorCode::io_error:
    case ts::ErrorCode::format_error:
      return TS_ERR_IO;
    case ts::ErrorCode::schema_mismatch:
    case ts::ErrorCode::shape_mismatch:
      return TS_ERR_MISMATCH;
    default:
      return TS_ERR_USAGE;
  }
}

template <typename Fn>
ts_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ts::Error& e) {
    g_last_error = e.what();
    return status_from_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TS_ERR_USAGE;
  }
}

ts_status fail(ts_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

ts::sim::CostModel to_cost(const ts_cost_model* cost) {
  ts::sim::CostModel c;
  if (cost) {
    c.latency = cost->latency;
    c.per_element = cost->per_element;
    c.flop = cost->flop;
  }
  return c;
}

nlohmann::json problem_block(const ts::io::Problem& p) {
  return {{"N", p.shape.leaves},
          {"m", p.shape.block_size},
          {"k", p.shape.rhs_cols},
          {"b", p.shape.bandwidth},
          {"generator", ts::io::generator_name(p.generator)},
          {"seed", p.seed}};
}

double relative_residual(const ts::io::Problem& p, const ts::dense::Matrix& x) {
  ts::oracle::GlobalSystem g = ts::oracle::assemble_global(p.rows, p.shape);
  ts::dense::Matrix ax = ts::dense::multiply(g.a, x);
  const double norm = ts::dense::max_norm(g.rhs);
  const double err = ts::dense::max_abs_diff(ax, g.rhs);
  return norm > 0.0 ? err / norm : err;
}

void check_solution_matches(const ts::io::Problem& p, const ts_solution& s) {
  if (s.leaves != p.shape.leaves || s.block_size != p.shape.block_size ||
      s.rhs_cols != p.shape.rhs_cols) {
    throw ts::ShapeMismatch("solution shape does not match the problem");
  }
}

}  // namespace

extern "C" {

const char* ts_status_name(ts_status status) {
  switch (status) {
    case TS_OK: return "ok";
    case TS_ERR_USAGE: return "usage";
    case TS_ERR_NUMERIC: return "numerical";
    case TS_ERR_DEADLOCK: return "deadlock";
    case TS_ERR_IO: return "io";
    case TS_ERR_MISMATCH: return "mismatch";
  }
  return "unknown";
}

const char* ts_last_error(void) { return g_last_error.c_str(); }

void ts_string_free(char* s) { delete[] s; }

ts_status ts_problem_generate(const char* generator, uint64_t leaves,
                              uint64_t block_size, uint64_t rhs_cols,
                              uint64_t bandwidth, uint64_t seed,
                              ts_problem** out) {
  if (!generator || !out) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    auto p = std::make_unique<ts_problem>();
    p->value = ts::io::generate(ts::io::parse_generator(generator), leaves,
                                block_size, rhs_cols, bandwidth, seed);
    *out = p.release();
    return TS_OK;
  });
}

ts_status ts_problem_read(const char* path, ts_problem** out) {
  if (!path || !out) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    auto p = std::make_unique<ts_problem>();
    p->value = ts::io::read_problem(path);
    *out = p.release();
    return TS_OK;
  });
}

ts_status ts_problem_write(const ts_problem* p, const char* path) {
  if (!p || !path) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    ts::io::write_problem(p->value, path);
    return TS_OK;
  });
}

ts_status ts_problem_dump_text(const ts_problem* p, char** text) {
  if (!p || !text) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    *text = copy_string(ts::io::dump_text(p->value));
    return TS_OK;
  });
}

void ts_problem_free(ts_problem* p) { delete p; }

uint64_t ts_problem_leaves(const ts_problem* p) { return p ? p->value.shape.leaves : 0; }
uint64_t ts_problem_block_size(const ts_problem* p) {
  return p ? p->value.shape.block_size : 0;
}
uint64_t ts_problem_rhs_cols(const ts_problem* p) {
  return p ? p->value.shape.rhs_cols : 0;
}
uint64_t ts_problem_bandwidth(const ts_problem* p) {
  return p ? p->value.shape.bandwidth : 0;
}
uint64_t ts_problem_seed(const ts_problem* p) { return p ? p->value.seed : 0; }

const char* ts_problem_generator(const ts_problem* p) {
  static thread_local std::string name;
  if (!p) return "";
  name = ts::io::generator_name(p->value.generator);
  return name.c_str();
}

ts_status ts_solve(const ts_problem* p, const ts_cost_model* cost,
                   ts_solution** out) {
  if (!p || !out) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    ts::solver::SolveResult result = ts::solver::solve_distributed(
        p->value.rows, p->value.shape, to_cost(cost));
    auto s = std::make_unique<ts_solution>();
    s->leaves = p->value.shape.leaves;
    s->block_size = p->value.shape.block_size;
    s->rhs_cols = p->value.shape.rhs_cols;
    s->x = std::move(result.solution);
    nlohmann::json j = ts::sim::report_to_json(result.report);
    j["problem"] = problem_block(p->value);
    s->report_json = j.dump();
    *out = s.release();
    return TS_OK;
  });
}

ts_status ts_oracle_solve(const ts_problem* p, ts_solution** out) {
  if (!p || !out) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    ts::oracle::GlobalSystem g =
        ts::oracle::assemble_global(p->value.rows, p->value.shape);
    auto s = std::make_unique<ts_solution>();
    s->leaves = p->value.shape.leaves;
    s->block_size = p->value.shape.block_size;
    s->rhs_cols = p->value.shape.rhs_cols;
    s->x = ts::oracle::banded_solve(g);
    *out = s.release();
    return TS_OK;
  });
}

ts_status ts_solution_read(const char* path, ts_solution** out) {
  if (!path || !out) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    ts::io::Solution in = ts::io::read_solution(path);
    auto s = std::make_unique<ts_solution>();
    s->leaves = in.leaves;
    s->block_size = in.block_size;
    s->rhs_cols = in.rhs_cols;
    s->x = std::move(in.x);
    *out = s.release();
    return TS_OK;
  });
}

ts_status ts_solution_write(const ts_solution* s, const char* path) {
  if (!s || !path) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    ts::io::Solution out;
    out.leaves = s->leaves;
    out.block_size = s->block_size;
    out.rhs_cols = s->rhs_cols;
    out.x = s->x;
    ts::io::write_solution(out, path);
    return TS_OK;
  });
}

void ts_solution_free(ts_solution* s) { delete s; }

ts_status ts_solution_values(const ts_solution* s, const double** data,
                             uint64_t* rows, uint64_t* cols) {
  if (!s || !data || !rows || !cols) return fail(TS_ERR_USAGE, "null argument");
  *data = s->x.data().data();
  *rows = s->x.rows();
  *cols = s->x.cols();
  return TS_OK;
}

ts_status ts_solution_report_json(const ts_solution* s, char** json) {
  if (!s || !json) return fail(TS_ERR_USAGE, "null argument");
  if (s->report_json.empty()) {
    return fail(TS_ERR_USAGE, "solution carries no simulation report");
  }
  *json = copy_string(s->report_json);
  return TS_OK;
}

ts_status ts_residual(const ts_problem* p, const ts_solution* s,
                      double* residual) {
  if (!p || !s || !residual) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    check_solution_matches(p->value, *s);
    *residual = relative_residual(p->value, s->x);
    return TS_OK;
  });
}

ts_status ts_verify(const ts_problem* p, const ts_solution* s,
                    double tolerance, double* residual, double* oracle_diff) {
  if (!p || !s || !residual || !oracle_diff) {
    return fail(TS_ERR_USAGE, "null argument");
  }
  return guarded([&] {
    check_solution_matches(p->value, *s);
    ts::oracle::GlobalSystem g =
        ts::oracle::assemble_global(p->value.rows, p->value.shape);
    ts::dense::Matrix ax = ts::dense::multiply(g.a, s->x);
    const double norm = ts::dense::max_norm(g.rhs);
    const double err = ts::dense::max_abs_diff(ax, g.rhs);
    *residual = norm > 0.0 ? err / norm : err;

    ts::dense::Matrix reference = ts::oracle::banded_solve(g);
    const double ref_norm = ts::dense::max_norm(reference);
    const double diff = ts::dense::max_abs_diff(reference, s->x);
    *oracle_diff = ref_norm > 0.0 ? diff / ref_norm : diff;

    if (!(*residual <= tolerance)) {
      return fail(TS_ERR_NUMERIC,
                  "residual " + std::to_string(*residual) + " exceeds tolerance " +
                      std::to_string(tolerance));
    }
    return TS_OK;
  });
}

double ts_predicted_time(uint64_t leaves, uint64_t block_size, uint64_t rhs_cols,
                         const ts_cost_model* cost) {
  try {
    return ts::analysis::predicted_time(leaves, block_size, rhs_cols,
                                        to_cost(cost));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return -1.0;
  }
}

ts_status ts_latency_lower_bound(uint64_t leaves, int dimension, double* out) {
  if (!out) return fail(TS_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = ts::analysis::latency_lower_bound(leaves, dimension);
    return TS_OK;
  });
}

ts_status ts_optimal_node_exponent(int dimension, int64_t* p_num, int64_t* p_den,
                                   int64_t* w_num, int64_t* w_den) {
  if (!p_num || !p_den || !w_num || !w_den) {
    return fail(TS_ERR_USAGE, "null argument");
  }
  return guarded([&] {
    ts::analysis::NodeExponents e = ts::analysis::optimal_node_exponent(dimension);
    *p_num = e.node_count.num;
    *p_den = e.node_count.den;
    *w_num = e.time.num;
    *w_den = e.time.den;
    return TS_OK;
  });
}

ts_status ts_scaling_csv(const char* const* report_jsons, size_t count,
                         char** csv) {
  if (!report_jsons || !csv || count == 0) {
    return fail(TS_ERR_USAGE, "at least one report is required");
  }
  return guarded([&]() -> ts_status {
    std::vector<ts::analysis::ScalingRow> rows;
    bool have_ref = false;
    std::uint64_t ref_m = 0, ref_k = 0;
    ts::sim::CostModel ref_cost;

    for (size_t i = 0; i < count; ++i) {
      if (!report_jsons[i]) return fail(TS_ERR_USAGE, "null report string");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(report_jsons[i]);
      } catch (const nlohmann::json::exception& e) {
        throw ts::SchemaMismatch("report " + std::to_string(i) +
                                 " is not valid JSON: " + e.what());
      }
      if (!j.contains("makespan") || !j.contains("problem") || !j.contains("cost")) {
        throw ts::SchemaMismatch("report " + std::to_string(i) +
                                 " lacks makespan/problem/cost blocks");
      }
      const std::uint64_t n = j["problem"]["N"].get<std::uint64_t>();
      const std::uint64_t m = j["problem"]["m"].get<std::uint64_t>();
      const std::uint64_t k = j["problem"]["k"].get<std::uint64_t>();
      ts::sim::CostModel cost;
      cost.latency = j["cost"]["latency"].get<double>();
      cost.per_element = j["cost"]["per_element"].get<double>();
      cost.flop = j["cost"]["flop"].get<double>();
      if (!have_ref) {
        have_ref = true;
        ref_m = m;
        ref_k = k;
        ref_cost = cost;
      } else if (m != ref_m || k != ref_k || cost.latency != ref_cost.latency ||
                 cost.per_element != ref_cost.per_element ||
                 cost.flop != ref_cost.flop) {
        throw ts::SchemaMismatch(
            "reports mix block sizes, rhs column counts or cost models");
      }
      const double model = ts::analysis::predicted_time(n, m, k, cost);
      const double makespan = j["makespan"].get<double>();
      rows.push_back(ts::analysis::ScalingRow{n, makespan, model,
                                              model > 0.0 ? makespan / model : 0.0});
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.leaves < b.leaves; });
    *csv = copy_string(ts::analysis::scaling_csv(rows));
    return TS_OK;
  });
}

}  // extern "C"
