#ifndef TREESOLVE_ANALYSIS_HPP
#define TREESOLVE_ANALYSIS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "treesolve/error.hpp"
#include "treesolve/netsim.hpp"

// Closed-form cost predictions and lower-bound calculations.
//
// The solve runs log2(N) rounds. Per round, a payload of
// m*(m*log2(N) + k) elements crosses each active link and the busiest
// node performs on the order of m^2*(m*log2(N) + k) operations, so with
// explicit cost-model weights the predicted makespan is
//
//   log2(N) * (latency + per_element*m*(m*log2(N)+k)
//                       + flop*m^2*(m*log2(N)+k)).
//
// These are order statements; empirical checks compare makespan/model
// ratios against a band rather than asserting equality.
//
// The lower bounds concern machines embedded in s-dimensional space
// (s = 1: a line, 2: a surface, 3: a volume): N unit-sized nodes need a
// container of radius N^(1/s), so one message between the farthest pair
// costs at least that — regardless of how many cables are laid. For an
// algorithm using N^p nodes that each hold N^q pieces of data
// (q >= 1-p, since N pieces must be stored somewhere), every node must
// read its N^(1-p) share and communicate at least once, giving time
// N^(1-p) + N^(p/s). Balancing the two exponents yields p = s/(s+1) and
// overall time exponent 1/(s+1).
namespace ts::analysis {

/// Exact rational, normalized with positive denominator.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);
  bool operator==(const Rational&) const = default;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Predicted makespan in cost-model units; monotone in every argument.
/// Requires leaves to be a power of two >= 2.
double predicted_time(std::size_t leaves, std::size_t block_size,
                      std::size_t rhs_cols, const sim::CostModel& cost);

/// N^(1/s): the unavoidable latency for N unit-sized nodes packed into
/// s-dimensional space. s must be 1, 2 or 3.
double latency_lower_bound(std::size_t leaves, int dimension);

struct NodeExponents {
  Rational node_count;  // optimal exponent p of the node count N^p
  Rational time;        // resulting time exponent N^(1/(s+1))
};

/// Optimal node-count and time exponents for an s-dimensional machine:
/// (1/2, 1/2), (2/3, 1/3), (3/4, 1/4) for s = 1, 2, 3.
NodeExponents optimal_node_exponent(int dimension);

struct ScalingSample {
  std::size_t leaves = 0;
  double makespan = 0.0;
  double model = 0.0;
};

struct ScalingRow {
  std::size_t leaves = 0;
  double makespan = 0.0;
  double model = 0.0;
  double ratio = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;  // sorted by leaf count
  double band = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool within_band = false;
};

/// Ratio check of measured makespans against model values. Requires at
/// least three samples with distinct leaf counts; flags the report when
/// max_ratio/min_ratio exceeds `band`.
ScalingReport scaling_check(std::vector<ScalingSample> samples, double band = 2.0);

/// CSV with header "N,makespan,model,ratio".
std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace ts::analysis

#endif  // TREESOLVE_ANALYSIS_HPP
