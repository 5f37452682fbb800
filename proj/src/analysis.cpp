#include "treesolve/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace ts::analysis {

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw InvalidArgument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

double predicted_time(std::size_t leaves, std::size_t block_size,
                      std::size_t rhs_cols, const sim::CostModel& cost) {
  if (leaves < 2 || !std::has_single_bit(leaves)) {
    throw InvalidShape("leaf count must be a power of two >= 2");
  }
  cost.validate();
  const double d = static_cast<double>(std::countr_zero(leaves));
  const double m = static_cast<double>(block_size);
  const double k = static_cast<double>(rhs_cols);
  const double payload = m * (m * d + k);
  return d * (cost.latency + cost.per_element * payload + cost.flop * m * payload);
}

double latency_lower_bound(std::size_t leaves, int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw InvalidDimension("spatial dimension must be 1, 2 or 3");
  }
  return std::pow(static_cast<double>(leaves), 1.0 / dimension);
}

NodeExponents optimal_node_exponent(int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw InvalidDimension("spatial dimension must be 1, 2 or 3");
  }
  // Balancing N^(1-p) against N^(p/s): 1 - p = p/s.
  return NodeExponents{Rational(dimension, dimension + 1), Rational(1, dimension + 1)};
}

ScalingReport scaling_check(std::vector<ScalingSample> samples, double band) {
  if (samples.size() < 3) {
    throw InsufficientSamples("scaling check needs at least 3 samples, got " +
                              std::to_string(samples.size()));
  }
  if (band < 1.0) throw InvalidArgument("band factor must be >= 1");
  std::sort(samples.begin(), samples.end(),
            [](const ScalingSample& a, const ScalingSample& b) {
              return a.leaves < b.leaves;
            });
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].leaves == samples[i - 1].leaves) {
      throw InvalidArgument("samples must have distinct leaf counts");
    }
  }

  ScalingReport report;
  report.band = band;
  for (const ScalingSample& s : samples) {
    if (!(s.model > 0.0) || !std::isfinite(s.makespan) || s.makespan < 0.0) {
      throw InvalidArgument("samples must have positive model values and finite makespans");
    }
    report.rows.push_back(ScalingRow{s.leaves, s.makespan, s.model,
                                     s.makespan / s.model});
  }
  report.min_ratio = report.rows.front().ratio;
  report.max_ratio = report.rows.front().ratio;
  for (const ScalingRow& r : report.rows) {
    report.min_ratio = std::min(report.min_ratio, r.ratio);
    report.max_ratio = std::max(report.max_ratio, r.ratio);
  }
  report.within_band =
      report.min_ratio > 0.0 && report.max_ratio <= band * report.min_ratio;
  return report;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::string out = "N,makespan,model,ratio\n";
  char line[160];
  for (const ScalingRow& r : rows) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g\n", r.leaves,
                  r.makespan, r.model, r.ratio);
    out += line;
  }
  return out;
}

}  // namespace ts::analysis
