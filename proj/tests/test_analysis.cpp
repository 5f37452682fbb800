#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "treesolve/analysis.hpp"

using ts::analysis::Rational;
using ts::sim::CostModel;

TEST_CASE("rationals normalize") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-1, -2) == Rational(1, 2));
  CHECK(Rational(1, -2).num == -1);
  CHECK(Rational(1, -2).den == 2);
  CHECK_THROWS_AS(Rational(1, 0), ts::InvalidArgument);
}

TEST_CASE("predicted_time validates and grows monotonically") {
  CostModel unit{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(ts::analysis::predicted_time(3, 1, 1, unit), ts::InvalidShape);
  CHECK_THROWS_AS(ts::analysis::predicted_time(1, 1, 1, unit), ts::InvalidShape);

  double prev = 0.0;
  for (std::size_t n : {2u, 4u, 8u, 16u, 64u, 256u}) {
    const double t = ts::analysis::predicted_time(n, 2, 1, unit);
    CHECK(t > prev);
    prev = t;
  }
  CHECK(ts::analysis::predicted_time(64, 2, 1, unit) <
        ts::analysis::predicted_time(64, 3, 1, unit));
  CHECK(ts::analysis::predicted_time(64, 2, 1, unit) <
        ts::analysis::predicted_time(64, 2, 2, unit));
  CostModel latency{10.0, 1.0, 1.0};
  CHECK(ts::analysis::predicted_time(64, 2, 1, unit) <
        ts::analysis::predicted_time(64, 2, 1, latency));
}

TEST_CASE("dominant term doubles like the square of the round count") {
  // With zero latency and no right-hand-side columns contributing, the
  // model is proportional to log2(N)^2 at fixed block size.
  CostModel cost{0.0, 0.0, 1.0};  // pure compute weight isolates m^2*(m*d)
  for (std::size_t n : {8u, 16u, 64u, 1024u}) {
    const double d = std::log2(static_cast<double>(n));
    // Compare the k-free part of the model across a doubling.
    auto k_free = [&](std::size_t leaves) {
      const double with_k = ts::analysis::predicted_time(leaves, 4, 1, cost);
      // Strip the k contribution: model = d*(flop*m^2*(m*d+k)).
      const double dd = std::log2(static_cast<double>(leaves));
      return with_k - dd * 16.0 * 1.0;
    };
    const double ratio = k_free(2 * n) / k_free(n);
    const double expect = ((d + 1.0) * (d + 1.0)) / (d * d);
    CHECK(ratio == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("latency term scales as the machine's packing radius") {
  // Isolate the latency contribution and check its log-log slope is 1/3
  // when the latency follows the three-dimensional packing bound.
  CostModel unit{0.0, 1.0, 1.0};
  double prev_value = 0.0, prev_n = 0.0;
  for (std::size_t e = 6; e <= 20; e += 2) {
    const std::size_t n = std::size_t{1} << e;
    CostModel with_latency{ts::analysis::latency_lower_bound(n, 3), 1.0, 1.0};
    const double d = std::log2(static_cast<double>(n));
    const double factor = (ts::analysis::predicted_time(n, 1, 1, with_latency) -
                           ts::analysis::predicted_time(n, 1, 1, unit)) /
                          d;
    if (prev_n > 0.0) {
      const double slope = (std::log(factor) - std::log(prev_value)) /
                           (std::log(static_cast<double>(n)) - std::log(prev_n));
      CHECK(std::abs(slope - 1.0 / 3.0) <= 0.05);
    }
    prev_value = factor;
    prev_n = static_cast<double>(n);
  }
}

TEST_CASE("latency lower bound by embedding dimension") {
  CHECK(ts::analysis::latency_lower_bound(64, 1) == doctest::Approx(64.0));
  CHECK(ts::analysis::latency_lower_bound(64, 2) == doctest::Approx(8.0));
  CHECK(ts::analysis::latency_lower_bound(64, 3) == doctest::Approx(4.0));
  CHECK(ts::analysis::latency_lower_bound(1000, 3) == doctest::Approx(10.0));
  CHECK_THROWS_AS(ts::analysis::latency_lower_bound(64, 0), ts::InvalidDimension);
  CHECK_THROWS_AS(ts::analysis::latency_lower_bound(64, 4), ts::InvalidDimension);
}

TEST_CASE("optimal node exponents reproduce the closed-form table") {
  auto e1 = ts::analysis::optimal_node_exponent(1);
  CHECK(e1.node_count == Rational(1, 2));
  CHECK(e1.time == Rational(1, 2));
  auto e2 = ts::analysis::optimal_node_exponent(2);
  CHECK(e2.node_count == Rational(2, 3));
  CHECK(e2.time == Rational(1, 3));
  auto e3 = ts::analysis::optimal_node_exponent(3);
  CHECK(e3.node_count == Rational(3, 4));
  CHECK(e3.time == Rational(1, 4));
  CHECK_THROWS_AS(ts::analysis::optimal_node_exponent(0), ts::InvalidDimension);
}

TEST_CASE("the balancing identity holds exactly") {
  for (int s = 1; s <= 3; ++s) {
    auto e = ts::analysis::optimal_node_exponent(s);
    // 1 - p == p / s as exact rationals.
    const Rational lhs(e.node_count.den - e.node_count.num, e.node_count.den);
    const Rational rhs(e.node_count.num, e.node_count.den * s);
    CHECK(lhs == rhs);
    CHECK(lhs == e.time);
  }
}

TEST_CASE("scaling_check flags and passes bands") {
  // Equal makespans against a constant model: every ratio is 1.
  std::vector<ts::analysis::ScalingSample> flat{
      {8, 5.0, 5.0}, {16, 5.0, 5.0}, {32, 5.0, 5.0}};
  auto report = ts::analysis::scaling_check(flat, 2.0);
  CHECK(report.within_band);
  for (const auto& row : report.rows) CHECK(row.ratio == doctest::Approx(1.0));

  std::vector<ts::analysis::ScalingSample> skewed{
      {8, 1.0, 1.0}, {16, 1.0, 1.0}, {32, 3.0, 1.0}};
  CHECK_FALSE(ts::analysis::scaling_check(skewed, 2.0).within_band);

  std::vector<ts::analysis::ScalingSample> few{{8, 1.0, 1.0}, {16, 1.0, 1.0}};
  CHECK_THROWS_AS(ts::analysis::scaling_check(few, 2.0), ts::InsufficientSamples);

  std::vector<ts::analysis::ScalingSample> dup{
      {8, 1.0, 1.0}, {8, 1.0, 1.0}, {32, 1.0, 1.0}};
  CHECK_THROWS_AS(ts::analysis::scaling_check(dup, 2.0), ts::InvalidArgument);
}

TEST_CASE("scaling rows serialize to CSV") {
  std::vector<ts::analysis::ScalingRow> rows{{8, 10.0, 5.0, 2.0}};
  const std::string csv = ts::analysis::scaling_csv(rows);
  CHECK(csv.find("N,makespan,model,ratio\n") == 0);
  CHECK(csv.find("8,10,5,2\n") != std::string::npos);
}
