#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "treesolve/oracle.hpp"
#include "treesolve/problem_io.hpp"

using ts::dense::Matrix;
using ts::io::Generator;
using ts::io::Problem;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("treesolve_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

bool rows_equal(const Problem& a, const Problem& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (ts::dense::max_abs_diff(a.rows[i].lower, b.rows[i].lower) != 0.0) return false;
    if (ts::dense::max_abs_diff(a.rows[i].diag, b.rows[i].diag) != 0.0) return false;
    if (ts::dense::max_abs_diff(a.rows[i].upper, b.rows[i].upper) != 0.0) return false;
    if (ts::dense::max_abs_diff(a.rows[i].rhs, b.rows[i].rhs) != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generator names round trip") {
  for (auto g : {Generator::identity, Generator::tridiag_dd, Generator::spd_banded}) {
    CHECK(ts::io::parse_generator(ts::io::generator_name(g)) == g);
  }
  CHECK_THROWS_AS(ts::io::parse_generator("banana"), ts::InvalidArgument);
}

TEST_CASE("identity generator produces decoupled unit blocks") {
  Problem p = ts::io::generate(Generator::identity, 4, 2, 1, 2, 77);
  for (const auto& row : p.rows) {
    CHECK(ts::dense::max_abs_diff(row.diag, Matrix::identity(2)) == 0.0);
    CHECK(row.lower.is_zero());
    CHECK(row.upper.is_zero());
  }
  // Right-hand sides are random, not all equal.
  CHECK(ts::dense::max_abs_diff(p.rows[0].rhs, p.rows[1].rhs) > 0.0);
}

TEST_CASE("tridiag-dd dominance and bandwidth") {
  const std::size_t m = 4, b = 2;
  Problem p = ts::io::generate(Generator::tridiag_dd, 8, m, 1, b, 123);
  ts::oracle::GlobalSystem g = ts::oracle::assemble_global(p.rows, p.shape);
  const std::size_t n = g.a.rows();
  for (std::size_t r = 0; r < n; ++r) {
    double off = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (c != r) off += std::abs(g.a(r, c));
      if ((c > r ? c - r : r - c) > b) CHECK(g.a(r, c) == 0.0);
    }
    CHECK(std::abs(g.a(r, r)) >= 2.0 * off);
  }
}

TEST_CASE("spd-banded is symmetric positive definite within the band") {
  const std::size_t m = 3, b = 3;
  Problem p = ts::io::generate(Generator::spd_banded, 8, m, 1, b, 5);
  ts::oracle::GlobalSystem g = ts::oracle::assemble_global(p.rows, p.shape);
  const std::size_t n = g.a.rows();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      CHECK(g.a(r, c) == g.a(c, r));
      if ((c > r ? c - r : r - c) > b) CHECK(g.a(r, c) == 0.0);
    }
  }
  // All leading minors positive: an unpivoted Cholesky-style sweep goes
  // through with positive diagonal entries.
  Matrix a = g.a;
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(a(k, k) > 0.0);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  Problem a = ts::io::generate(Generator::tridiag_dd, 8, 3, 2, 3, 999);
  Problem b = ts::io::generate(Generator::tridiag_dd, 8, 3, 2, 3, 999);
  Problem c = ts::io::generate(Generator::tridiag_dd, 8, 3, 2, 3, 1000);
  CHECK(rows_equal(a, b));
  CHECK_FALSE(rows_equal(a, c));
}

TEST_CASE("generate rejects invalid shapes") {
  CHECK_THROWS_AS(ts::io::generate(Generator::identity, 3, 2, 1, 2, 0),
                  ts::InvalidShape);
  CHECK_THROWS_AS(ts::io::generate(Generator::identity, 4, 2, 1, 3, 0),
                  ts::InvalidShape);
}

TEST_CASE("problem files round trip byte-identically") {
  TempDir dir;
  Problem p = ts::io::generate(Generator::spd_banded, 8, 3, 2, 2, 31);
  const std::string path_a = dir.file("a.tsp");
  const std::string path_b = dir.file("b.tsp");
  ts::io::write_problem(p, path_a);
  Problem back = ts::io::read_problem(path_a);
  CHECK(back.shape.leaves == p.shape.leaves);
  CHECK(back.shape.bandwidth == p.shape.bandwidth);
  CHECK(back.generator == p.generator);
  CHECK(back.seed == p.seed);
  CHECK(rows_equal(p, back));
  ts::io::write_problem(back, path_b);
  CHECK(slurp(path_a) == slurp(path_b));
}

TEST_CASE("problem reader rejects corruption") {
  TempDir dir;
  Problem p = ts::io::generate(Generator::identity, 2, 1, 1, 1, 1);
  const std::string path = dir.file("p.tsp");
  ts::io::write_problem(p, path);

  std::string bytes = slurp(path);
  // Bad magic.
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream out(dir.file("bad_magic.tsp"), std::ios::binary);
    out << bad;
    out.close();
    CHECK_THROWS_AS(ts::io::read_problem(dir.file("bad_magic.tsp")), ts::FormatError);
  }
  // Truncated payload.
  {
    std::ofstream out(dir.file("short.tsp"), std::ios::binary);
    out << bytes.substr(0, bytes.size() - 5);
    out.close();
    CHECK_THROWS_AS(ts::io::read_problem(dir.file("short.tsp")), ts::FormatError);
  }
  // Trailing garbage.
  {
    std::ofstream out(dir.file("long.tsp"), std::ios::binary);
    out << bytes << "zz";
    out.close();
    CHECK_THROWS_AS(ts::io::read_problem(dir.file("long.tsp")), ts::FormatError);
  }
  CHECK_THROWS_AS(ts::io::read_problem(dir.file("missing.tsp")), ts::IOError);
}

TEST_CASE("solution files round trip") {
  TempDir dir;
  ts::io::Solution s;
  s.leaves = 4;
  s.block_size = 2;
  s.rhs_cols = 3;
  s.x = Matrix(8, 3);
  s.x(0, 0) = 1.5;
  s.x(7, 2) = -2.25;
  const std::string path = dir.file("s.tsx");
  ts::io::write_solution(s, path);
  ts::io::Solution back = ts::io::read_solution(path);
  CHECK(back.leaves == 4);
  CHECK(back.block_size == 2);
  CHECK(back.rhs_cols == 3);
  CHECK(ts::dense::max_abs_diff(back.x, s.x) == 0.0);

  ts::io::Solution bad = s;
  bad.x = Matrix(7, 3);
  CHECK_THROWS_AS(ts::io::write_solution(bad, dir.file("bad.tsx")), ts::ShapeMismatch);
}

TEST_CASE("text dump is lossless about values") {
  Problem p = ts::io::generate(Generator::tridiag_dd, 2, 1, 1, 1, 4);
  const std::string text = ts::io::dump_text(p);
  CHECK(text.find("generator=tridiag-dd") != std::string::npos);
  CHECK(text.find("leaf 1") != std::string::npos);
  CHECK(text.find("leaf 2") != std::string::npos);
  // Hexfloat rendering of the first diagonal entry appears verbatim.
  char expect[40];
  std::snprintf(expect, sizeof(expect), "%a", p.rows[0].diag(0, 0));
  CHECK(text.find(expect) != std::string::npos);
}
