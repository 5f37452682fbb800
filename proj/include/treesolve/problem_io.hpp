#ifndef TREESOLVE_PROBLEM_IO_HPP
#define TREESOLVE_PROBLEM_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "treesolve/block_row.hpp"
#include "treesolve/topology.hpp"

// Problem instances and their on-disk formats.
//
// Problem container (little-endian):
//   magic "TSPB", u32 version,
//   u64 leaves, block_size, rhs_cols, bandwidth, seed,
//   char[16] generator name (NUL padded),
//   then per leaf: lower, diag, upper (m*m f64 each) and rhs (m*k f64),
//   all row-major.
//
// Solution container:
//   magic "TSXB", u32 version, u64 leaves, block_size, rhs_cols,
//   then (leaves*block_size) x rhs_cols f64 row-major.
//
// Generation is deterministic for a given seed: random draws come from a
// seeded mt19937_64 mapped to doubles explicitly, so regenerating yields
// byte-identical files on any platform.
namespace ts::io {

enum class Generator { identity, tridiag_dd, spd_banded };

Generator parse_generator(const std::string& name);
std::string generator_name(Generator g);

struct Problem {
  topo::ProblemShape shape;
  Generator generator = Generator::identity;
  std::uint64_t seed = 0;
  std::vector<BlockRow> rows;
};

/// Deterministically generates a problem instance.
///  - identity:    diagonal blocks I, no coupling, random right-hand side
///  - tridiag-dd:  random banded blocks with every row strictly
///                 diagonally dominant (dominance factor >= 2)
///  - spd-banded:  symmetric positive definite via a banded L*L^T product
/// Bandwidth limits the scalar band of the assembled matrix and must not
/// exceed the block size.
Problem generate(Generator g, std::size_t leaves, std::size_t block_size,
                 std::size_t rhs_cols, std::size_t bandwidth, std::uint64_t seed);

void write_problem(const Problem& p, const std::string& path);
Problem read_problem(const std::string& path);

/// Lossless text rendering (hexfloat entries) for debugging.
std::string dump_text(const Problem& p);

struct Solution {
  std::size_t leaves = 0;
  std::size_t block_size = 0;
  std::size_t rhs_cols = 0;
  dense::Matrix x;
};

void write_solution(const Solution& s, const std::string& path);
Solution read_solution(const std::string& path);

}  // namespace ts::io

#endif  // TREESOLVE_PROBLEM_IO_HPP
