#include "treesolve/problem_io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

namespace ts::io {

namespace {

constexpr char kProblemMagic[4] = {'T', 'S', 'P', 'B'};
constexpr char kSolutionMagic[4] = {'T', 'S', 'X', 'B'};
constexpr std::uint32_t kVersion = 1;

struct Rng {
  std::mt19937_64 engine;

  explicit Rng(std::uint64_t seed) : engine(seed) {}

  // Uniform in [0, 1); explicit mapping keeps the stream portable.
  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }
};

// Scalar band test for an entry of an off-diagonal or diagonal block.
// `offset` is the block-column minus the block-row (-1, 0 or +1).
bool in_band(std::size_t r, std::size_t c, int offset, std::size_t block,
             std::size_t bandwidth) {
  const long long gr = static_cast<long long>(r);
  const long long gc = static_cast<long long>(c) +
                       static_cast<long long>(offset) * static_cast<long long>(block);
  const long long dist = gr > gc ? gr - gc : gc - gr;
  return dist <= static_cast<long long>(bandwidth);
}

dense::Matrix random_rhs(Rng& rng, std::size_t rows, std::size_t cols) {
  dense::Matrix y(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) y(i, j) = rng.symmetric();
  return y;
}

std::vector<BlockRow> generate_identity(const topo::ProblemShape& s, Rng& rng) {
  std::vector<BlockRow> rows(s.leaves);
  for (std::size_t i = 0; i < s.leaves; ++i) {
    rows[i].diag = dense::Matrix::identity(s.block_size);
    rows[i].lower = dense::Matrix(s.block_size, s.block_size);
    rows[i].upper = dense::Matrix(s.block_size, s.block_size);
    rows[i].rhs = random_rhs(rng, s.block_size, s.rhs_cols);
    rows[i].solution = dense::Matrix(s.block_size, s.rhs_cols);
  }
  return rows;
}

std::vector<BlockRow> generate_tridiag_dd(const topo::ProblemShape& s, Rng& rng) {
  const std::size_t m = s.block_size;
  std::vector<BlockRow> rows(s.leaves);
  for (std::size_t i = 0; i < s.leaves; ++i) {
    BlockRow& row = rows[i];
    row.lower = dense::Matrix(m, m);
    row.diag = dense::Matrix(m, m);
    row.upper = dense::Matrix(m, m);
    if (i > 0) {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c)
          if (in_band(r, c, -1, m, s.bandwidth)) row.lower(r, c) = rng.symmetric();
    }
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c)
        if (r != c && in_band(r, c, 0, m, s.bandwidth)) row.diag(r, c) = rng.symmetric();
    if (i + 1 < s.leaves) {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c)
          if (in_band(r, c, +1, m, s.bandwidth)) row.upper(r, c) = rng.symmetric();
    }
    // Strict row dominance with factor 2 keeps every pivot healthy.
    for (std::size_t r = 0; r < m; ++r) {
      double off = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        off += std::abs(row.lower(r, c)) + std::abs(row.upper(r, c));
        if (c != r) off += std::abs(row.diag(r, c));
      }
      row.diag(r, r) = 2.0 * off + 1.0;
    }
    row.rhs = random_rhs(rng, m, s.rhs_cols);
    row.solution = dense::Matrix(m, s.rhs_cols);
  }
  return rows;
}

std::vector<BlockRow> generate_spd_banded(const topo::ProblemShape& s, Rng& rng) {
  const std::size_t m = s.block_size;
  const std::size_t n = s.leaves * m;
  const std::size_t h = s.bandwidth;

  // Banded lower-triangular factor with sub-bandwidth h and a dominant
  // positive diagonal; the product L*L^T is then symmetric positive
  // definite with scalar bandwidth h.
  dense::Matrix l(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c0 = r > h ? r - h : 0;
    for (std::size_t c = c0; c < r; ++c) l(r, c) = 0.5 * rng.symmetric();
    l(r, r) = 1.0 + rng.uniform();
  }
  dense::Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i > h ? i - h : 0;
    const std::size_t j1 = std::min(n - 1, i + h);
    for (std::size_t j = j0; j <= j1; ++j) {
      double acc = 0.0;
      const std::size_t kmax = std::min(i, j);
      const std::size_t kmin = std::max(i > h ? i - h : 0, j > h ? j - h : 0);
      for (std::size_t k = kmin; k <= kmax; ++k) acc += l(i, k) * l(j, k);
      a(i, j) = acc;
    }
  }

  std::vector<BlockRow> rows(s.leaves);
  for (std::size_t i = 0; i < s.leaves; ++i) {
    BlockRow& row = rows[i];
    row.diag = a.block(i * m, i * m, m, m);
    row.lower = i > 0 ? a.block(i * m, (i - 1) * m, m, m) : dense::Matrix(m, m);
    row.upper = i + 1 < s.leaves ? a.block(i * m, (i + 1) * m, m, m)
                                 : dense::Matrix(m, m);
    row.rhs = random_rhs(rng, m, s.rhs_cols);
    row.solution = dense::Matrix(m, s.rhs_cols);
  }
  return rows;
}

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void write_u32(std::ofstream& out, std::uint32_t v) { write_bytes(out, &v, 4); }
void write_u64(std::ofstream& out, std::uint64_t v) { write_bytes(out, &v, 8); }

void write_matrix(std::ofstream& out, const dense::Matrix& m) {
  write_bytes(out, m.data().data(), m.size() * sizeof(double));
}

void read_bytes(std::ifstream& in, void* data, std::size_t size, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!in) throw FormatError(std::string("truncated file while reading ") + what);
}

std::uint32_t read_u32(std::ifstream& in, const char* what) {
  std::uint32_t v = 0;
  read_bytes(in, &v, 4, what);
  return v;
}

std::uint64_t read_u64(std::ifstream& in, const char* what) {
  std::uint64_t v = 0;
  read_bytes(in, &v, 8, what);
  return v;
}

dense::Matrix read_matrix(std::ifstream& in, std::size_t rows, std::size_t cols,
                          const char* what) {
  std::vector<double> entries(rows * cols);
  read_bytes(in, entries.data(), entries.size() * sizeof(double), what);
  try {
    return dense::Matrix(rows, cols, std::move(entries));
  } catch (const Error& e) {
    throw FormatError(std::string("invalid entries for ") + what + ": " + e.what());
  }
}

void append_matrix_text(std::string& out, const char* label, const dense::Matrix& m) {
  out += label;
  out += "\n";
  char buf[40];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%s%a", c ? " " : "  ", m(r, c));
      out += buf;
    }
    out += "\n";
  }
}

}  // namespace

Generator parse_generator(const std::string& name) {
  if (name == "identity") return Generator::identity;
  if (name == "tridiag-dd") return Generator::tridiag_dd;
  if (name == "spd-banded") return Generator::spd_banded;
  throw InvalidArgument("unknown generator '" + name + "'");
}

std::string generator_name(Generator g) {
  switch (g) {
    case Generator::identity: return "identity";
    case Generator::tridiag_dd: return "tridiag-dd";
    case Generator::spd_banded: return "spd-banded";
  }
  throw InvalidArgument("unknown generator value");
}

Problem generate(Generator g, std::size_t leaves, std::size_t block_size,
                 std::size_t rhs_cols, std::size_t bandwidth, std::uint64_t seed) {
  Problem p;
  p.shape = topo::ProblemShape::create(leaves, block_size, rhs_cols, bandwidth);
  p.generator = g;
  p.seed = seed;
  Rng rng(seed);
  switch (g) {
    case Generator::identity: p.rows = generate_identity(p.shape, rng); break;
    case Generator::tridiag_dd: p.rows = generate_tridiag_dd(p.shape, rng); break;
    case Generator::spd_banded: p.rows = generate_spd_banded(p.shape, rng); break;
  }
  return p;
}

void write_problem(const Problem& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot open '" + path + "' for writing");
  write_bytes(out, kProblemMagic, 4);
  write_u32(out, kVersion);
  write_u64(out, p.shape.leaves);
  write_u64(out, p.shape.block_size);
  write_u64(out, p.shape.rhs_cols);
  write_u64(out, p.shape.bandwidth);
  write_u64(out, p.seed);
  std::array<char, 16> gen{};
  const std::string name = generator_name(p.generator);
  std::memcpy(gen.data(), name.data(), std::min<std::size_t>(name.size(), 15));
  write_bytes(out, gen.data(), gen.size());
  for (const BlockRow& row : p.rows) {
    write_matrix(out, row.lower);
    write_matrix(out, row.diag);
    write_matrix(out, row.upper);
    write_matrix(out, row.rhs);
  }
  out.flush();
  if (!out) throw IOError("failed writing '" + path + "'");
}

Problem read_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open '" + path + "' for reading");
  char magic[4];
  read_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, kProblemMagic, 4) != 0) {
    throw FormatError("'" + path + "' is not a problem file (bad magic)");
  }
  const std::uint32_t version = read_u32(in, "version");
  if (version != kVersion) {
    throw FormatError("unsupported problem file version " + std::to_string(version));
  }
  const std::uint64_t leaves = read_u64(in, "leaf count");
  const std::uint64_t block = read_u64(in, "block size");
  const std::uint64_t rhs_cols = read_u64(in, "rhs column count");
  const std::uint64_t bandwidth = read_u64(in, "bandwidth");
  const std::uint64_t seed = read_u64(in, "seed");
  std::array<char, 16> gen{};
  read_bytes(in, gen.data(), gen.size(), "generator name");
  gen.back() = '\0';

  Problem p;
  try {
    p.shape = topo::ProblemShape::create(leaves, block, rhs_cols, bandwidth);
    p.generator = parse_generator(gen.data());
  } catch (const Error& e) {
    throw FormatError("invalid problem header: " + std::string(e.what()));
  }
  p.seed = seed;
  p.rows.resize(p.shape.leaves);
  for (std::size_t i = 0; i < p.shape.leaves; ++i) {
    BlockRow& row = p.rows[i];
    row.lower = read_matrix(in, block, block, "lower coupling");
    row.diag = read_matrix(in, block, block, "diagonal block");
    row.upper = read_matrix(in, block, block, "upper coupling");
    row.rhs = read_matrix(in, block, rhs_cols, "right-hand side");
    row.solution = dense::Matrix(block, rhs_cols);
  }
  char extra = 0;
  if (in.read(&extra, 1)) throw FormatError("trailing bytes after last block row");
  if (!p.rows.front().lower.is_zero()) {
    throw FormatError("first block row has a nonzero lower coupling");
  }
  if (!p.rows.back().upper.is_zero()) {
    throw FormatError("last block row has a nonzero upper coupling");
  }
  return p;
}

std::string dump_text(const Problem& p) {
  std::string out;
  out += "problem leaves=" + std::to_string(p.shape.leaves) +
         " block_size=" + std::to_string(p.shape.block_size) +
         " rhs_cols=" + std::to_string(p.shape.rhs_cols) +
         " bandwidth=" + std::to_string(p.shape.bandwidth) +
         " generator=" + generator_name(p.generator) +
         " seed=" + std::to_string(p.seed) + "\n";
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    out += "leaf " + std::to_string(i + 1) + "\n";
    append_matrix_text(out, "lower", p.rows[i].lower);
    append_matrix_text(out, "diag", p.rows[i].diag);
    append_matrix_text(out, "upper", p.rows[i].upper);
    append_matrix_text(out, "rhs", p.rows[i].rhs);
  }
  return out;
}

void write_solution(const Solution& s, const std::string& path) {
  if (s.x.rows() != s.leaves * s.block_size || s.x.cols() != s.rhs_cols) {
    throw ShapeMismatch("solution matrix does not match its header");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot open '" + path + "' for writing");
  write_bytes(out, kSolutionMagic, 4);
  write_u32(out, kVersion);
  write_u64(out, s.leaves);
  write_u64(out, s.block_size);
  write_u64(out, s.rhs_cols);
  write_matrix(out, s.x);
  out.flush();
  if (!out) throw IOError("failed writing '" + path + "'");
}

Solution read_solution(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open '" + path + "' for reading");
  char magic[4];
  read_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, kSolutionMagic, 4) != 0) {
    throw FormatError("'" + path + "' is not a solution file (bad magic)");
  }
  const std::uint32_t version = read_u32(in, "version");
  if (version != kVersion) {
    throw FormatError("unsupported solution file version " + std::to_string(version));
  }
  Solution s;
  s.leaves = read_u64(in, "leaf count");
  s.block_size = read_u64(in, "block size");
  s.rhs_cols = read_u64(in, "rhs column count");
  if (s.leaves == 0 || s.block_size == 0 || s.rhs_cols == 0) {
    throw FormatError("invalid solution header");
  }
  s.x = read_matrix(in, s.leaves * s.block_size, s.rhs_cols, "solution values");
  char extra = 0;
  if (in.read(&extra, 1)) throw FormatError("trailing bytes after solution values");
  return s;
}

}  // namespace ts::io
