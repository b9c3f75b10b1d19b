#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace soficlen {

struct Triplet {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::int64_t value = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Sparse integer matrix in normalized coordinate form: triplets sorted
/// row-major, duplicates summed, zeros dropped. Entries are integers; a
/// matrix destined for GF(p) simply holds residues.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);
  /// Throws std::out_of_range for out-of-range indices and
  /// std::overflow_error if summing duplicates overflows.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Triplet>& triplets() const { return entries_; }

  SparseMatrix transposed() const;
  /// [[a, 0], [0, b]].
  static SparseMatrix block_diagonal(const SparseMatrix& a, const SparseMatrix& b);
  /// a stacked over b; column counts must agree.
  static SparseMatrix vstack(const SparseMatrix& a, const SparseMatrix& b);
  /// Exact integer product; throws std::overflow_error on overflow.
  static SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

  /// `%%MatrixMarket matrix coordinate integer general`, 1-based.
  void write_matrix_market(std::ostream& out) const;
  static SparseMatrix read_matrix_market(std::istream& in);

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Triplet> entries_;
};

/// The field a rank is taken over.
struct Field {
  enum class Kind { Rationals, Prime };
  Kind kind = Kind::Rationals;
  std::uint64_t p = 0;

  static Field rationals() { return {}; }
  static Field prime(std::uint64_t p) { return {Kind::Prime, p}; }
  bool is_prime() const { return kind == Kind::Prime; }
  std::string name() const;

  friend bool operator==(const Field&, const Field&) = default;
};

struct RankResult {
  std::size_t rank = 0;
  Field field;
  /// Primes used (one entry for rank_mod_p), with the rank found modulo each.
  std::vector<std::uint64_t> primes;
  std::vector<std::size_t> prime_ranks;
  /// Over Q: the two largest modular ranks agree (or the dense exact route
  /// was used). Always true for rank_mod_p.
  bool certified = true;
  std::string method;
};

/// Exact rank over GF(p) by sparse Gaussian elimination with Markowitz
/// pivot selection. p must be a prime below 2^62.
RankResult rank_mod_p(const SparseMatrix& m, std::uint64_t p);

struct RationalRankOptions {
  std::uint64_t prime_seed = 0x50f1c1e4;
  std::size_t min_primes = 3;
  std::size_t max_primes = 12;
  bool parallel = false;
  /// Use exact dense rational elimination when both dimensions are <= 64.
  bool exact_small = true;
};

/// Rank over Q as the maximum of ranks modulo random 31-bit primes,
/// sampling further primes until the two largest agree.
RankResult rank_over_Q(const SparseMatrix& m, const RationalRankOptions& options = {});

/// Dispatches to rank_mod_p or rank_over_Q.
RankResult rank(const SparseMatrix& m, const Field& field, const RationalRankOptions& options = {});

/// cols - rank.
std::size_t kernel_dim(const SparseMatrix& m, const Field& field, const RationalRankOptions& options = {});

/// Exact rank over Q by dense GMP rational elimination.
std::size_t dense_rank_rational(const SparseMatrix& m);

/// Distinct primes in (2^30, 2^31), deterministic in (seed, index).
std::vector<std::uint64_t> sample_primes(std::uint64_t seed, std::size_t count);

}  // namespace soficlen
