#include "soficlen/exactla.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <future>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "soficlen/modular.hpp"
#include "soficlen/rng.hpp"

namespace soficlen {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("sparse matrix entry overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("sparse matrix entry overflow");
  return r;
}

}  // namespace

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  if (rows > UINT32_MAX || cols > UINT32_MAX) throw std::length_error("sparse matrix dimension exceeds 2^32");
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  SparseMatrix m(rows, cols);
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw std::out_of_range("triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  m.entries_.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (!m.entries_.empty() && m.entries_.back().row == t.row && m.entries_.back().col == t.col) {
      m.entries_.back().value = checked_add(m.entries_.back().value, t.value);
    } else {
      m.entries_.push_back(t);
    }
  }
  std::erase_if(m.entries_, [](const Triplet& t) { return t.value == 0; });
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1});
  return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(entries_.size());
  for (const auto& e : entries_) t.push_back({e.col, e.row, e.value});
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::block_diagonal(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t = a.entries_;
  for (const auto& e : b.entries_) {
    t.push_back({static_cast<std::uint32_t>(e.row + a.rows_), static_cast<std::uint32_t>(e.col + a.cols_), e.value});
  }
  return from_triplets(a.rows_ + b.rows_, a.cols_ + b.cols_, std::move(t));
}

SparseMatrix SparseMatrix::vstack(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols_ != b.cols_) throw std::invalid_argument("vstack: column counts differ");
  std::vector<Triplet> t = a.entries_;
  for (const auto& e : b.entries_) t.push_back({static_cast<std::uint32_t>(e.row + a.rows_), e.col, e.value});
  return from_triplets(a.rows_ + b.rows_, a.cols_, std::move(t));
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("multiply: inner dimensions differ");
  // Row offsets of b.
  std::vector<std::size_t> start(b.rows_ + 1, 0);
  for (const auto& e : b.entries_) ++start[e.row + 1];
  for (std::size_t i = 0; i < b.rows_; ++i) start[i + 1] += start[i];
  std::vector<Triplet> t;
  for (const auto& e : a.entries_) {
    for (std::size_t k = start[e.col]; k < start[e.col + 1]; ++k) {
      const auto& f = b.entries_[k];
      t.push_back({e.row, f.col, checked_mul(e.value, f.value)});
    }
  }
  return from_triplets(a.rows_, b.cols_, std::move(t));
}

void SparseMatrix::write_matrix_market(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate integer general\n";
  out << rows_ << ' ' << cols_ << ' ' << entries_.size() << '\n';
  for (const auto& e : entries_) out << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << '\n';
}

SparseMatrix SparseMatrix::read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket matrix coordinate integer general", 0) != 0) {
    throw std::invalid_argument("expected '%%MatrixMarket matrix coordinate integer general' header");
  }
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream size_line(line);
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (!(size_line >> rows >> cols >> nnz)) throw std::invalid_argument("matrix market: bad size line");
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t i = 0, j = 0;
    std::int64_t v = 0;
    if (!(in >> i >> j >> v) || i == 0 || j == 0) {
      throw std::invalid_argument("matrix market: bad entry " + std::to_string(k + 1));
    }
    t.push_back({static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1), v});
  }
  return from_triplets(rows, cols, std::move(t));
}

std::string Field::name() const { return kind == Kind::Rationals ? "Q" : "GF(" + std::to_string(p) + ")"; }

namespace {

/// Sparse Gaussian elimination over GF(p). Rows are sorted (col, value)
/// lists; columns keep (possibly stale) lists of the rows touching them.
/// Pivots minimize the Markowitz cost (r-1)(c-1), searching count levels in
/// increasing order, ties by lowest column then row index.
class ModularEliminator {
 public:
  struct Entry {
    std::uint32_t col;
    std::uint64_t val;
  };
  using Row = std::vector<Entry>;

  ModularEliminator(const SparseMatrix& m, std::uint64_t p)
      : p_(p), rows_(m.rows()), col_rows_(m.cols()), col_count_(m.cols(), 0), col_key_(m.cols(), 0),
        row_active_(m.rows(), 1), col_active_(m.cols(), 1) {
    for (const auto& t : m.triplets()) {
      const auto v = modular::reduce(t.value, p_);
      if (v == 0) continue;
      rows_[t.row].push_back({t.col, v});
    }
    for (std::uint32_t r = 0; r < rows_.size(); ++r) {
      for (const auto& e : rows_[r]) {
        col_rows_[e.col].push_back(r);
        ++col_count_[e.col];
      }
      if (!rows_[r].empty()) row_queue_.insert({static_cast<std::uint32_t>(rows_[r].size()), r});
    }
    for (std::uint32_t c = 0; c < col_count_.size(); ++c) {
      col_key_[c] = col_count_[c];
      if (col_count_[c] > 0) col_queue_.insert({col_count_[c], c});
    }
  }

  std::size_t run() {
    std::size_t rank = 0;
    while (!col_queue_.empty()) {
      const auto [r, c] = select_pivot();
      eliminate(r, c);
      ++rank;
    }
    return rank;
  }

 private:
  static constexpr std::size_t kSearchWidth = 4;
  static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();

  struct Candidate {
    std::uint64_t cost = kInf;
    std::uint32_t col = 0;
    std::uint32_t row = 0;
    bool better_than(const Candidate& o) const {
      if (cost != o.cost) return cost < o.cost;
      if (col != o.col) return col < o.col;
      return row < o.row;
    }
  };

  const Entry* find(std::uint32_t r, std::uint32_t c) const {
    const auto& row = rows_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c, [](const Entry& e, std::uint32_t x) { return e.col < x; });
    return (it != row.end() && it->col == c) ? &*it : nullptr;
  }

  /// Drops stale row references from a column list.
  void clean_column(std::uint32_t c) {
    auto& list = col_rows_[c];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    std::erase_if(list, [&](std::uint32_t r) { return !row_active_[r] || find(r, c) == nullptr; });
  }

  std::pair<std::uint32_t, std::uint32_t> select_pivot() {
    Candidate best;
    std::uint32_t level = std::min(col_queue_.begin()->first,
                                   row_queue_.empty() ? UINT32_MAX : row_queue_.begin()->first);
    while (true) {
      std::size_t seen = 0;
      for (auto it = col_queue_.lower_bound({level, 0}); it != col_queue_.end() && it->first == level &&
                                                          seen < kSearchWidth;
           ++it, ++seen) {
        const auto c = it->second;
        clean_column(c);
        for (auto r : col_rows_[c]) {
          const Candidate cand{static_cast<std::uint64_t>(rows_[r].size() - 1) * (level - 1), c, r};
          if (cand.better_than(best)) best = cand;
        }
      }
      seen = 0;
      for (auto it = row_queue_.lower_bound({level, 0}); it != row_queue_.end() && it->first == level &&
                                                         seen < kSearchWidth;
           ++it, ++seen) {
        const auto r = it->second;
        for (const auto& e : rows_[r]) {
          const Candidate cand{static_cast<std::uint64_t>(level - 1) * (col_count_[e.col] - 1), e.col, r};
          if (cand.better_than(best)) best = cand;
        }
      }
      // Anything unexamined has both counts above `level`.
      if (best.cost != kInf && best.cost <= static_cast<std::uint64_t>(level) * level) break;
      const auto next_col = col_queue_.upper_bound({level, UINT32_MAX});
      const auto next_row = row_queue_.upper_bound({level, UINT32_MAX});
      std::uint32_t next = UINT32_MAX;
      if (next_col != col_queue_.end()) next = std::min(next, next_col->first);
      if (next_row != row_queue_.end()) next = std::min(next, next_row->first);
      if (next == UINT32_MAX) break;
      level = next;
    }
    return {best.row, best.col};
  }

  void touch_col(std::uint32_t c) {
    if (!touched_flag_.empty() && !touched_flag_[c]) {
      touched_flag_[c] = 1;
      touched_.push_back(c);
    }
  }

  void rekey_row(std::uint32_t r, std::size_t old_size) {
    if (old_size > 0) row_queue_.erase({static_cast<std::uint32_t>(old_size), r});
    if (row_active_[r] && !rows_[r].empty()) row_queue_.insert({static_cast<std::uint32_t>(rows_[r].size()), r});
  }

  void eliminate(std::uint32_t r, std::uint32_t c) {
    if (touched_flag_.empty()) touched_flag_.assign(col_count_.size(), 0);
    const Row pivot_row = rows_[r];
    const auto inv = modular::inv(find(r, c)->val, p_);
    clean_column(c);
    const std::vector<std::uint32_t> targets = col_rows_[c];
    for (auto i : targets) {
      if (i == r) continue;
      const auto factor = modular::mul(find(i, c)->val, inv, p_);
      const auto old_size = rows_[i].size();
      axpy(i, factor, pivot_row);
      rekey_row(i, old_size);
    }
    // Retire the pivot row and column.
    row_active_[r] = 0;
    rekey_row(r, pivot_row.size());
    for (const auto& e : pivot_row) {
      --col_count_[e.col];
      touch_col(e.col);
    }
    rows_[r].clear();
    rows_[r].shrink_to_fit();
    col_active_[c] = 0;
    col_rows_[c].clear();
    col_rows_[c].shrink_to_fit();
    for (auto j : touched_) {
      touched_flag_[j] = 0;
      if (col_key_[j] > 0) col_queue_.erase({col_key_[j], j});
      col_key_[j] = col_active_[j] ? col_count_[j] : 0;
      if (col_key_[j] > 0) col_queue_.insert({col_key_[j], j});
    }
    touched_.clear();
  }

  /// rows_[i] -= factor * pivot, tracking fill and cancellation.
  void axpy(std::uint32_t i, std::uint64_t factor, const Row& pivot) {
    const Row& row = rows_[i];
    scratch_.clear();
    scratch_.reserve(row.size() + pivot.size());
    std::size_t a = 0, b = 0;
    while (a < row.size() || b < pivot.size()) {
      if (b == pivot.size() || (a < row.size() && row[a].col < pivot[b].col)) {
        scratch_.push_back(row[a++]);
      } else if (a == row.size() || pivot[b].col < row[a].col) {
        const auto v = p_ - modular::mul(factor, pivot[b].val, p_);
        const auto col = pivot[b++].col;
        // v is never p here: pivot entries are nonzero and factor is nonzero.
        scratch_.push_back({col, v});
        ++col_count_[col];
        col_rows_[col].push_back(i);
        touch_col(col);
      } else {
        const auto sub = modular::mul(factor, pivot[b].val, p_);
        const auto v = row[a].val >= sub ? row[a].val - sub : row[a].val + (p_ - sub);
        const auto col = row[a].col;
        ++a;
        ++b;
        if (v != 0) {
          scratch_.push_back({col, v});
        } else {
          --col_count_[col];
          touch_col(col);
        }
      }
    }
    rows_[i].swap(scratch_);
  }

  std::uint64_t p_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::uint32_t>> col_rows_;
  std::vector<std::uint32_t> col_count_;
  std::vector<std::uint32_t> col_key_;
  std::vector<char> row_active_, col_active_;
  std::set<std::pair<std::uint32_t, std::uint32_t>> col_queue_, row_queue_;
  std::vector<std::uint32_t> touched_;
  std::vector<char> touched_flag_;
  Row scratch_;
};

}  // namespace

RankResult rank_mod_p(const SparseMatrix& m, std::uint64_t p) {
  if (p >= (1ULL << 62) || !modular::is_prime(p)) {
    throw std::invalid_argument("rank_mod_p needs a prime below 2^62, got " + std::to_string(p));
  }
  RankResult result;
  result.field = Field::prime(p);
  result.rank = ModularEliminator(m, p).run();
  result.primes = {p};
  result.prime_ranks = {result.rank};
  result.certified = true;
  result.method = "sparse-markowitz";
  return result;
}

std::vector<std::uint64_t> sample_primes(std::uint64_t seed, std::size_t count) {
  CounterRng rng(seed, 0x7072696d65ULL);
  std::vector<std::uint64_t> primes;
  while (primes.size() < count) {
    const std::uint64_t candidate = (1ULL << 30) + 1 + rng.below((1ULL << 30) - 1);
    if (!modular::is_prime(candidate)) continue;
    if (std::find(primes.begin(), primes.end(), candidate) != primes.end()) continue;
    primes.push_back(candidate);
  }
  return primes;
}

std::size_t dense_rank_rational(const SparseMatrix& m) {
  std::vector<std::vector<mpq_class>> a(m.rows(), std::vector<mpq_class>(m.cols()));
  for (const auto& t : m.triplets()) a[t.row][t.col] = mpq_class(static_cast<long>(t.value));
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t piv = rank;
    while (piv < m.rows() && a[piv][c] == 0) ++piv;
    if (piv == m.rows()) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t r = rank + 1; r < m.rows(); ++r) {
      if (a[r][c] == 0) continue;
      const mpq_class f = a[r][c] / a[rank][c];
      for (std::size_t k = c; k < m.cols(); ++k) a[r][k] -= f * a[rank][k];
    }
    ++rank;
  }
  return rank;
}

RankResult rank_over_Q(const SparseMatrix& m, const RationalRankOptions& options) {
  RankResult result;
  result.field = Field::rationals();
  if (options.exact_small && m.rows() <= 64 && m.cols() <= 64) {
    result.rank = dense_rank_rational(m);
    result.certified = true;
    result.method = "dense-rational";
    return result;
  }
  const std::size_t min_primes = std::max<std::size_t>(options.min_primes, 2);
  const std::size_t max_primes = std::max(options.max_primes, min_primes);
  auto primes = sample_primes(options.prime_seed, min_primes);
  std::vector<std::size_t> ranks(primes.size());
  if (options.parallel) {
    std::vector<std::future<std::size_t>> jobs;
    for (auto p : primes) jobs.push_back(std::async(std::launch::async, [&m, p] { return rank_mod_p(m, p).rank; }));
    for (std::size_t i = 0; i < jobs.size(); ++i) ranks[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < primes.size(); ++i) ranks[i] = rank_mod_p(m, primes[i]).rank;
  }
  auto top_two_agree = [&] {
    auto sorted = ranks;
    std::sort(sorted.rbegin(), sorted.rend());
    return sorted[0] == sorted[1];
  };
  while (!top_two_agree() && primes.size() < max_primes) {
    primes = sample_primes(options.prime_seed, primes.size() + 1);
    ranks.push_back(rank_mod_p(m, primes.back()).rank);
  }
  result.rank = *std::max_element(ranks.begin(), ranks.end());
  result.primes = primes;
  result.prime_ranks = ranks;
  result.certified = top_two_agree();
  result.method = "multi-prime";
  return result;
}

RankResult rank(const SparseMatrix& m, const Field& field, const RationalRankOptions& options) {
  return field.is_prime() ? rank_mod_p(m, field.p) : rank_over_Q(m, options);
}

std::size_t kernel_dim(const SparseMatrix& m, const Field& field, const RationalRankOptions& options) {
  return m.cols() - rank(m, field, options).rank;
}

}  // namespace soficlen
