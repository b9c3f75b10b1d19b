#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "soficlen/groupring.hpp"
#include "soficlen/meanlength.hpp"

namespace soficlen {

/// Box [0, L1) x ... x [0, Lk) in Z^k.
struct FolnerBox {
  std::vector<std::size_t> sides;

  std::size_t volume() const;
  std::string format() const;  // "L1xL2"
  static FolnerBox parse(std::string_view text);
};

struct FolnerPoint {
  FolnerBox box;
  mpq_class value;
};

/// rank_Q span{s^-1 a : s in F, a in A} / |F| for each box F. Z and Z^k only.
std::vector<FolnerPoint> folner_mean_length(const std::vector<FreeModuleVector>& A,
                                            const std::vector<FolnerBox>& boxes,
                                            const RationalRankOptions& rank_options = {});

/// dim ker(x -> f x on (QG)^{n x 1}) / |G| for a finite group G, by direct
/// group-ring multiplication.
mpq_class finite_group_vrk(const GroupRingMatrix& f);

struct LaurentRank {
  std::size_t rank = 0;
  std::size_t vrk = 0;  // n - rank
  /// All evaluations gave the same rank.
  bool agreement = true;
  std::vector<std::size_t> evaluation_ranks;
};

/// Generic rank of f over Q(t1, ..., tk) by evaluation at random rationals
/// num/den with num > den >= 1, maximized over `evaluations` points.
LaurentRank laurent_rank(const GroupRingMatrix& f, std::uint64_t seed, std::size_t evaluations = 3);

struct CompareReport {
  bool pass = false;
  bool unstable = false;
  double residual = 0;
  double tolerance = 0;
  mpq_class oracle;
  double headline = 0;
  double spread = 0;
};

CompareReport compare(const MeanLengthEstimate& estimate, const mpq_class& oracle, double tol);

/// Exact rank of a dense rational matrix.
std::size_t dense_rank(std::vector<std::vector<mpq_class>> rows);

}  // namespace soficlen
