#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "soficlen/exactla.hpp"
#include "soficlen/groupring.hpp"
#include "soficlen/sofic.hpp"

namespace soficlen {

/// Raised for combinations the estimators refuse, such as the von
/// Neumann rank over a prime field.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An element of the free module (RG)^{1 x n}.
struct FreeModuleVector {
  std::vector<GroupRingElement> components;

  std::size_t rank() const { return components.size(); }
  const Group& group() const { return components.front().group(); }
  const CoefficientRing& ring() const { return components.front().ring(); }
  bool is_zero() const;
  /// s * v, componentwise.
  FreeModuleVector left_translate(const GroupElement& s) const;
  /// Union of component supports, sorted.
  std::vector<GroupElement> support() const;

  /// Standard basis e_1, ..., e_n.
  static std::vector<FreeModuleVector> standard_basis(GroupPtr group, CoefficientRing ring, std::size_t n);
  /// Rows of f.
  static std::vector<FreeModuleVector> rows_of(const GroupRingMatrix& f);
  /// Components separated by `;`, each in the `coef@word` term syntax.
  static FreeModuleVector parse(GroupPtr group, CoefficientRing ring, std::string_view text);
  std::string format() const;
};

/// Generators of the R-submodule A inside M1, relator generators B inside
/// M2 = (RG)^{1 x n}, and the group window F.
struct RelativePair {
  std::size_t ambient = 1;
  std::vector<FreeModuleVector> A;
  std::vector<FreeModuleVector> B;
  std::vector<GroupElement> F;

  void validate() const;
};

/// Field in which ranks over a coefficient ring are taken: Q for Z and Q,
/// GF(p) for GF(p).
Field field_of(const CoefficientRing& ring);

/// Nearest double when numerator and denominator are exact doubles.
double to_double(const mpq_class& q);

/// Matrix of the map w -> sigma-bar_f(w), (R^d)^{1 x m} -> (R^d)^{1 x n},
/// acting on row vectors: entry ((k, v'), (j, v)) accumulates f_{k,j,s} over
/// all s with sigma_s(v) = v'. Row index k*d + v', column index j*d + v.
/// Rows are rescaled by positive integers to clear denominators over Q.
SparseMatrix build_sigma_bar(const GroupRingMatrix& f, const SoficMap& sigma);

/// Matrix of sigma_f acting on column vectors (C^d)^{n x 1} -> (C^d)^{m x 1}:
/// (sigma_f w)_{k, v} = sum over j, s and v' with sigma_s(v') = v of
/// f_{k,j,s} w_{j, v'}.
SparseMatrix build_sigma_action(const GroupRingMatrix& f, const SoficMap& sigma);

/// Ordered index for the coordinates [d] x W x [n] of M^d restricted to a
/// finite support window W.
class CoordinateWindow {
 public:
  CoordinateWindow(std::vector<GroupElement> window, std::size_t d, std::size_t n);

  std::size_t size() const { return d_ * elements_.size() * n_; }
  const std::vector<GroupElement>& elements() const { return elements_; }
  std::uint32_t index(std::size_t v, const GroupElement& g, std::size_t j) const;
  bool contains(const GroupElement& g) const { return lookup_.count(g) != 0; }

 private:
  std::vector<GroupElement> elements_;
  std::map<GroupElement, std::size_t> lookup_;
  std::size_t d_, n_;
};

/// W = supp(A) u supp(B) u F supp(B).
std::vector<GroupElement> support_window(const RelativePair& pair);

/// Rows delta_v b - delta_{sigma_s(v)} s b for v in [d], b in B, s in F, in
/// that nesting order, over the window of `pair`.
SparseMatrix relators(const RelativePair& pair, const SoficMap& sigma);
/// Rows delta_v a for v in [d], a in A, over the same window.
SparseMatrix generator_copies(const RelativePair& pair, const SoficMap& sigma);

/// rank(A-copies + relators) - rank(relators), divided by d.
mpq_class relative_mean_length_at(const RelativePair& pair, const SoficMap& sigma,
                                  const RationalRankOptions& rank_options = {});

/// rank(sigma-bar_f) / d.
mpq_class principal_mean_rank_at(const GroupRingMatrix& f, const SoficMap& sigma,
                                 const RationalRankOptions& rank_options = {});

struct SeriesPoint {
  std::size_t d = 0;
  std::uint64_t seed = 0;
  mpq_class value;
};

struct DefectSummary {
  std::size_t d = 0;
  std::size_t window = 0;
  double min_multiplicativity = 1;
  double mean_multiplicativity = 1;
  double min_separation = 1;
  double mean_separation = 1;
};

struct MeanLengthEstimate {
  std::string quantity;  // "mrk" or "vrk"
  std::vector<SeriesPoint> series;
  /// Mean over seeds at the largest d.
  mpq_class headline_exact;
  double headline = 0;
  /// max - min over seeds at the largest d.
  double spread = 0;
  /// Mean over seeds at the previous d, when the schedule has one.
  std::optional<double> previous_headline;
  bool stabilized = true;
  std::optional<mpq_class> snapped;
  std::optional<DefectSummary> defect_summary;
  /// Every rank over Q was certified by agreeing primes.
  bool certified = true;
  /// Rank/kernel duality checks performed (all passed, or an exception).
  std::size_t duality_checks = 0;
};

struct EstimateOptions {
  RationalRankOptions rank;
  double snap_tolerance = 0.05;
  double stabilization_tolerance = 0.01;
  std::size_t jobs = 1;
  /// Window for the defect summary; empty means ball(1).
  std::vector<GroupElement> defect_window;
};

/// Relative mean length at the largest supplied F and B along the sofic
/// schedule. A is the generator template; the schedules must be nonempty.
MeanLengthEstimate estimate_mean_length(std::size_t ambient, const std::vector<FreeModuleVector>& A,
                                        const std::vector<std::vector<GroupElement>>& f_schedule,
                                        const std::vector<std::vector<FreeModuleVector>>& b_schedule,
                                        const SoficSchedule& schedule, const SoficFactory& factory,
                                        const EstimateOptions& options = {});

/// n - rank(sigma-bar_f)/d per schedule point, cross-checked against
/// dim ker(sigma_f)/d. Refuses GF(p) coefficients.
MeanLengthEstimate estimate_vrk_fp(const GroupRingMatrix& f, const SoficSchedule& schedule,
                                   const SoficFactory& factory, const EstimateOptions& options = {});

/// rank(sigma-bar_f)/d per schedule point (mean rank of the row module
/// relative to the free module).
MeanLengthEstimate estimate_mrk_fp(const GroupRingMatrix& f, const SoficSchedule& schedule,
                                   const SoficFactory& factory, const EstimateOptions& options = {});

/// Nearest element of the candidate value set H(G) within tol: the integers
/// for torsion-free groups, (1/|G|)Z for finite groups. Throws for tol <= 0.
std::optional<mpq_class> snap_to_H(double value, const Group& group, double tol);

struct AdditionPoint {
  std::size_t d = 0;
  std::uint64_t seed = 0;
  mpq_class relative;   // mrk(M1 | M2) through relators
  mpq_class principal;  // rank(sigma-bar_f)/d
  mpq_class quotient;   // n - principal
  mpq_class residual_routes;
  mpq_class residual_sum;
};

struct AdditionReport {
  std::size_t ambient = 0;
  std::vector<AdditionPoint> points;
  mpq_class max_residual_routes;
  mpq_class max_residual_sum;
  /// Means over seeds at the largest d.
  double submodule_headline = 0;
  double quotient_headline = 0;
};

/// Checks mrk(M1|M2) + mrk(M2/M1) = n for M1 = (RG)^{1 x m} f inside
/// M2 = (RG)^{1 x n}, computing the submodule term by two routes.
AdditionReport check_addition(const GroupRingMatrix& f, const SoficSchedule& schedule, const SoficFactory& factory,
                              const EstimateOptions& options = {});

}  // namespace soficlen
