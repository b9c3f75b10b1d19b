#include "soficlen/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "soficlen/rng.hpp"

namespace soficlen {

std::size_t FolnerBox::volume() const {
  std::size_t v = 1;
  for (auto s : sides) v *= s;
  return v;
}

std::string FolnerBox::format() const {
  std::string out;
  for (std::size_t i = 0; i < sides.size(); ++i) out += (i ? "x" : "") + std::to_string(sides[i]);
  return out;
}

FolnerBox FolnerBox::parse(std::string_view text) {
  FolnerBox box;
  box.sides = SoficSchedule::parse_dims(text);
  return box;
}

namespace {

std::vector<GroupElement> box_elements(const Group& group, const FolnerBox& box) {
  if (box.sides.empty() || box.volume() == 0) throw std::invalid_argument("Folner box must be nonempty");
  const std::size_t k = group.family() == GroupFamily::IntegerLine ? 1 : group.rank();
  if (box.sides.size() != k) {
    throw std::invalid_argument("box " + box.format() + " has the wrong dimension for " + group.name());
  }
  std::vector<GroupElement> out;
  std::vector<std::int64_t> x(k, 0);
  for (std::size_t n = 0; n < box.volume(); ++n) {
    std::size_t rest = n;
    for (std::size_t i = k; i-- > 0;) {
      x[i] = static_cast<std::int64_t>(rest % box.sides[i]);
      rest /= box.sides[i];
    }
    out.push_back(k == 1 && group.family() == GroupFamily::IntegerLine ? group.integer(x[0]) : group.vector(x));
  }
  return out;
}

std::vector<mpz_class> scales_of(const std::vector<FreeModuleVector>& A) {
  std::vector<mpz_class> scales;
  for (const auto& a : A) {
    mpz_class l = 1;
    for (const auto& c : a.components)
      for (const auto& [g, x] : c.terms()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    scales.push_back(l);
  }
  return scales;
}

}  // namespace

std::vector<FolnerPoint> folner_mean_length(const std::vector<FreeModuleVector>& A,
                                            const std::vector<FolnerBox>& boxes,
                                            const RationalRankOptions& rank_options) {
  if (A.empty()) throw std::invalid_argument("Folner oracle needs at least one generator");
  const Group& group = A.front().group();
  if (group.family() != GroupFamily::IntegerLine && group.family() != GroupFamily::Lattice) {
    throw std::invalid_argument("Folner oracle supports Z and Z^k only, not " + group.name());
  }
  if (A.front().ring().is_prime_field()) throw std::invalid_argument("Folner oracle works over Z or Q");
  const std::size_t n = A.front().rank();
  const auto scales = scales_of(A);
  std::vector<FolnerPoint> out;
  for (const auto& box : boxes) {
    const auto F = box_elements(group, box);
    std::map<GroupElement, std::uint32_t> window;
    std::vector<Triplet> t;
    std::uint32_t row = 0;
    for (const auto& s : F) {
      const auto s_inv = group.inverse(s);
      for (std::size_t ai = 0; ai < A.size(); ++ai, ++row) {
        for (std::size_t j = 0; j < n; ++j) {
          for (const auto& [g, c] : A[ai].components[j].terms()) {
            const auto h = group.multiply(s_inv, g);
            auto it = window.emplace(h, static_cast<std::uint32_t>(window.size())).first;
            const mpq_class scaled = c * mpq_class(scales[ai]);
            if (!scaled.get_num().fits_slong_p()) throw std::overflow_error("coefficient too large");
            t.push_back({row, static_cast<std::uint32_t>(it->second * n + j), scaled.get_num().get_si()});
          }
        }
      }
    }
    const auto m = SparseMatrix::from_triplets(row, std::max<std::size_t>(window.size(), 1) * n, std::move(t));
    mpq_class value(static_cast<long>(rank_over_Q(m, rank_options).rank), static_cast<unsigned long>(F.size()));
    value.canonicalize();
    out.push_back({box, value});
  }
  return out;
}

std::size_t dense_rank(std::vector<std::vector<mpq_class>> rows) {
  std::size_t rank = 0;
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (rows[r][c] == 0) continue;
      const mpq_class factor = rows[r][c] / rows[rank][c];
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= factor * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

mpq_class finite_group_vrk(const GroupRingMatrix& f) {
  const Group& group = f.group();
  if (!group.is_finite()) throw std::invalid_argument("finite-group oracle needs a finite group, got " + group.name());
  if (f.ring().is_prime_field()) throw std::invalid_argument("finite-group oracle works over Z or Q");
  const std::size_t order = group.order();
  const auto elements = group.ball(0);  // every element for finite groups
  std::map<GroupElement, std::size_t> index;
  for (const auto& g : elements) index.emplace(g, index.size());
  if (index.size() != order) throw std::logic_error("finite group enumeration is incomplete");

  // Column (j, g) holds f * (g e_j): entry k is f_{k,j} g.
  std::vector<std::vector<mpq_class>> columns;
  for (std::size_t j = 0; j < f.cols(); ++j) {
    for (const auto& g : elements) {
      std::vector<mpq_class> col(f.rows() * order);
      const auto unit = GroupRingElement::monomial(f.group_ptr(), f.ring(), g, 1);
      for (std::size_t k = 0; k < f.rows(); ++k) {
        const auto product = f(k, j) * unit;
        for (const auto& [h, c] : product.terms()) col[k * order + index.at(h)] = c;
      }
      columns.push_back(std::move(col));
    }
  }
  const std::size_t r = dense_rank(std::move(columns));
  mpq_class v(static_cast<long>(f.cols() * order - r), static_cast<unsigned long>(order));
  v.canonicalize();
  return v;
}

LaurentRank laurent_rank(const GroupRingMatrix& f, std::uint64_t seed, std::size_t evaluations) {
  const Group& group = f.group();
  if (group.family() != GroupFamily::IntegerLine && group.family() != GroupFamily::Lattice) {
    throw std::invalid_argument("Laurent oracle supports Z and Z^k only, not " + group.name());
  }
  if (f.ring().is_prime_field()) throw std::invalid_argument("Laurent oracle works over Z or Q");
  if (evaluations == 0) throw std::invalid_argument("need at least one evaluation");
  const std::size_t k = group.family() == GroupFamily::IntegerLine ? 1 : group.rank();
  LaurentRank out;
  for (std::size_t e = 0; e < evaluations; ++e) {
    CounterRng rng(seed, e);
    std::vector<mpq_class> point;
    for (std::size_t i = 0; i < k; ++i) {
      const auto num = rng.between(2, (std::int64_t{1} << 31) - 1);
      const auto den = rng.between(1, num - 1);
      point.emplace_back(mpz_class(std::to_string(num)), mpz_class(std::to_string(den)));
      point.back().canonicalize();
    }
    auto monomial = [&](const GroupElement& g) {
      mpq_class v = 1;
      for (std::size_t i = 0; i < k; ++i) {
        const auto exp = g.data[i];
        mpq_class p;
        mpz_class num, den;
        mpz_pow_ui(num.get_mpz_t(), point[i].get_num_mpz_t(), static_cast<unsigned long>(std::llabs(exp)));
        mpz_pow_ui(den.get_mpz_t(), point[i].get_den_mpz_t(), static_cast<unsigned long>(std::llabs(exp)));
        p = exp >= 0 ? mpq_class(num, den) : mpq_class(den, num);
        v *= p;
      }
      return v;
    };
    std::vector<std::vector<mpq_class>> rows(f.rows(), std::vector<mpq_class>(f.cols()));
    for (std::size_t i = 0; i < f.rows(); ++i)
      for (std::size_t j = 0; j < f.cols(); ++j)
        for (const auto& [g, c] : f(i, j).terms()) rows[i][j] += c * monomial(g);
    const auto r = dense_rank(std::move(rows));
    out.evaluation_ranks.push_back(r);
    out.rank = std::max(out.rank, r);
  }
  out.agreement = std::all_of(out.evaluation_ranks.begin(), out.evaluation_ranks.end(),
                              [&](std::size_t r) { return r == out.rank; });
  out.vrk = f.cols() - out.rank;
  return out;
}

CompareReport compare(const MeanLengthEstimate& estimate, const mpq_class& oracle, double tol) {
  CompareReport r;
  r.tolerance = tol;
  r.oracle = oracle;
  r.headline = estimate.headline;
  r.spread = estimate.spread;
  r.residual = std::abs(estimate.headline - to_double(oracle));
  r.unstable = estimate.spread > tol;
  r.pass = r.residual <= tol && !r.unstable;
  return r;
}

}  // namespace soficlen
