#include "soficlen/meanlength.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "soficlen/modular.hpp"
#include "soficlen/parallel.hpp"

namespace soficlen {

namespace {

mpz_class denominator_lcm(const std::vector<const GroupRingElement*>& elements) {
  mpz_class l = 1;
  for (const auto* x : elements)
    for (const auto& [g, c] : x->terms()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  return l;
}

mpz_class denominator_lcm(const FreeModuleVector& v) {
  std::vector<const GroupRingElement*> ptrs;
  for (const auto& c : v.components) ptrs.push_back(&c);
  return denominator_lcm(ptrs);
}

/// Coefficient c (already in the ring) as a field entry, after multiplying
/// by a positive row scale that clears denominators over Q.
std::int64_t to_entry(const mpq_class& c, const mpz_class& scale, const Field& field) {
  if (field.is_prime()) {
    const mpz_class p(static_cast<unsigned long>(field.p));
    mpz_class num = c.get_num() % p;
    mpz_class den = c.get_den() % p;
    if (den == 0) throw std::invalid_argument("coefficient denominator vanishes modulo p");
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
    mpz_class r = (num * inv) % p;
    if (r < 0) r += p;
    return static_cast<std::int64_t>(r.get_si());
  }
  const mpq_class scaled = c * mpq_class(scale);
  if (scaled.get_den() != 1 || !scaled.get_num().fits_slong_p()) {
    throw std::overflow_error("coefficient " + c.get_str() + " does not fit a 64-bit matrix entry");
  }
  return scaled.get_num().get_si();
}

void check_same_group(const Group& a, const Group& b) {
  if (!(a == b)) throw GroupMismatch("group mismatch: " + a.name() + " vs " + b.name());
}

/// Per-row scales for f over its field.
std::vector<mpz_class> row_scales(const GroupRingMatrix& f) {
  std::vector<mpz_class> scales;
  for (std::size_t k = 0; k < f.rows(); ++k) {
    std::vector<const GroupRingElement*> row;
    for (std::size_t j = 0; j < f.cols(); ++j) row.push_back(&f(k, j));
    scales.push_back(denominator_lcm(row));
  }
  return scales;
}

}  // namespace

bool FreeModuleVector::is_zero() const {
  return std::all_of(components.begin(), components.end(), [](const auto& c) { return c.is_zero(); });
}

FreeModuleVector FreeModuleVector::left_translate(const GroupElement& s) const {
  FreeModuleVector r;
  r.components.reserve(components.size());
  for (const auto& c : components) r.components.push_back(c.left_translate(s));
  return r;
}

std::vector<GroupElement> FreeModuleVector::support() const {
  std::set<GroupElement> s;
  for (const auto& c : components)
    for (const auto& [g, x] : c.terms()) s.insert(g);
  return {s.begin(), s.end()};
}

std::vector<FreeModuleVector> FreeModuleVector::standard_basis(GroupPtr group, CoefficientRing ring, std::size_t n) {
  std::vector<FreeModuleVector> basis(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      basis[i].components.push_back(i == j ? GroupRingElement::one(group, ring) : GroupRingElement(group, ring));
    }
  }
  return basis;
}

std::vector<FreeModuleVector> FreeModuleVector::rows_of(const GroupRingMatrix& f) {
  std::vector<FreeModuleVector> rows(f.rows());
  for (std::size_t k = 0; k < f.rows(); ++k)
    for (std::size_t j = 0; j < f.cols(); ++j) rows[k].components.push_back(f(k, j));
  return rows;
}

FreeModuleVector FreeModuleVector::parse(GroupPtr group, CoefficientRing ring, std::string_view text) {
  FreeModuleVector v;
  std::size_t start = 0;
  while (true) {
    const auto semi = text.find(';', start);
    v.components.push_back(GroupRingElement::parse(
        group, ring, text.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start)));
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  return v;
}

std::string FreeModuleVector::format() const {
  std::string out;
  for (std::size_t j = 0; j < components.size(); ++j) out += (j ? " ; " : "") + components[j].format();
  return out;
}

void RelativePair::validate() const {
  if (A.empty()) throw std::invalid_argument("relative pair needs at least one generator in A");
  if (B.empty()) throw std::invalid_argument("relative pair needs at least one relator generator in B");
  const auto& ref = A.front().components.empty() ? nullptr : &A.front().components.front();
  for (const auto* list : {&A, &B}) {
    for (const auto& v : *list) {
      if (v.rank() != ambient) throw std::invalid_argument("vector rank differs from the ambient rank");
      for (const auto& c : v.components) ref->check_compatible(c);
    }
  }
  for (const auto& s : F) ref->group().check(s);
}

namespace {

mpq_class ratio(std::size_t num, std::size_t den) {
  mpq_class q(static_cast<unsigned long>(num), static_cast<unsigned long>(den));
  q.canonicalize();
  return q;
}

}  // namespace

double to_double(const mpq_class& q) {
  const mpz_class limit = mpz_class(1) << 53;
  if (abs(q.get_num()) <= limit && q.get_den() <= limit) return q.get_num().get_d() / q.get_den().get_d();
  return q.get_d();
}

Field field_of(const CoefficientRing& ring) {
  return ring.is_prime_field() ? Field::prime(ring.prime()) : Field::rationals();
}

SparseMatrix build_sigma_bar(const GroupRingMatrix& f, const SoficMap& sigma) {
  check_same_group(f.group(), sigma.group());
  const std::size_t d = sigma.size();
  const Field field = field_of(f.ring());
  const auto scales = row_scales(f);
  std::map<GroupElement, Permutation> perms;
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < f.rows(); ++k) {
    for (std::size_t j = 0; j < f.cols(); ++j) {
      for (const auto& [s, c] : f(k, j).terms()) {
        auto it = perms.find(s);
        if (it == perms.end()) it = perms.emplace(s, sigma.permutation(s)).first;
        const auto& perm = it->second;
        const auto value = to_entry(c, scales[k], field);
        for (std::size_t v = 0; v < d; ++v) {
          t.push_back({static_cast<std::uint32_t>(k * d + perm[v]), static_cast<std::uint32_t>(j * d + v), value});
        }
      }
    }
  }
  return SparseMatrix::from_triplets(f.rows() * d, f.cols() * d, std::move(t));
}

SparseMatrix build_sigma_action(const GroupRingMatrix& f, const SoficMap& sigma) {
  check_same_group(f.group(), sigma.group());
  const std::size_t d = sigma.size();
  const Field field = field_of(f.ring());
  const auto scales = row_scales(f);
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < f.rows(); ++k) {
    for (std::size_t j = 0; j < f.cols(); ++j) {
      for (const auto& [s, c] : f(k, j).terms()) {
        const auto value = to_entry(c, scales[k], field);
        for (std::uint32_t source = 0; source < d; ++source) {
          const auto target = sigma.apply(s, source);
          t.push_back({static_cast<std::uint32_t>(k * d + target), static_cast<std::uint32_t>(j * d + source), value});
        }
      }
    }
  }
  return SparseMatrix::from_triplets(f.rows() * d, f.cols() * d, std::move(t));
}

CoordinateWindow::CoordinateWindow(std::vector<GroupElement> window, std::size_t d, std::size_t n)
    : elements_(std::move(window)), d_(d), n_(n) {
  std::sort(elements_.begin(), elements_.end());
  elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  for (std::size_t i = 0; i < elements_.size(); ++i) lookup_.emplace(elements_[i], i);
  if (size() > UINT32_MAX) throw std::length_error("coordinate window exceeds 2^32 coordinates");
}

std::uint32_t CoordinateWindow::index(std::size_t v, const GroupElement& g, std::size_t j) const {
  const auto it = lookup_.find(g);
  if (it == lookup_.end()) throw std::logic_error("group element escapes the coordinate window");
  return static_cast<std::uint32_t>((v * elements_.size() + it->second) * n_ + j);
}

std::vector<GroupElement> support_window(const RelativePair& pair) {
  std::set<GroupElement> w;
  for (const auto& a : pair.A)
    for (const auto& g : a.support()) w.insert(g);
  for (const auto& b : pair.B) {
    const auto supp = b.support();
    w.insert(supp.begin(), supp.end());
    for (const auto& s : pair.F) {
      for (const auto& g : supp) w.insert(b.group().multiply(s, g));
    }
  }
  if (w.empty() && !pair.A.empty() && !pair.A.front().components.empty()) {
    w.insert(pair.A.front().group().identity());
  }
  return {w.begin(), w.end()};
}

namespace {

void push_vector(std::vector<Triplet>& t, std::uint32_t row, const CoordinateWindow& window, std::size_t v,
                 const FreeModuleVector& x, const mpz_class& scale, const Field& field, std::int64_t sign) {
  for (std::size_t j = 0; j < x.components.size(); ++j) {
    for (const auto& [g, c] : x.components[j].terms()) {
      auto value = to_entry(c, scale, field);
      if (sign < 0) value = field.is_prime() ? static_cast<std::int64_t>((field.p - static_cast<std::uint64_t>(value)) % field.p) : -value;
      t.push_back({row, window.index(v, g, j), value});
    }
  }
}

}  // namespace

SparseMatrix relators(const RelativePair& pair, const SoficMap& sigma) {
  pair.validate();
  check_same_group(pair.B.front().group(), sigma.group());
  const std::size_t d = sigma.size();
  const Field field = field_of(pair.B.front().ring());
  const CoordinateWindow window(support_window(pair), d, pair.ambient);
  std::vector<Permutation> perms;
  for (const auto& s : pair.F) perms.push_back(sigma.permutation(s));
  std::vector<FreeModuleVector> translated;  // s b, indexed [b][s]
  std::vector<mpz_class> scales;
  for (const auto& b : pair.B) {
    scales.push_back(denominator_lcm(b));
    for (const auto& s : pair.F) translated.push_back(b.left_translate(s));
  }
  std::vector<Triplet> t;
  std::uint32_t row = 0;
  for (std::size_t v = 0; v < d; ++v) {
    for (std::size_t bi = 0; bi < pair.B.size(); ++bi) {
      for (std::size_t si = 0; si < pair.F.size(); ++si, ++row) {
        push_vector(t, row, window, v, pair.B[bi], scales[bi], field, +1);
        push_vector(t, row, window, perms[si][v], translated[bi * pair.F.size() + si], scales[bi], field, -1);
      }
    }
  }
  return SparseMatrix::from_triplets(d * pair.B.size() * pair.F.size(), window.size(), std::move(t));
}

SparseMatrix generator_copies(const RelativePair& pair, const SoficMap& sigma) {
  pair.validate();
  check_same_group(pair.A.front().group(), sigma.group());
  const std::size_t d = sigma.size();
  const Field field = field_of(pair.A.front().ring());
  const CoordinateWindow window(support_window(pair), d, pair.ambient);
  std::vector<mpz_class> scales;
  for (const auto& a : pair.A) scales.push_back(denominator_lcm(a));
  std::vector<Triplet> t;
  std::uint32_t row = 0;
  for (std::size_t v = 0; v < d; ++v) {
    for (std::size_t ai = 0; ai < pair.A.size(); ++ai, ++row) push_vector(t, row, window, v, pair.A[ai], scales[ai], field, +1);
  }
  return SparseMatrix::from_triplets(d * pair.A.size(), window.size(), std::move(t));
}

mpq_class relative_mean_length_at(const RelativePair& pair, const SoficMap& sigma,
                                  const RationalRankOptions& rank_options) {
  const Field field = field_of(pair.A.front().ring());
  if (!(field == field_of(pair.B.front().ring()))) throw std::invalid_argument("A and B use different fields");
  const auto rel = relators(pair, sigma);
  const auto copies = generator_copies(pair, sigma);
  const auto stacked = SparseMatrix::vstack(copies, rel);
  const auto total = rank(stacked, field, rank_options).rank;
  const auto relator_rank = rank(rel, field, rank_options).rank;
  return ratio(total - relator_rank, sigma.size());
}

mpq_class principal_mean_rank_at(const GroupRingMatrix& f, const SoficMap& sigma,
                                 const RationalRankOptions& rank_options) {
  const auto r = rank(build_sigma_bar(f, sigma), field_of(f.ring()), rank_options).rank;
  return ratio(r, sigma.size());
}

std::optional<mpq_class> snap_to_H(double value, const Group& group, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("snap tolerance must be positive");
  const double denom = group.is_finite() ? static_cast<double>(group.order()) : 1.0;
  const double numerator = std::round(value * denom);
  if (std::abs(value - numerator / denom) > tol) return std::nullopt;
  mpq_class q(static_cast<long>(numerator), static_cast<unsigned long>(denom));
  q.canonicalize();
  return q;
}

namespace {

struct PointResult {
  mpq_class value;
  bool certified = true;
  std::size_t duality_checks = 0;
};

void summarize(MeanLengthEstimate& est, const SoficSchedule& schedule, const Group& group,
               const EstimateOptions& options) {
  const auto d_last = schedule.sizes.back();
  auto mean_at = [&](std::size_t d, mpq_class* lo, mpq_class* hi) {
    mpq_class sum = 0;
    std::size_t count = 0;
    for (const auto& p : est.series) {
      if (p.d != d) continue;
      if (count == 0 || p.value < *lo) *lo = p.value;
      if (count == 0 || p.value > *hi) *hi = p.value;
      sum += p.value;
      ++count;
    }
    sum /= static_cast<long>(count);
    return sum;
  };
  mpq_class lo, hi;
  est.headline_exact = mean_at(d_last, &lo, &hi);
  est.headline = to_double(est.headline_exact);
  est.spread = to_double(mpq_class(hi - lo));
  if (schedule.sizes.size() > 1) {
    mpq_class plo, phi;
    est.previous_headline = to_double(mean_at(schedule.sizes[schedule.sizes.size() - 2], &plo, &phi));
    est.stabilized = std::abs(est.headline - *est.previous_headline) <= options.stabilization_tolerance;
  }
  est.snapped = snap_to_H(est.headline, group, options.snap_tolerance);
}

DefectSummary summarize_defect(const SoficSchedule& schedule, const SoficFactory& factory, const Group& group,
                               const EstimateOptions& options) {
  const auto window = options.defect_window.empty() ? group.ball(1) : options.defect_window;
  DefectSummary s;
  s.d = schedule.sizes.back();
  s.window = window.size();
  double mean_mult = 0, mean_sep = 0;
  for (auto seed : schedule.seeds) {
    const auto report = defect(factory(s.d, seed), window);
    s.min_multiplicativity = std::min(s.min_multiplicativity, report.min_multiplicativity());
    s.min_separation = std::min(s.min_separation, report.min_separation());
    mean_mult += report.mean_multiplicativity();
    mean_sep += report.mean_separation();
  }
  s.mean_multiplicativity = mean_mult / static_cast<double>(schedule.seeds.size());
  s.mean_separation = mean_sep / static_cast<double>(schedule.seeds.size());
  return s;
}

template <class Eval>
MeanLengthEstimate run_schedule(std::string quantity, const SoficSchedule& schedule, const SoficFactory& factory,
                                const Group& group, const EstimateOptions& options, Eval eval) {
  schedule.validate();
  const auto points = schedule.points();
  const auto results = parallel_map(points.size(), options.jobs, [&](std::size_t i) {
    return eval(factory(points[i].first, points[i].second));
  });
  MeanLengthEstimate est;
  est.quantity = std::move(quantity);
  for (std::size_t i = 0; i < points.size(); ++i) {
    est.series.push_back({points[i].first, points[i].second, results[i].value});
    est.certified = est.certified && results[i].certified;
    est.duality_checks += results[i].duality_checks;
  }
  summarize(est, schedule, group, options);
  est.defect_summary = summarize_defect(schedule, factory, group, options);
  return est;
}

}  // namespace

MeanLengthEstimate estimate_mean_length(std::size_t ambient, const std::vector<FreeModuleVector>& A,
                                        const std::vector<std::vector<GroupElement>>& f_schedule,
                                        const std::vector<std::vector<FreeModuleVector>>& b_schedule,
                                        const SoficSchedule& schedule, const SoficFactory& factory,
                                        const EstimateOptions& options) {
  if (f_schedule.empty() || b_schedule.empty()) throw std::invalid_argument("F and B schedules must be nonempty");
  RelativePair pair{ambient, A, b_schedule.back(), f_schedule.back()};
  pair.validate();
  const auto& group = A.front().group();
  return run_schedule("mrk", schedule, factory, group, options, [&](const SoficMap& sigma) {
    // Certification flag: rerun ranks through rank() to capture it.
    const Field field = field_of(pair.A.front().ring());
    const auto rel = relators(pair, sigma);
    const auto stacked = SparseMatrix::vstack(generator_copies(pair, sigma), rel);
    const auto total = rank(stacked, field, options.rank);
    const auto rr = rank(rel, field, options.rank);
    PointResult r;
    r.value = ratio(total.rank - rr.rank, sigma.size());
    r.certified = total.certified && rr.certified;
    return r;
  });
}

MeanLengthEstimate estimate_vrk_fp(const GroupRingMatrix& f, const SoficSchedule& schedule,
                                   const SoficFactory& factory, const EstimateOptions& options) {
  if (!f.ring().is_characteristic_zero()) {
    throw UnsupportedError("vrk needs coefficients in Z or Q (algebraic numbers); over " + f.ring().name() +
                           " only the mean rank is available");
  }
  const std::size_t n = f.cols();
  return run_schedule("vrk", schedule, factory, f.group(), options, [&](const SoficMap& sigma) {
    const std::size_t d = sigma.size();
    const auto image = rank_over_Q(build_sigma_bar(f, sigma), options.rank);
    const auto action = build_sigma_action(f, sigma);
    const auto action_rank = rank_over_Q(action.transposed(), options.rank);
    const std::size_t kernel = action.cols() - action_rank.rank;
    if (kernel + image.rank != d * n) {
      throw std::logic_error("rank/kernel duality violated at d=" + std::to_string(d) + ": kernel " +
                             std::to_string(kernel) + " + rank " + std::to_string(image.rank) +
                             " != " + std::to_string(d * n));
    }
    PointResult r;
    r.value = ratio(kernel, d);
    r.certified = image.certified && action_rank.certified;
    r.duality_checks = 1;
    return r;
  });
}

MeanLengthEstimate estimate_mrk_fp(const GroupRingMatrix& f, const SoficSchedule& schedule,
                                   const SoficFactory& factory, const EstimateOptions& options) {
  const Field field = field_of(f.ring());
  return run_schedule("mrk", schedule, factory, f.group(), options, [&](const SoficMap& sigma) {
    const auto r = rank(build_sigma_bar(f, sigma), field, options.rank);
    PointResult p;
    p.value = ratio(r.rank, sigma.size());
    p.certified = r.certified;
    return p;
  });
}

AdditionReport check_addition(const GroupRingMatrix& f, const SoficSchedule& schedule, const SoficFactory& factory,
                              const EstimateOptions& options) {
  schedule.validate();
  const std::size_t n = f.cols();
  RelativePair pair;
  pair.ambient = n;
  pair.A = FreeModuleVector::rows_of(f);
  pair.B = FreeModuleVector::standard_basis(f.group_ptr(), f.ring(), n);
  pair.F = f.support();
  if (std::find(pair.F.begin(), pair.F.end(), f.group().identity()) == pair.F.end()) {
    pair.F.push_back(f.group().identity());
  }
  const auto points = schedule.points();
  auto results = parallel_map(points.size(), options.jobs, [&](std::size_t i) {
    const auto sigma = factory(points[i].first, points[i].second);
    AdditionPoint p;
    p.d = points[i].first;
    p.seed = points[i].second;
    p.relative = relative_mean_length_at(pair, sigma, options.rank);
    p.relative.canonicalize();
    p.principal = principal_mean_rank_at(f, sigma, options.rank);
    p.principal.canonicalize();
    p.quotient = mpq_class(static_cast<long>(n)) - p.principal;
    p.residual_routes = abs(p.relative - p.principal);
    p.residual_sum = abs(p.relative + p.quotient - mpq_class(static_cast<long>(n)));
    return p;
  });
  AdditionReport report;
  report.ambient = n;
  report.max_residual_routes = 0;
  report.max_residual_sum = 0;
  mpq_class sub = 0, quo = 0;
  long count = 0;
  for (auto& p : results) {
    report.max_residual_routes = std::max(report.max_residual_routes, p.residual_routes);
    report.max_residual_sum = std::max(report.max_residual_sum, p.residual_sum);
    if (p.d == schedule.sizes.back()) {
      sub += p.relative;
      quo += p.quotient;
      ++count;
    }
    report.points.push_back(std::move(p));
  }
  report.submodule_headline = to_double(mpq_class(sub / count));
  report.quotient_headline = to_double(mpq_class(quo / count));
  return report;
}

}  // namespace soficlen
