#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "brute.hpp"
#include "soficlen/meanlength.hpp"

using namespace soficlen;

namespace {

const auto kZ = CoefficientRing::integers();

GroupRingMatrix one_by_one(const GroupPtr& g, const std::string& text, CoefficientRing ring = kZ) {
  return GroupRingMatrix::from_rows({{GroupRingElement::parse(g, ring, text)}});
}

FreeModuleVector vec(const GroupPtr& g, const std::string& text) { return FreeModuleVector::parse(g, kZ, text); }

SoficFactory cyclic_factory() {
  return [](std::size_t d, std::uint64_t) { return build_cyclic(d); };
}

mpq_class q(long n, long d) {
  mpq_class x(n, d);
  x.canonicalize();
  return x;
}

std::vector<std::vector<mpq_class>> dense(const SparseMatrix& m) { return brute::dense_q(m); }

}  // namespace

TEST_CASE("sigma-bar of simple elements") {
  const auto z = make_group(Group::integer_line());
  for (std::size_t d = 1; d <= 6; ++d) {
    const auto sigma = build_cyclic(d);
    CHECK(build_sigma_bar(one_by_one(z, "1"), sigma) == SparseMatrix::identity(d));
    const auto t = one_by_one(z, "1@1");
    CHECK(dense(build_sigma_bar(t, sigma)) == brute::sigma_bar(t, sigma));
  }
  const auto f = one_by_one(z, "1@1 -1");
  const auto m = build_sigma_bar(f, build_cyclic(4));
  CHECK(brute::rank_q(m) == 3);
  CHECK(rank_over_Q(m).rank == 3);
  CHECK(rank_over_Q(build_sigma_bar(f, build_cyclic(6))).rank == 5);
}

TEST_CASE("sigma-bar matches the defining formula on random matrices") {
  CounterRng rng(1, 1);
  const auto f2 = make_group(Group::free_group(2));
  const auto z2 = make_group(Group::lattice(2));
  const auto s3 = make_group(Group::symmetric(3));
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng.below(2), n = 1 + rng.below(2);
    const auto f = brute::random_matrix(rng, f2, m, n, 2);
    const auto sigma = build_random_free(f2, 5, trial + 1);
    CHECK(dense(build_sigma_bar(f, sigma)) == brute::sigma_bar(f, sigma));
    const auto g = brute::random_matrix(rng, z2, m, n, 1);
    const auto tau = build_torus(z2, {2, 3});
    CHECK(dense(build_sigma_bar(g, tau)) == brute::sigma_bar(g, tau));
    const auto h = brute::random_matrix(rng, s3, m, n, 1);
    CHECK(dense(build_sigma_bar(h, build_translation(s3))) == brute::sigma_bar(h, build_translation(s3)));
  }
}

TEST_CASE("sigma action and duality") {
  const auto z = make_group(Group::integer_line());
  const auto sigma = build_cyclic(5);
  CHECK(build_sigma_action(one_by_one(z, "1"), sigma) == SparseMatrix::identity(5));
  CHECK(build_sigma_action(one_by_one(z, "0"), sigma).nnz() == 0);
  CHECK(kernel_dim(build_sigma_action(one_by_one(z, "1@1 -1"), build_cyclic(6)), Field::rationals()) == 1);

  CounterRng rng(4, 4);
  const auto f2 = make_group(Group::free_group(2));
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(3), n = 1 + rng.below(3);
    const auto f = brute::random_matrix(rng, z, m, n, 2);
    const auto bar = rank_over_Q(build_sigma_bar(f, sigma)).rank;
    CHECK(kernel_dim(build_sigma_action(f, sigma), Field::rationals()) + bar == 5 * n);
    const auto g = brute::random_matrix(rng, f2, m, n, 1);
    const auto tau = build_random_free(f2, 30, trial + 1);
    CHECK(kernel_dim(build_sigma_action(g, tau), Field::rationals()) + rank_over_Q(build_sigma_bar(g, tau)).rank == 30 * n);
  }
}

TEST_CASE("sigma-bar is functorial for homomorphic maps") {
  CounterRng rng(6, 0);
  const auto z = make_group(Group::integer_line());
  const auto z2 = make_group(Group::lattice(2));
  const auto c6 = make_group(Group::cyclic(6));
  const auto s3 = make_group(Group::symmetric(3));
  struct Case {
    GroupPtr group;
    SoficMap sigma;
    int radius;
  };
  const std::vector<Case> cases = {{z, build_cyclic(7), 2},
                                   {z2, build_torus(z2, {3, 4}), 1},
                                   {c6, build_translation(c6), 1},
                                   {s3, build_translation(s3), 1}};
  for (const auto& c : cases) {
    for (int trial = 0; trial < 8; ++trial) {
      const std::size_t m = 1 + rng.below(3), k = 1 + rng.below(3), n = 1 + rng.below(3);
      const auto f = brute::random_matrix(rng, c.group, m, k, c.radius);
      const auto g = brute::random_matrix(rng, c.group, k, n, c.radius);
      CHECK(build_sigma_bar(mat_mul(f, g), c.sigma) ==
            SparseMatrix::multiply(build_sigma_bar(f, c.sigma), build_sigma_bar(g, c.sigma)));
    }
  }
}

TEST_CASE("rational coefficients are rescaled per row") {
  const auto z = make_group(Group::integer_line());
  const auto qring = CoefficientRing::rationals();
  const auto half = one_by_one(z, "1/2@1 -1/3", qring);
  const auto whole = one_by_one(z, "3@1 -2");
  CHECK(build_sigma_bar(half, build_cyclic(5)) == build_sigma_bar(whole, build_cyclic(5)));
  const auto gf7 = one_by_one(z, "1@1 -1", CoefficientRing::prime_field(7));
  const auto m = build_sigma_bar(gf7, build_cyclic(3));
  for (const auto& t : m.triplets()) CHECK((t.value == 1 || t.value == 6));
}

TEST_CASE("relator structure") {
  const auto z = make_group(Group::integer_line());
  const auto sigma = build_cyclic(4);
  RelativePair pair{1, {vec(z, "1@1 -1")}, {vec(z, "1")}, {z->identity()}};
  CHECK(relators(pair, sigma).nnz() == 0);

  const auto f2 = make_group(Group::free_group(2));
  RelativePair basis{3, FreeModuleVector::standard_basis(f2, kZ, 3), FreeModuleVector::standard_basis(f2, kZ, 3),
                     {f2->word({1}), f2->word({-2}), f2->word({1, 2})}};
  const auto tau = build_random_free(f2, 6, 2);
  const auto rel = relators(basis, tau);
  CHECK(rel.rows() == 6 * 3 * 3);
  std::vector<int> per_row(rel.rows());
  for (const auto& t : rel.triplets()) ++per_row[t.row];
  for (int c : per_row) CHECK(c == 2);

  RelativePair one{1, {vec(z, "1")}, {vec(z, "1")}, {z->integer(1)}};
  CHECK(brute::rank_q(relators(one, build_cyclic(3))) == 3);
}

TEST_CASE("relative mean length at fixed maps") {
  const auto z = make_group(Group::integer_line());
  const auto z2 = make_group(Group::lattice(2));
  const auto c6 = make_group(Group::cyclic(6));
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t d = 1; d <= 6; ++d) {
      for (bool with_e : {false, true}) {
        std::vector<GroupElement> F = {z->integer(1), z->integer(-1)};
        if (with_e) F.push_back(z->identity());
        RelativePair pair{n, FreeModuleVector::standard_basis(z, kZ, n), FreeModuleVector::standard_basis(z, kZ, n), F};
        const auto sigma = build_cyclic(d);
        CHECK(relative_mean_length_at(pair, sigma) == static_cast<long>(n));
        // Dense cross-check of the two ranks.
        const auto rel = relators(pair, sigma);
        const auto stacked = SparseMatrix::vstack(generator_copies(pair, sigma), rel);
        CHECK(brute::rank_q(stacked) - brute::rank_q(rel) == n * d);
      }
    }
    RelativePair lattice{n, FreeModuleVector::standard_basis(z2, kZ, n), FreeModuleVector::standard_basis(z2, kZ, n),
                         z2->ball(1)};
    CHECK(relative_mean_length_at(lattice, build_torus(z2, {2, 3})) == static_cast<long>(n));
    RelativePair finite{n, FreeModuleVector::standard_basis(c6, kZ, n), FreeModuleVector::standard_basis(c6, kZ, n),
                        c6->ball(0)};
    CHECK(relative_mean_length_at(finite, build_translation(c6)) == static_cast<long>(n));
  }
  for (std::size_t d = 1; d <= 8; ++d) {
    const auto sigma = build_cyclic(d);
    RelativePair diff{1, {vec(z, "1@1 -1")}, {vec(z, "1")}, {z->integer(1)}};
    const auto rel = relators(diff, sigma);
    const auto stacked = SparseMatrix::vstack(generator_copies(diff, sigma), rel);
    CHECK(mpq_class(static_cast<long>(brute::rank_q(stacked) - brute::rank_q(rel)), static_cast<long>(d)) ==
          q(static_cast<long>(d) - 1, static_cast<long>(d)));
    CHECK(relative_mean_length_at(diff, sigma) == q(static_cast<long>(d) - 1, static_cast<long>(d)));
    RelativePair two{1, {vec(z, "2")}, {vec(z, "1")}, {z->integer(1)}};
    CHECK(relative_mean_length_at(two, sigma) == 1);
  }
}

TEST_CASE("monotonicity and the upper bound") {
  CounterRng rng(31, 0);
  const auto z = make_group(Group::integer_line());
  const auto f2 = make_group(Group::free_group(2));
  for (int trial = 0; trial < 15; ++trial) {
    const bool free_case = trial % 2;
    const auto g = free_case ? f2 : z;
    const auto sigma = free_case ? build_random_free(f2, 12, trial) : build_cyclic(9);
    const std::size_t n = 1 + rng.below(2);
    auto random_vec = [&] {
      FreeModuleVector v;
      for (std::size_t j = 0; j < n; ++j) v.components.push_back(brute::random_element(rng, g, g->ball(1), 3, 3));
      return v;
    };
    std::vector<FreeModuleVector> A = {random_vec()};
    std::vector<FreeModuleVector> B = {random_vec()};
    std::vector<GroupElement> F = {g->ball(1).back()};
    const auto base = relative_mean_length_at({n, A, B, F}, sigma);

    auto bigger_B = B;
    bigger_B.push_back(random_vec());
    CHECK(relative_mean_length_at({n, A, bigger_B, F}, sigma) <= base);
    CHECK(relative_mean_length_at({n, A, B, g->ball(1)}, sigma) <= base);
    auto bigger_A = A;
    bigger_A.push_back(random_vec());
    CHECK(relative_mean_length_at({n, bigger_A, B, F}, sigma) >= base);

    // Upper bound: rank of the coefficient span of A.
    std::map<std::pair<GroupElement, std::size_t>, std::size_t> coords;
    for (const auto& a : bigger_A)
      for (std::size_t j = 0; j < n; ++j)
        for (const auto& [h, c] : a.components[j].terms()) coords.emplace(std::make_pair(h, j), coords.size());
    std::vector<std::vector<mpq_class>> rows(bigger_A.size(), std::vector<mpq_class>(coords.size()));
    for (std::size_t i = 0; i < bigger_A.size(); ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (const auto& [h, c] : bigger_A[i].components[j].terms()) rows[i][coords.at({h, j})] = c;
    CHECK(relative_mean_length_at({n, bigger_A, B, F}, sigma) <= static_cast<long>(brute::rank_q(rows)));
  }
}

TEST_CASE("estimators on the circulant example") {
  const auto z = make_group(Group::integer_line());
  const SoficSchedule schedule{{100, 1000}, {1}};
  const auto est = estimate_mean_length(1, {vec(z, "1@1 -1")}, {z->ball(1)}, {{vec(z, "1")}}, schedule,
                                        cyclic_factory());
  CHECK(est.headline_exact == q(999, 1000));
  CHECK(est.series.size() == 2);
  CHECK(est.series[0].value == q(99, 100));
  CHECK(est.spread == 0);
  CHECK(est.snapped == 1);

  const auto basis = estimate_mean_length(2, FreeModuleVector::standard_basis(z, kZ, 2), {z->ball(1)},
                                          {FreeModuleVector::standard_basis(z, kZ, 2)}, schedule, cyclic_factory());
  CHECK(basis.headline_exact == 2);
  CHECK(basis.spread == 0);

  const auto f = one_by_one(z, "1@1 -1");
  const auto vrk = estimate_vrk_fp(f, schedule, cyclic_factory());
  CHECK(vrk.quantity == "vrk");
  CHECK(vrk.series[0].value == q(1, 100));
  CHECK(vrk.headline_exact == q(1, 1000));
  CHECK(vrk.duality_checks == 2);
  CHECK(vrk.snapped == 0);
  const auto mrk = estimate_mrk_fp(f, schedule, cyclic_factory());
  CHECK(mrk.headline_exact == q(999, 1000));

  for (const auto& p : estimate_vrk_fp(one_by_one(z, "0"), schedule, cyclic_factory()).series) CHECK(p.value == 1);
  for (const auto& p : estimate_vrk_fp(one_by_one(z, "2"), schedule, cyclic_factory()).series) CHECK(p.value == 0);
  CHECK_THROWS_AS(estimate_vrk_fp(one_by_one(z, "1@1 -1", CoefficientRing::prime_field(5)), schedule, cyclic_factory()),
                  UnsupportedError);
  const auto mod5 = estimate_mrk_fp(one_by_one(z, "1@1 -1", CoefficientRing::prime_field(5)), schedule, cyclic_factory());
  CHECK(mod5.headline_exact == q(999, 1000));
}

TEST_CASE("estimates are independent of worker count") {
  const auto f2 = make_group(Group::free_group(2));
  const auto f = one_by_one(f2, "1@s1 1@s2 -2");
  const SoficSchedule schedule{{50, 200}, {1, 2, 3}};
  auto factory = [f2](std::size_t d, std::uint64_t seed) { return build_random_free(f2, d, seed); };
  EstimateOptions serial, threaded;
  threaded.jobs = 3;
  const auto a = estimate_vrk_fp(f, schedule, factory, serial);
  const auto b = estimate_vrk_fp(f, schedule, factory, threaded);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(a.series[i].value == b.series[i].value);
  CHECK(a.headline_exact == b.headline_exact);
}

TEST_CASE("snapping to the candidate value set") {
  const auto z = Group::integer_line();
  CHECK(snap_to_H(0.998, z, 0.01) == 1);
  CHECK_FALSE(snap_to_H(0.47, z, 0.01).has_value());
  CHECK(snap_to_H(0.332, Group::cyclic(3), 0.01) == q(1, 3));
  CHECK(snap_to_H(0.5, Group::symmetric(3), 0.01) == q(1, 2));
  CHECK_THROWS(snap_to_H(0.5, z, 0));
}

TEST_CASE("addition check") {
  const auto z = make_group(Group::integer_line());
  const SoficSchedule schedule{{100, 2000}, {1}};
  const auto rep = check_addition(one_by_one(z, "1@1 -1"), schedule, cyclic_factory());
  CHECK(rep.max_residual_routes == 0);
  CHECK(rep.max_residual_sum == 0);
  CHECK(rep.points.back().relative == q(1999, 2000));

  GroupRingMatrix zero(z, kZ, 1, 2);
  const auto zr = check_addition(zero, schedule, cyclic_factory());
  for (const auto& p : zr.points) {
    CHECK(p.relative == 0);
    CHECK(p.quotient == 2);
    CHECK(p.relative + p.quotient == 2);
  }
}

TEST_CASE("restriction reproduces cyclic values") {
  // Find a seed whose sigma_s is a single d-cycle; the restricted map is then
  // conjugate to the cyclic one and every rank agrees.
  const auto f2 = make_group(Group::free_group(2));
  const auto z = make_group(Group::integer_line());
  const Homomorphism embed(z, f2, {f2->word({1})});
  CounterRng rng(8, 8);
  for (std::size_t d : {7, 11}) {
    std::optional<SoficMap> sigma;
    for (std::uint64_t seed = 1; seed < 500 && !sigma; ++seed) {
      auto candidate = build_random_free(f2, d, seed);
      if (cycle_count(candidate.permutation(f2->word({1}))) == 1) sigma = candidate;
    }
    REQUIRE(sigma.has_value());
    const auto restricted = restrict(*sigma, embed);
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = brute::random_matrix(rng, z, 2, 2, 3);
      CHECK(principal_mean_rank_at(f, restricted) == principal_mean_rank_at(f, build_cyclic(d)));
      RelativePair pair{2, FreeModuleVector::rows_of(f), FreeModuleVector::standard_basis(z, kZ, 2), z->ball(1)};
      CHECK(relative_mean_length_at(pair, restricted) == relative_mean_length_at(pair, build_cyclic(d)));
    }
  }
}

TEST_CASE("windows reject escaping elements") {
  const auto z = Group::integer_line();
  const CoordinateWindow w({z.integer(0), z.integer(1)}, 3, 2);
  CHECK(w.size() == 12);
  CHECK(w.index(2, z.integer(1), 1) == 11);
  CHECK_THROWS(w.index(0, z.integer(5), 0));
}
