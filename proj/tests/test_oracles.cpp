#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "brute.hpp"
#include "soficlen/oracles.hpp"

using namespace soficlen;

namespace {

const auto kZ = CoefficientRing::integers();

FreeModuleVector vec(const GroupPtr& g, const std::string& text) { return FreeModuleVector::parse(g, kZ, text); }

GroupRingMatrix one_by_one(const GroupPtr& g, const std::string& text) {
  return GroupRingMatrix::from_rows({{GroupRingElement::parse(g, kZ, text)}});
}

}  // namespace

TEST_CASE("Folner examples") {
  const auto z = make_group(Group::integer_line());
  const std::vector<FolnerBox> ten = {FolnerBox{{10}}};
  CHECK(folner_mean_length({vec(z, "1")}, ten).back().value == 1);
  CHECK(folner_mean_length({vec(z, "1@1 -1")}, ten).back().value == 1);
  CHECK(folner_mean_length({vec(z, "2")}, ten).back().value == 1);
  // Two rows spanning the same Q[t, 1/t]-line: translates overlap.
  const auto series = folner_mean_length({vec(z, "1@1 -1"), vec(z, "1@2 -1")}, {FolnerBox{{10}}, FolnerBox{{100}}});
  CHECK(series[0].value == mpq_class(11, 10));
  CHECK(series[1].value == mpq_class(101, 100));
  CHECK_THROWS(folner_mean_length({vec(make_group(Group::free_group(2)), "1")}, ten));
}

TEST_CASE("Folner values stay within the coefficient span bound") {
  CounterRng rng(17, 0);
  const auto z2 = make_group(Group::lattice(2));
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FreeModuleVector> A;
    const std::size_t count = 1 + rng.below(3);
    for (std::size_t i = 0; i < count; ++i) {
      FreeModuleVector v;
      for (int j = 0; j < 2; ++j) v.components.push_back(brute::random_element(rng, z2, z2->ball(1), 3, 3));
      A.push_back(v);
    }
    const auto series = folner_mean_length(A, {FolnerBox{{3, 3}}, FolnerBox{{6, 6}}, FolnerBox{{12, 12}}});
    for (const auto& p : series) {
      CHECK(p.value >= 0);
      CHECK(p.value <= static_cast<long>(count));
    }
    // Boundary terms shrink along nested boxes.
    CHECK(series[2].value <= series[0].value);
  }
}

TEST_CASE("finite group oracle examples") {
  const auto c2 = make_group(Group::cyclic(2));
  CHECK(finite_group_vrk(one_by_one(c2, "1 1@1")) == mpq_class(1, 2));
  CHECK(finite_group_vrk(one_by_one(c2, "1")) == 0);
  CHECK(finite_group_vrk(one_by_one(c2, "0")) == 1);
  const auto c3 = make_group(Group::cyclic(3));
  CHECK(finite_group_vrk(one_by_one(c3, "1 1@1 1@2")) == mpq_class(2, 3));
  CHECK_THROWS(finite_group_vrk(one_by_one(make_group(Group::integer_line()), "1")));
}

TEST_CASE("finite group oracle values have denominators dividing the order") {
  CounterRng rng(23, 0);
  const auto s3 = make_group(Group::symmetric(3));
  const auto c6 = make_group(Group::cyclic(6));
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = trial % 2 ? s3 : c6;
    const auto f = brute::random_matrix(rng, g, 1 + rng.below(2), 1 + rng.below(2), 1, 1, 3);
    const auto v = finite_group_vrk(f);
    CHECK(6 % v.get_den() == 0);
    CHECK(v >= 0);
    CHECK(v <= static_cast<long>(f.cols()));
    // Agrees with the sofic route under the regular action.
    const auto est = estimate_vrk_fp(f, SoficSchedule{{6}, {1}}, [g](std::size_t, std::uint64_t) {
      return build_translation(g);
    });
    CHECK(est.headline_exact == v);
  }
}

TEST_CASE("Laurent rank examples") {
  const auto z = make_group(Group::integer_line());
  const auto z2 = make_group(Group::lattice(2));
  const auto r = laurent_rank(one_by_one(z, "1@1 -1"), 1);
  CHECK(r.rank == 1);
  CHECK(r.vrk == 0);
  CHECK(r.agreement);
  const auto row = GroupRingMatrix::from_rows(
      {{GroupRingElement::parse(z2, kZ, "1@1,0 -1"), GroupRingElement::parse(z2, kZ, "1@0,1 -1")}});
  CHECK(laurent_rank(row, 2).rank == 1);
  CHECK(laurent_rank(row, 2).vrk == 1);
  const auto zero = laurent_rank(one_by_one(z, "0"), 3);
  CHECK(zero.rank == 0);
  CHECK(zero.vrk == 1);
  // A singular 2x2 over Q(t): second row is (1 + t) times the first.
  const auto sing = GroupRingMatrix::from_rows(
      {{GroupRingElement::parse(z, kZ, "1@1 -1"), GroupRingElement::parse(z, kZ, "2")},
       {GroupRingElement::parse(z, kZ, "1@2 -1"), GroupRingElement::parse(z, kZ, "2 2@1")}});
  CHECK(laurent_rank(sing, 4).rank == 1);
}

TEST_CASE("Laurent rank is invariant under unit multiplication") {
  CounterRng rng(29, 0);
  const auto z2 = make_group(Group::lattice(2));
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(3), n = 1 + rng.below(3);
    auto f = brute::random_matrix(rng, z2, m, n, 1, 2, 2);
    if (trial % 3 == 0) {
      // Force a dependency between rows.
      for (std::size_t j = 0; j < n && m > 1; ++j) f.set(m - 1, j, f(0, j) * GroupRingElement::parse(z2, kZ, "1@1,0 2"));
    }
    const auto base = laurent_rank(f, 5).rank;
    const auto g = z2->ball(2)[rng.below(13)];
    const auto left = mat_mul(GroupRingMatrix::identity(z2, kZ, m), f);
    auto shifted_left = left, shifted_right = left;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        shifted_left.set(i, j, GroupRingElement::monomial(z2, kZ, g) * f(i, j));
        shifted_right.set(i, j, f(i, j) * GroupRingElement::monomial(z2, kZ, g));
      }
    CHECK(laurent_rank(shifted_left, 6).rank == base);
    CHECK(laurent_rank(shifted_right, 7).rank == base);
  }
}

TEST_CASE("Laurent rank predicts the cyclic vrk") {
  // d prime: a degree-6 integer polynomial cannot vanish at a primitive d-th
  // root of unity, so rank can drop only at t = 1, by at most min(m, n).
  CounterRng rng(37, 0);
  const auto z = make_group(Group::integer_line());
  const std::size_t d = 997;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng.below(2), n = 1 + rng.below(2);
    const auto f = brute::random_matrix(rng, z, m, n, 3);
    const auto est = estimate_vrk_fp(f, SoficSchedule{{d}, {1}}, [](std::size_t dd, std::uint64_t) {
      return build_cyclic(dd);
    });
    const auto oracle = laurent_rank(f, trial).vrk;
    CHECK(std::abs(est.headline - static_cast<double>(oracle)) <= 2.0 / d + 1e-12);
  }
}

TEST_CASE("compare reports") {
  MeanLengthEstimate est;
  est.headline = 0.999;
  auto r = compare(est, 1, 0.01);
  CHECK(r.pass);
  CHECK(r.residual == doctest::Approx(0.001));
  est.headline = 0.5;
  CHECK_FALSE(compare(est, 1, 0.01).pass);
  est.headline = 1;
  est.spread = 0.05;
  r = compare(est, 1, 0.01);
  CHECK_FALSE(r.pass);
  CHECK(r.unstable);
}
