#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "soficlen/group.hpp"
#include "soficlen/rng.hpp"

using namespace soficlen;

TEST_CASE("integer line arithmetic") {
  const auto z = Group::integer_line();
  CHECK(z.multiply(z.integer(3), z.integer(-5)) == z.integer(-2));
  CHECK(z.inverse(z.integer(7)) == z.integer(-7));
  CHECK(z.power(z.integer(2), 5) == z.integer(10));
  CHECK(z.is_identity(z.integer(0)));
  CHECK(z.ball(2).size() == 5);
  CHECK(z.torsion_free());
}

TEST_CASE("lattice arithmetic and balls") {
  const auto z2 = Group::lattice(2);
  CHECK(z2.multiply(z2.vector({1, 2}), z2.vector({-1, 3})) == z2.vector({0, 5}));
  CHECK(z2.ball(1).size() == 5);
  CHECK(z2.ball(2).size() == 13);
  CHECK_THROWS_AS(z2.check(z2.integer(1)), GroupMismatch);
}

TEST_CASE("free group words reduce") {
  const auto f2 = Group::free_group(2);
  const auto s = f2.word({1}), t = f2.word({2});
  CHECK(f2.word({1, -1}) == f2.identity());
  CHECK(f2.word({1, 2, -2, -1, 2}) == t);
  CHECK(f2.multiply(f2.word({1, 2}), f2.word({-2, 1})) == f2.word({1, 1}));
  CHECK(f2.inverse(f2.multiply(s, t)) == f2.multiply(f2.inverse(t), f2.inverse(s)));
  CHECK(f2.power(s, -3) == f2.word({-1, -1, -1}));
  CHECK(f2.ball(1).size() == 5);
  CHECK(f2.ball(2).size() == 17);
  CHECK(f2.ball(3).size() == 53);
}

TEST_CASE("free group multiplication is associative on random words") {
  const auto f3 = Group::free_group(3);
  CounterRng rng(11, 0);
  auto random_word = [&] {
    std::vector<std::int64_t> letters(rng.below(8));
    for (auto& x : letters) x = rng.between(1, 3) * (rng.below(2) ? 1 : -1);
    return f3.word(letters);
  };
  for (int i = 0; i < 500; ++i) {
    const auto a = random_word(), b = random_word(), c = random_word();
    CHECK(f3.multiply(f3.multiply(a, b), c) == f3.multiply(a, f3.multiply(b, c)));
    CHECK(f3.multiply(a, f3.inverse(a)) == f3.identity());
  }
}

TEST_CASE("finite groups from tables") {
  const auto c6 = Group::cyclic(6);
  CHECK(c6.order() == 6);
  CHECK(c6.multiply(c6.finite_element(4), c6.finite_element(5)) == c6.finite_element(3));
  const auto s3 = Group::symmetric(3);
  CHECK(s3.order() == 6);
  bool commutative = true;
  for (const auto& a : s3.ball(0))
    for (const auto& b : s3.ball(0)) commutative = commutative && s3.multiply(a, b) == s3.multiply(b, a);
  CHECK_FALSE(commutative);
  CHECK(s3.ball(5).size() == 6);
  CHECK_FALSE(s3.torsion_free());

  std::istringstream bad("3\n0 1 2\n1 1 0\n2 0 1\n");
  CHECK_THROWS_AS(Group::read_table(bad), std::invalid_argument);
  std::istringstream nonassoc("3\n0 1 2\n1 0 2\n2 2 0\n");
  CHECK_THROWS(Group::read_table(nonassoc));
  std::istringstream good("2\n0 1\n1 0\n");
  CHECK(Group::read_table(good) == Group::cyclic(2));
}

TEST_CASE("symmetric group tables are groups of order k!") {
  CHECK(Group::symmetric(4).order() == 24);
  CHECK(Group::symmetric(5).order() == 120);
}

TEST_CASE("group names parse") {
  CHECK(Group::parse("Z").family() == GroupFamily::IntegerLine);
  CHECK(Group::parse("Z^3").rank() == 3);
  CHECK(Group::parse("F2").family() == GroupFamily::Free);
  CHECK(Group::parse("F_3").rank() == 3);
  CHECK(Group::parse("C4").order() == 4);
  CHECK(Group::parse("S3").order() == 6);
  CHECK_THROWS(Group::parse("Q8"));
  CHECK_THROWS(Group::parse("Z^0"));
}

TEST_CASE("element text round trips") {
  for (const auto& g : {Group::integer_line(), Group::lattice(2), Group::free_group(2), Group::symmetric(3)}) {
    std::set<std::string> seen;
    for (const auto& x : g.ball(2)) {
      const auto text = g.format(x);
      CHECK(g.parse_element(text) == x);
      CHECK(seen.insert(text).second);
    }
  }
  const auto f2 = Group::free_group(2);
  CHECK(f2.format(f2.identity()) == "e");
  CHECK(f2.parse_element("s1.s2^-1") == f2.word({1, -2}));
  CHECK(f2.parse_element("s1*s1^-1") == f2.identity());
  CHECK_THROWS(f2.parse_element("s3"));
}
