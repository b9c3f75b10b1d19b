#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "soficlen/group.hpp"

namespace soficlen {

using GroupPtr = std::shared_ptr<const Group>;

inline GroupPtr make_group(Group g) { return std::make_shared<const Group>(std::move(g)); }

/// Z, Q or GF(p). Coefficients are carried as GMP rationals and normalized
/// into the ring: integral for Z, reduced into [0, p) for GF(p).
class CoefficientRing {
 public:
  enum class Kind { Integers, Rationals, PrimeField };

  static CoefficientRing integers() { return CoefficientRing(Kind::Integers, 0); }
  static CoefficientRing rationals() { return CoefficientRing(Kind::Rationals, 0); }
  /// p must be a prime below 2^62.
  static CoefficientRing prime_field(std::uint64_t p);
  /// Z, Q, GF(p) or GFp.
  static CoefficientRing parse(std::string_view text);

  Kind kind() const { return kind_; }
  std::uint64_t prime() const { return p_; }
  bool is_prime_field() const { return kind_ == Kind::PrimeField; }
  /// Coefficients embed in the algebraic numbers (Z or Q).
  bool is_characteristic_zero() const { return kind_ != Kind::PrimeField; }
  std::string name() const;

  /// Throws std::invalid_argument if c is not an element of the ring
  /// (a non-integer over Z, or a fraction whose denominator is 0 mod p).
  mpq_class normalize(const mpq_class& c) const;

  friend bool operator==(const CoefficientRing&, const CoefficientRing&) = default;

 private:
  CoefficientRing(Kind kind, std::uint64_t p) : kind_(kind), p_(p) {}
  Kind kind_;
  std::uint64_t p_;
};

/// A finitely supported function from the group to the coefficient ring.
class GroupRingElement {
 public:
  using Terms = std::map<GroupElement, mpq_class>;

  GroupRingElement(GroupPtr group, CoefficientRing ring);
  GroupRingElement(GroupPtr group, CoefficientRing ring, const Terms& terms);

  static GroupRingElement zero(GroupPtr group, CoefficientRing ring) { return {std::move(group), ring}; }
  static GroupRingElement one(GroupPtr group, CoefficientRing ring);
  static GroupRingElement monomial(GroupPtr group, CoefficientRing ring, const GroupElement& g,
                                   const mpq_class& c = 1);
  /// Parses whitespace-separated `coef@word` terms (a bare coefficient sits at e).
  static GroupRingElement parse(GroupPtr group, CoefficientRing ring, std::string_view text);

  const GroupPtr& group_ptr() const { return group_; }
  const Group& group() const { return *group_; }
  const CoefficientRing& ring() const { return ring_; }
  const Terms& terms() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  std::vector<GroupElement> support() const;
  mpq_class coefficient(const GroupElement& g) const;

  /// Adds c at g, pruning a resulting zero.
  void add_term(const GroupElement& g, const mpq_class& c);

  GroupRingElement operator+(const GroupRingElement& other) const;
  GroupRingElement operator-(const GroupRingElement& other) const;
  GroupRingElement operator-() const;
  /// Convolution (sum f_s s)(sum g_t t) = sum f_s g_t (st).
  GroupRingElement operator*(const GroupRingElement& other) const;
  GroupRingElement scaled(const mpq_class& c) const;
  /// s * this, for a group element s.
  GroupRingElement left_translate(const GroupElement& s) const;

  /// Same group and ring; throws GroupMismatch otherwise.
  void check_compatible(const GroupRingElement& other) const;
  bool same_algebra(const GroupRingElement& other) const;

  std::string format() const;

  friend bool operator==(const GroupRingElement& a, const GroupRingElement& b) {
    return a.same_algebra(b) && a.coeffs_ == b.coeffs_;
  }

 private:
  GroupPtr group_;
  CoefficientRing ring_;
  Terms coeffs_;
};

inline GroupRingElement gr_add(const GroupRingElement& a, const GroupRingElement& b) { return a + b; }
inline GroupRingElement gr_mul(const GroupRingElement& a, const GroupRingElement& b) { return a * b; }

/// m x n matrix over the group ring.
class GroupRingMatrix {
 public:
  GroupRingMatrix(GroupPtr group, CoefficientRing ring, std::size_t rows, std::size_t cols);

  static GroupRingMatrix identity(GroupPtr group, CoefficientRing ring, std::size_t k);
  static GroupRingMatrix from_rows(const std::vector<std::vector<GroupRingElement>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const GroupPtr& group_ptr() const { return group_; }
  const Group& group() const { return *group_; }
  const CoefficientRing& ring() const { return ring_; }

  const GroupRingElement& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  /// Replaces an entry after checking it belongs to the same group ring.
  void set(std::size_t i, std::size_t j, GroupRingElement value);

  bool is_identity() const;
  /// Union of the supports of all entries, sorted.
  std::vector<GroupElement> support() const;

  friend bool operator==(const GroupRingMatrix& a, const GroupRingMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  GroupPtr group_;
  CoefficientRing ring_;
  std::size_t rows_, cols_;
  std::vector<GroupRingElement> entries_;
};

GroupRingMatrix mat_mul(const GroupRingMatrix& a, const GroupRingMatrix& b);

/// Reads the matrix text format: header `m n ring group`, then lines
/// `i j coef@word ...` (0-based indices; unlisted entries are zero).
/// Blank lines and `#` comments are skipped. Errors carry line numbers.
GroupRingMatrix read_matrix(std::istream& in);
GroupRingMatrix read_matrix(std::istream& in, GroupPtr group);
void write_matrix(std::ostream& out, const GroupRingMatrix& m);

namespace direct_finite {
struct NotLeftInverse {};
struct ConfirmedTwoSided {};
struct Counterexample {
  GroupRingMatrix ba;
};
}  // namespace direct_finite

using DirectFiniteVerdict =
    std::variant<direct_finite::NotLeftInverse, direct_finite::ConfirmedTwoSided, direct_finite::Counterexample>;

/// Tests whether ab = 1 implies ba = 1 for this pair of square matrices.
DirectFiniteVerdict check_direct_finite(const GroupRingMatrix& a, const GroupRingMatrix& b);

std::string verdict_name(const DirectFiniteVerdict& v);

}  // namespace soficlen
