#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace soficlen {

/// Raised when two operands come from different groups or an element does
/// not have the shape its group expects.
class GroupMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GroupFamily { IntegerLine, Lattice, Free, Finite };

/// Normal-form group element. The payload is interpreted by the owning
/// Group:
///   IntegerLine  one integer
///   Lattice(k)   k integers
///   Free(k)      reduced word of signed letters, +i for s_i and -i for s_i^-1 (1-based)
///   Finite       one table index
/// Normal forms are unique, so structural equality is group equality.
struct GroupElement {
  std::vector<std::int64_t> data;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement& a, const GroupElement& b) {
    // Shorter words first keeps balls and supports in a readable order.
    if (a.data.size() != b.data.size()) return a.data.size() <=> b.data.size();
    return a.data <=> b.data;
  }
};

/// Multiplication table of a finite group. Entry (a, b) is the index of a*b.
struct FiniteTable {
  std::size_t order = 0;
  std::vector<std::uint32_t> product;  // row-major, order x order

  std::uint32_t operator()(std::uint32_t a, std::uint32_t b) const {
    return product[static_cast<std::size_t>(a) * order + b];
  }
};

/// Descriptor of one of the supported group families together with its
/// normal-form arithmetic.
class Group {
 public:
  static Group integer_line();
  static Group lattice(int k);
  static Group free_group(int k);
  /// Validates the table (identity at index 0, Latin square, inverses,
  /// associativity; exhaustive up to order 64, sampled above).
  static Group finite(FiniteTable table, std::string name = "finite");
  static Group cyclic(std::size_t n);
  static Group symmetric(int k);
  /// Reads the finite-group table format: first line the order N, then N
  /// lines of N whitespace-separated 0-based indices. Identity is index 0.
  static Group read_table(std::istream& in, std::string name = "finite");
  static Group read_table_file(const std::string& path);
  /// Parses a group name: Z, Z^k, Fk (or F_k), Cn, Sk, table:<path>.
  static Group parse(std::string_view text);

  GroupFamily family() const { return family_; }
  /// k for Lattice and Free, 1 for IntegerLine, 0 for Finite.
  int rank() const { return rank_; }
  /// Order for Finite groups, 0 (infinite) otherwise.
  std::size_t order() const { return table_.order; }
  bool is_finite() const { return family_ == GroupFamily::Finite; }
  bool torsion_free() const { return family_ != GroupFamily::Finite; }
  const FiniteTable& table() const { return table_; }
  const std::string& name() const { return name_; }

  GroupElement identity() const;
  GroupElement multiply(const GroupElement& g, const GroupElement& h) const;
  GroupElement inverse(const GroupElement& g) const;
  GroupElement power(const GroupElement& g, std::int64_t exponent) const;
  bool is_identity(const GroupElement& g) const { return g == identity(); }

  /// Standard generators (not including inverses): 1 for Z, e_i for Z^k,
  /// s_i for F_k, and every non-identity element for Finite groups.
  std::vector<GroupElement> generators() const;
  /// Word-metric ball with respect to the symmetric standard generating set,
  /// sorted. Finite groups ignore the radius and return all elements.
  std::vector<GroupElement> ball(int radius) const;

  /// Throws GroupMismatch unless g has the normal-form shape of this group.
  void check(const GroupElement& g) const;
  bool contains(const GroupElement& g) const;

  // Element constructors.
  GroupElement integer(std::int64_t n) const;
  GroupElement vector(std::vector<std::int64_t> coords) const;
  /// Reduces an arbitrary signed-letter word into normal form.
  GroupElement word(std::vector<std::int64_t> letters) const;
  GroupElement finite_element(std::uint32_t index) const;

  /// Text form used by the matrix format: `e`, integers for Z, `a,b` for
  /// Z^k, `s1.s2^-1` for F_k, table indices for finite groups.
  std::string format(const GroupElement& g) const;
  GroupElement parse_element(std::string_view text) const;

  friend bool operator==(const Group& a, const Group& b) {
    return a.family_ == b.family_ && a.rank_ == b.rank_ &&
           a.table_.order == b.table_.order && a.table_.product == b.table_.product;
  }

 private:
  Group(GroupFamily family, int rank, FiniteTable table, std::string name);

  GroupFamily family_;
  int rank_;
  FiniteTable table_;
  std::vector<std::uint32_t> inverse_;  // Finite only
  std::string name_;
};

}  // namespace soficlen
