#include "soficlen/groupring.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "soficlen/modular.hpp"

namespace soficlen {

namespace {

mpq_class parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty coefficient");
  std::string s(text);
  if (s == "+") return 1;
  if (s == "-") return -1;
  if (s.front() == '+') s.erase(0, 1);
  mpq_class q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("cannot parse coefficient '" + std::string(text) + "'");
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  q.canonicalize();
  return q;
}

std::string format_rational(const mpq_class& q) { return q.get_str(); }

}  // namespace

CoefficientRing CoefficientRing::prime_field(std::uint64_t p) {
  if (p >= (1ULL << 62)) throw std::invalid_argument("prime field modulus must be below 2^62");
  if (!modular::is_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
  return CoefficientRing(Kind::PrimeField, p);
}

CoefficientRing CoefficientRing::parse(std::string_view text) {
  if (text == "Z") return integers();
  if (text == "Q") return rationals();
  if (text.rfind("GF", 0) == 0) {
    std::string_view digits = text.substr(2);
    if (!digits.empty() && digits.front() == '(' && digits.back() == ')') {
      digits = digits.substr(1, digits.size() - 2);
    }
    std::uint64_t p = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), p);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
      throw std::invalid_argument("cannot parse field '" + std::string(text) + "'");
    }
    return prime_field(p);
  }
  throw std::invalid_argument("unknown coefficient ring '" + std::string(text) + "'");
}

std::string CoefficientRing::name() const {
  switch (kind_) {
    case Kind::Integers: return "Z";
    case Kind::Rationals: return "Q";
    case Kind::PrimeField: return "GF(" + std::to_string(p_) + ")";
  }
  return {};
}

mpq_class CoefficientRing::normalize(const mpq_class& c) const {
  switch (kind_) {
    case Kind::Integers:
      if (c.get_den() != 1) throw std::invalid_argument("coefficient " + c.get_str() + " is not an integer");
      return c;
    case Kind::Rationals: return c;
    case Kind::PrimeField: {
      const mpz_class p(static_cast<unsigned long>(p_));
      mpz_class num = c.get_num() % p;
      mpz_class den = c.get_den() % p;
      if (den == 0) throw std::invalid_argument("coefficient " + c.get_str() + " has denominator divisible by p");
      mpz_class den_inv;
      mpz_invert(den_inv.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
      mpz_class r = (num * den_inv) % p;
      if (r < 0) r += p;
      return mpq_class(r);
    }
  }
  return c;
}

GroupRingElement::GroupRingElement(GroupPtr group, CoefficientRing ring)
    : group_(std::move(group)), ring_(ring) {
  if (!group_) throw std::invalid_argument("group ring element needs a group");
}

GroupRingElement::GroupRingElement(GroupPtr group, CoefficientRing ring, const Terms& terms)
    : GroupRingElement(std::move(group), ring) {
  for (const auto& [g, c] : terms) add_term(g, c);
}

GroupRingElement GroupRingElement::one(GroupPtr group, CoefficientRing ring) {
  const auto e = group->identity();
  return monomial(std::move(group), ring, e, 1);
}

GroupRingElement GroupRingElement::monomial(GroupPtr group, CoefficientRing ring, const GroupElement& g,
                                            const mpq_class& c) {
  GroupRingElement r(std::move(group), ring);
  r.add_term(g, c);
  return r;
}

GroupRingElement GroupRingElement::parse(GroupPtr group, CoefficientRing ring, std::string_view text) {
  GroupRingElement r(group, ring);
  std::istringstream in{std::string(text)};
  std::string term;
  while (in >> term) {
    const auto at = term.find('@');
    if (at == std::string::npos) {
      r.add_term(group->identity(), parse_rational(term));
    } else {
      r.add_term(group->parse_element(std::string_view(term).substr(at + 1)),
                 parse_rational(std::string_view(term).substr(0, at)));
    }
  }
  return r;
}

std::vector<GroupElement> GroupRingElement::support() const {
  std::vector<GroupElement> s;
  s.reserve(coeffs_.size());
  for (const auto& [g, c] : coeffs_) s.push_back(g);
  return s;
}

mpq_class GroupRingElement::coefficient(const GroupElement& g) const {
  const auto it = coeffs_.find(g);
  return it == coeffs_.end() ? mpq_class(0) : it->second;
}

void GroupRingElement::add_term(const GroupElement& g, const mpq_class& c) {
  group_->check(g);
  const mpq_class value = ring_.normalize(c);
  if (value == 0) return;
  auto [it, inserted] = coeffs_.try_emplace(g, value);
  if (!inserted) {
    it->second = ring_.normalize(it->second + value);
    if (it->second == 0) coeffs_.erase(it);
  }
}

bool GroupRingElement::same_algebra(const GroupRingElement& other) const {
  return ring_ == other.ring_ && (group_ == other.group_ || *group_ == *other.group_);
}

void GroupRingElement::check_compatible(const GroupRingElement& other) const {
  if (!same_algebra(other)) {
    throw GroupMismatch("group ring mismatch: " + ring_.name() + "[" + group_->name() + "] vs " +
                        other.ring_.name() + "[" + other.group_->name() + "]");
  }
}

GroupRingElement GroupRingElement::operator+(const GroupRingElement& other) const {
  check_compatible(other);
  GroupRingElement r = *this;
  for (const auto& [g, c] : other.coeffs_) r.add_term(g, c);
  return r;
}

GroupRingElement GroupRingElement::operator-() const { return scaled(-1); }

GroupRingElement GroupRingElement::operator-(const GroupRingElement& other) const { return *this + (-other); }

GroupRingElement GroupRingElement::operator*(const GroupRingElement& other) const {
  check_compatible(other);
  GroupRingElement r(group_, ring_);
  for (const auto& [s, fs] : coeffs_) {
    for (const auto& [t, gt] : other.coeffs_) r.add_term(group_->multiply(s, t), fs * gt);
  }
  return r;
}

GroupRingElement GroupRingElement::scaled(const mpq_class& c) const {
  GroupRingElement r(group_, ring_);
  for (const auto& [g, x] : coeffs_) r.add_term(g, x * c);
  return r;
}

GroupRingElement GroupRingElement::left_translate(const GroupElement& s) const {
  GroupRingElement r(group_, ring_);
  for (const auto& [g, x] : coeffs_) r.add_term(group_->multiply(s, g), x);
  return r;
}

std::string GroupRingElement::format() const {
  if (coeffs_.empty()) return "0";
  std::string out;
  for (const auto& [g, c] : coeffs_) {
    if (!out.empty()) out += ' ';
    out += format_rational(c) + "@" + group_->format(g);
  }
  return out;
}

GroupRingMatrix::GroupRingMatrix(GroupPtr group, CoefficientRing ring, std::size_t rows, std::size_t cols)
    : group_(std::move(group)), ring_(ring), rows_(rows), cols_(cols) {
  if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("matrix dimensions must be positive");
  entries_.assign(rows_ * cols_, GroupRingElement(group_, ring_));
}

GroupRingMatrix GroupRingMatrix::identity(GroupPtr group, CoefficientRing ring, std::size_t k) {
  GroupRingMatrix m(group, ring, k, k);
  for (std::size_t i = 0; i < k; ++i) m.set(i, i, GroupRingElement::one(group, ring));
  return m;
}

GroupRingMatrix GroupRingMatrix::from_rows(const std::vector<std::vector<GroupRingElement>>& rows) {
  if (rows.empty() || rows.front().empty()) throw std::invalid_argument("matrix needs at least one entry");
  const auto& first = rows.front().front();
  GroupRingMatrix m(first.group_ptr(), first.ring(), rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw std::invalid_argument("ragged matrix rows");
    for (std::size_t j = 0; j < m.cols_; ++j) m.set(i, j, rows[i][j]);
  }
  return m;
}

void GroupRingMatrix::set(std::size_t i, std::size_t j, GroupRingElement value) {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index out of range");
  entries_[i * cols_ + j].check_compatible(value);
  entries_[i * cols_ + j] = std::move(value);
}

bool GroupRingMatrix::is_identity() const {
  if (rows_ != cols_) return false;
  const auto one = GroupRingElement::one(group_, ring_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const auto& x = (*this)(i, j);
      if (i == j ? !(x == one) : !x.is_zero()) return false;
    }
  }
  return true;
}

std::vector<GroupElement> GroupRingMatrix::support() const {
  std::set<GroupElement> s;
  for (const auto& x : entries_)
    for (const auto& [g, c] : x.terms()) s.insert(g);
  return {s.begin(), s.end()};
}

GroupRingMatrix mat_mul(const GroupRingMatrix& a, const GroupRingMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matrix dimension mismatch: " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
  a(0, 0).check_compatible(b(0, 0));
  GroupRingMatrix c(a.group_ptr(), a.ring(), a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t l = 0; l < b.cols(); ++l) {
      GroupRingElement acc(a.group_ptr(), a.ring());
      for (std::size_t j = 0; j < a.cols(); ++j) acc = acc + a(i, j) * b(j, l);
      c.set(i, l, std::move(acc));
    }
  }
  return c;
}

namespace {

GroupRingMatrix read_matrix_impl(std::istream& in, GroupPtr fixed_group) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> std::invalid_argument {
    return std::invalid_argument("matrix line " + std::to_string(line_no) + ": " + msg);
  };
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw std::invalid_argument("matrix: missing header `m n ring group`");
  std::istringstream header(line);
  std::size_t m = 0, n = 0;
  std::string ring_text, group_text;
  if (!(header >> m >> n >> ring_text >> group_text)) throw fail("expected header `m n ring group`");
  try {
    const auto ring = CoefficientRing::parse(ring_text);
    GroupPtr group = fixed_group;
    if (group_text.rfind("table:", 0) == 0 && fixed_group && fixed_group->is_finite()) {
      // Keep the caller's descriptor; the path may be relative to a different directory.
    } else {
      auto parsed = make_group(Group::parse(group_text));
      if (group && !(*group == *parsed)) throw fail("matrix group " + group_text + " differs from " + group->name());
      group = parsed;
    }
    GroupRingMatrix mat(group, ring, m, n);
    std::vector<char> seen(m * n, 0);
    while (next_line()) {
      std::istringstream row(line);
      long long i = -1, j = -1;
      if (!(row >> i >> j)) throw fail("expected `i j terms...`");
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= m || static_cast<std::size_t>(j) >= n) {
        throw fail("entry index out of range");
      }
      const auto idx = static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j);
      if (seen[idx]++) throw fail("duplicate entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      std::string rest;
      std::getline(row, rest);
      mat.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), GroupRingElement::parse(group, ring, rest));
    }
    return mat;
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind("matrix line", 0) == 0) throw;
    throw fail(what);
  }
}

}  // namespace

GroupRingMatrix read_matrix(std::istream& in) { return read_matrix_impl(in, nullptr); }

GroupRingMatrix read_matrix(std::istream& in, GroupPtr group) { return read_matrix_impl(in, std::move(group)); }

void write_matrix(std::ostream& out, const GroupRingMatrix& m) {
  out << m.rows() << ' ' << m.cols() << ' ' << m.ring().name() << ' ' << m.group().name() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (!m(i, j).is_zero()) out << i << ' ' << j << ' ' << m(i, j).format() << '\n';
    }
  }
}

DirectFiniteVerdict check_direct_finite(const GroupRingMatrix& a, const GroupRingMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("check_direct_finite needs square matrices of equal size");
  }
  if (!mat_mul(a, b).is_identity()) return direct_finite::NotLeftInverse{};
  auto ba = mat_mul(b, a);
  if (ba.is_identity()) return direct_finite::ConfirmedTwoSided{};
  return direct_finite::Counterexample{std::move(ba)};
}

std::string verdict_name(const DirectFiniteVerdict& v) {
  switch (v.index()) {
    case 0: return "NotLeftInverse";
    case 1: return "ConfirmedTwoSided";
    default: return "Counterexample";
  }
}

}  // namespace soficlen
