#include "soficlen/group.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

namespace soficlen {

namespace {

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw std::invalid_argument("cannot parse " + std::string(what) + " '" +
                                std::string(text) + "'");
  }
  return value;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Group::Group(GroupFamily family, int rank, FiniteTable table, std::string name)
    : family_(family), rank_(rank), table_(std::move(table)), name_(std::move(name)) {}

Group Group::integer_line() { return Group(GroupFamily::IntegerLine, 1, {}, "Z"); }

Group Group::lattice(int k) {
  if (k < 1) throw std::invalid_argument("lattice rank must be >= 1");
  return Group(GroupFamily::Lattice, k, {}, "Z^" + std::to_string(k));
}

Group Group::free_group(int k) {
  if (k < 1) throw std::invalid_argument("free group rank must be >= 1");
  return Group(GroupFamily::Free, k, {}, "F" + std::to_string(k));
}

Group Group::finite(FiniteTable table, std::string name) {
  const std::size_t n = table.order;
  if (n == 0) throw std::invalid_argument("finite group: order must be positive");
  if (table.product.size() != n * n) {
    throw std::invalid_argument("finite group: table must have order*order entries");
  }
  for (auto x : table.product) {
    if (x >= n) throw std::invalid_argument("finite group: index out of range");
  }
  // Identity at index 0.
  for (std::uint32_t a = 0; a < n; ++a) {
    if (table(0, a) != a || table(a, 0) != a) {
      throw std::invalid_argument("finite group: index 0 is not the identity");
    }
  }
  // Latin square: every row and column is a permutation.
  std::vector<char> seen(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::uint32_t b = 0; b < n; ++b) {
      if (seen[table(a, b)]++) throw std::invalid_argument("finite group: row is not a permutation");
    }
    std::fill(seen.begin(), seen.end(), 0);
    for (std::uint32_t b = 0; b < n; ++b) {
      if (seen[table(b, a)]++) throw std::invalid_argument("finite group: column is not a permutation");
    }
  }
  std::vector<std::uint32_t> inv(n, 0);
  for (std::uint32_t a = 0; a < n; ++a) {
    bool found = false;
    for (std::uint32_t b = 0; b < n; ++b) {
      if (table(a, b) == 0) {
        if (table(b, a) != 0) throw std::invalid_argument("finite group: one-sided inverse");
        inv[a] = b;
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("finite group: missing inverse");
  }
  auto assoc = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    return table(table(a, b), c) == table(a, table(b, c));
  };
  if (n <= 64) {
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = 0; b < n; ++b)
        for (std::uint32_t c = 0; c < n; ++c)
          if (!assoc(a, b, c)) throw std::invalid_argument("finite group: table is not associative");
  } else {
    // Deterministic sample of triples; exhaustive checking is cubic.
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    auto next = [&] {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      return static_cast<std::uint32_t>((state >> 33) % n);
    };
    for (int i = 0; i < 100000; ++i) {
      const auto a = next(), b = next(), c = next();
      if (!assoc(a, b, c)) throw std::invalid_argument("finite group: table is not associative");
    }
  }
  Group g(GroupFamily::Finite, 0, std::move(table), std::move(name));
  g.inverse_ = std::move(inv);
  return g;
}

Group Group::cyclic(std::size_t n) {
  if (n == 0) throw std::invalid_argument("cyclic group order must be positive");
  FiniteTable t{n, std::vector<std::uint32_t>(n * n)};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) t.product[a * n + b] = static_cast<std::uint32_t>((a + b) % n);
  return finite(std::move(t), "C" + std::to_string(n));
}

Group Group::symmetric(int k) {
  if (k < 1 || k > 5) throw std::invalid_argument("symmetric group supported for 1 <= k <= 5");
  std::vector<std::vector<int>> perms;
  std::vector<int> p(static_cast<std::size_t>(k));
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  // perms[0] is the identity because the enumeration starts sorted.
  const std::size_t n = perms.size();
  FiniteTable t{n, std::vector<std::uint32_t>(n * n)};
  std::vector<int> prod(static_cast<std::size_t>(k));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      // (a*b)(x) = a(b(x))
      for (int x = 0; x < k; ++x) prod[x] = perms[a][perms[b][x]];
      const auto it = std::find(perms.begin(), perms.end(), prod);
      t.product[a * n + b] = static_cast<std::uint32_t>(it - perms.begin());
    }
  }
  return finite(std::move(t), "S" + std::to_string(k));
}

Group Group::read_table(std::istream& in, std::string name) {
  std::size_t n = 0;
  if (!(in >> n) || n == 0) throw std::invalid_argument("group table: missing or invalid order");
  FiniteTable t{n, std::vector<std::uint32_t>(n * n)};
  for (std::size_t i = 0; i < n * n; ++i) {
    long long x = 0;
    if (!(in >> x)) {
      throw std::invalid_argument("group table: expected " + std::to_string(n * n) +
                                  " entries, got " + std::to_string(i));
    }
    if (x < 0 || static_cast<std::size_t>(x) >= n) {
      throw std::invalid_argument("group table: entry " + std::to_string(i) + " out of range");
    }
    t.product[i] = static_cast<std::uint32_t>(x);
  }
  return finite(std::move(t), std::move(name));
}

Group Group::read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open group table '" + path + "'");
  return read_table(in, "table:" + path);
}

Group Group::parse(std::string_view raw) {
  const std::string text = trim(raw);
  if (text == "Z") return integer_line();
  if (text.rfind("Z^", 0) == 0) return lattice(static_cast<int>(parse_int(text.substr(2), "lattice rank")));
  if (text.rfind("table:", 0) == 0) return read_table_file(text.substr(6));
  if (text.size() >= 2 && text[0] == 'F') {
    const std::string_view rest = std::string_view(text).substr(text[1] == '_' ? 2 : 1);
    return free_group(static_cast<int>(parse_int(rest, "free group rank")));
  }
  if (text.size() >= 2 && text[0] == 'C') {
    return cyclic(static_cast<std::size_t>(parse_int(std::string_view(text).substr(1), "cyclic order")));
  }
  if (text.size() >= 2 && text[0] == 'S') {
    return symmetric(static_cast<int>(parse_int(std::string_view(text).substr(1), "symmetric degree")));
  }
  throw std::invalid_argument("unknown group '" + text + "'");
}

GroupElement Group::identity() const {
  switch (family_) {
    case GroupFamily::IntegerLine: return {{0}};
    case GroupFamily::Lattice: return {std::vector<std::int64_t>(static_cast<std::size_t>(rank_), 0)};
    case GroupFamily::Free: return {};
    case GroupFamily::Finite: return {{0}};
  }
  return {};
}

bool Group::contains(const GroupElement& g) const {
  switch (family_) {
    case GroupFamily::IntegerLine: return g.data.size() == 1;
    case GroupFamily::Lattice: return g.data.size() == static_cast<std::size_t>(rank_);
    case GroupFamily::Free:
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        const auto x = g.data[i];
        if (x == 0 || x > rank_ || x < -rank_) return false;
        if (i > 0 && g.data[i - 1] == -x) return false;
      }
      return true;
    case GroupFamily::Finite:
      return g.data.size() == 1 && g.data[0] >= 0 && static_cast<std::size_t>(g.data[0]) < table_.order;
  }
  return false;
}

void Group::check(const GroupElement& g) const {
  if (!contains(g)) throw GroupMismatch("element is not a normal form of group " + name_);
}

GroupElement Group::multiply(const GroupElement& g, const GroupElement& h) const {
  check(g);
  check(h);
  switch (family_) {
    case GroupFamily::IntegerLine: return {{g.data[0] + h.data[0]}};
    case GroupFamily::Lattice: {
      GroupElement r = g;
      for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] += h.data[i];
      return r;
    }
    case GroupFamily::Free: {
      // Cancel the longest suffix of g against the prefix of h.
      std::size_t cancel = 0;
      while (cancel < g.data.size() && cancel < h.data.size() &&
             g.data[g.data.size() - 1 - cancel] == -h.data[cancel]) {
        ++cancel;
      }
      GroupElement r;
      r.data.reserve(g.data.size() + h.data.size() - 2 * cancel);
      r.data.insert(r.data.end(), g.data.begin(), g.data.end() - static_cast<std::ptrdiff_t>(cancel));
      r.data.insert(r.data.end(), h.data.begin() + static_cast<std::ptrdiff_t>(cancel), h.data.end());
      return r;
    }
    case GroupFamily::Finite:
      return {{static_cast<std::int64_t>(
          table_(static_cast<std::uint32_t>(g.data[0]), static_cast<std::uint32_t>(h.data[0])))}};
  }
  return {};
}

GroupElement Group::inverse(const GroupElement& g) const {
  check(g);
  switch (family_) {
    case GroupFamily::IntegerLine:
    case GroupFamily::Lattice: {
      GroupElement r = g;
      for (auto& x : r.data) x = -x;
      return r;
    }
    case GroupFamily::Free: {
      GroupElement r;
      r.data.assign(g.data.rbegin(), g.data.rend());
      for (auto& x : r.data) x = -x;
      return r;
    }
    case GroupFamily::Finite:
      return {{static_cast<std::int64_t>(inverse_[static_cast<std::size_t>(g.data[0])])}};
  }
  return {};
}

GroupElement Group::power(const GroupElement& g, std::int64_t exponent) const {
  const GroupElement base = exponent < 0 ? inverse(g) : g;
  std::uint64_t e = exponent < 0 ? static_cast<std::uint64_t>(-exponent) : static_cast<std::uint64_t>(exponent);
  GroupElement result = identity();
  GroupElement square = base;
  while (e > 0) {
    if (e & 1U) result = multiply(result, square);
    e >>= 1U;
    if (e > 0) square = multiply(square, square);
  }
  return result;
}

std::vector<GroupElement> Group::generators() const {
  std::vector<GroupElement> gens;
  switch (family_) {
    case GroupFamily::IntegerLine: gens.push_back({{1}}); break;
    case GroupFamily::Lattice:
      for (int i = 0; i < rank_; ++i) {
        GroupElement e = identity();
        e.data[static_cast<std::size_t>(i)] = 1;
        gens.push_back(std::move(e));
      }
      break;
    case GroupFamily::Free:
      for (int i = 1; i <= rank_; ++i) gens.push_back({{i}});
      break;
    case GroupFamily::Finite:
      for (std::size_t i = 1; i < table_.order; ++i) gens.push_back({{static_cast<std::int64_t>(i)}});
      break;
  }
  return gens;
}

std::vector<GroupElement> Group::ball(int radius) const {
  if (radius < 0) throw std::invalid_argument("ball radius must be nonnegative");
  if (family_ == GroupFamily::Finite) {
    std::vector<GroupElement> all;
    for (std::size_t i = 0; i < table_.order; ++i) all.push_back({{static_cast<std::int64_t>(i)}});
    return all;
  }
  std::vector<GroupElement> symmetric_gens;
  for (const auto& g : generators()) {
    symmetric_gens.push_back(g);
    symmetric_gens.push_back(inverse(g));
  }
  std::set<GroupElement> seen{identity()};
  std::vector<GroupElement> frontier{identity()};
  for (int r = 0; r < radius; ++r) {
    std::vector<GroupElement> next;
    for (const auto& x : frontier) {
      for (const auto& s : symmetric_gens) {
        auto y = multiply(x, s);
        if (seen.insert(y).second) next.push_back(std::move(y));
      }
    }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

GroupElement Group::integer(std::int64_t n) const {
  if (family_ != GroupFamily::IntegerLine) throw GroupMismatch("integer element requested from " + name_);
  return {{n}};
}

GroupElement Group::vector(std::vector<std::int64_t> coords) const {
  GroupElement g{std::move(coords)};
  if (family_ != GroupFamily::Lattice && family_ != GroupFamily::IntegerLine) {
    throw GroupMismatch("lattice element requested from " + name_);
  }
  check(g);
  return g;
}

GroupElement Group::word(std::vector<std::int64_t> letters) const {
  if (family_ != GroupFamily::Free) throw GroupMismatch("word requested from " + name_);
  GroupElement r;
  for (auto x : letters) {
    if (x == 0 || x > rank_ || x < -rank_) throw GroupMismatch("letter out of range for " + name_);
    if (!r.data.empty() && r.data.back() == -x) {
      r.data.pop_back();
    } else {
      r.data.push_back(x);
    }
  }
  return r;
}

GroupElement Group::finite_element(std::uint32_t index) const {
  GroupElement g{{static_cast<std::int64_t>(index)}};
  if (family_ != GroupFamily::Finite) throw GroupMismatch("table element requested from " + name_);
  check(g);
  return g;
}

std::string Group::format(const GroupElement& g) const {
  check(g);
  std::ostringstream out;
  switch (family_) {
    case GroupFamily::IntegerLine:
    case GroupFamily::Finite: out << g.data[0]; break;
    case GroupFamily::Lattice:
      for (std::size_t i = 0; i < g.data.size(); ++i) out << (i ? "," : "") << g.data[i];
      break;
    case GroupFamily::Free: {
      if (g.data.empty()) return "e";
      // Runs of equal letters are written as powers.
      for (std::size_t i = 0; i < g.data.size();) {
        std::size_t j = i;
        while (j < g.data.size() && g.data[j] == g.data[i]) ++j;
        const auto letter = g.data[i];
        const auto run = static_cast<std::int64_t>(j - i) * (letter > 0 ? 1 : -1);
        out << (i ? "." : "") << 's' << (letter > 0 ? letter : -letter);
        if (run != 1) out << '^' << run;
        i = j;
      }
      break;
    }
  }
  return out.str();
}

GroupElement Group::parse_element(std::string_view raw) const {
  const std::string text = trim(raw);
  if (text == "e" || text.empty()) return identity();
  switch (family_) {
    case GroupFamily::IntegerLine: return {{parse_int(text, "integer element")}};
    case GroupFamily::Finite: {
      const auto idx = parse_int(text, "table index");
      GroupElement g{{idx}};
      check(g);
      return g;
    }
    case GroupFamily::Lattice: {
      std::vector<std::int64_t> coords;
      std::size_t start = 0;
      while (true) {
        const auto comma = text.find(',', start);
        coords.push_back(parse_int(std::string_view(text).substr(start, comma - start), "lattice coordinate"));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (coords.size() != static_cast<std::size_t>(rank_)) {
        throw GroupMismatch("element '" + text + "' has wrong dimension for " + name_);
      }
      return {std::move(coords)};
    }
    case GroupFamily::Free: {
      std::vector<std::int64_t> letters;
      std::size_t start = 0;
      while (start <= text.size()) {
        auto sep = text.find_first_of(".*", start);
        if (sep == std::string::npos) sep = text.size();
        const std::string tok = text.substr(start, sep - start);
        if (tok.empty() || tok[0] != 's') throw std::invalid_argument("bad free-group letter '" + tok + "'");
        const auto caret = tok.find('^');
        const auto gen = parse_int(std::string_view(tok).substr(1, caret == std::string::npos ? std::string::npos : caret - 1),
                                   "generator index");
        const auto exp = caret == std::string::npos ? 1 : parse_int(std::string_view(tok).substr(caret + 1), "exponent");
        if (gen < 1 || gen > rank_) throw GroupMismatch("generator '" + tok + "' out of range for " + name_);
        for (std::int64_t i = 0; i < (exp < 0 ? -exp : exp); ++i) letters.push_back(exp < 0 ? -gen : gen);
        start = sep + 1;
      }
      return word(std::move(letters));
    }
  }
  return identity();
}

}  // namespace soficlen
