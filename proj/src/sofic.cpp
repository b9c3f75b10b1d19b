#include "soficlen/sofic.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>

#include "soficlen/rng.hpp"

namespace soficlen {

Permutation identity_permutation(std::size_t d) {
  Permutation p(d);
  std::iota(p.begin(), p.end(), 0U);
  return p;
}

Permutation compose(const Permutation& a, const Permutation& b) {
  Permutation r(b.size());
  for (std::size_t v = 0; v < b.size(); ++v) r[v] = a[b[v]];
  return r;
}

Permutation invert(const Permutation& p) {
  Permutation r(p.size());
  for (std::size_t v = 0; v < p.size(); ++v) r[p[v]] = static_cast<std::uint32_t>(v);
  return r;
}

bool is_bijection(const Permutation& p) {
  std::vector<char> hit(p.size(), 0);
  for (auto x : p) {
    if (x >= p.size() || hit[x]++) return false;
  }
  return true;
}

std::size_t cycle_count(const Permutation& p) {
  std::vector<char> seen(p.size(), 0);
  std::size_t cycles = 0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (seen[v]) continue;
    ++cycles;
    for (auto u = static_cast<std::uint32_t>(v); !seen[u]; u = p[u]) seen[u] = 1;
  }
  return cycles;
}

Homomorphism::Homomorphism(GroupPtr source, GroupPtr target, std::vector<GroupElement> generator_images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(generator_images)) {
  if (source_->is_finite()) throw std::invalid_argument("homomorphisms out of finite groups are not supported");
  if (images_.size() != source_->generators().size()) {
    throw std::invalid_argument("homomorphism needs one image per generator of " + source_->name());
  }
  for (const auto& g : images_) target_->check(g);
  if (source_->family() == GroupFamily::Lattice) {
    for (std::size_t i = 0; i < images_.size(); ++i) {
      for (std::size_t j = i + 1; j < images_.size(); ++j) {
        if (target_->multiply(images_[i], images_[j]) != target_->multiply(images_[j], images_[i])) {
          throw std::invalid_argument("images of lattice generators must commute");
        }
      }
    }
  }
}

GroupElement Homomorphism::operator()(const GroupElement& g) const {
  source_->check(g);
  switch (source_->family()) {
    case GroupFamily::IntegerLine: return target_->power(images_[0], g.data[0]);
    case GroupFamily::Lattice: {
      GroupElement r = target_->identity();
      for (std::size_t i = 0; i < g.data.size(); ++i) r = target_->multiply(r, target_->power(images_[i], g.data[i]));
      return r;
    }
    case GroupFamily::Free: {
      GroupElement r = target_->identity();
      for (auto letter : g.data) {
        const auto& img = images_[static_cast<std::size_t>(letter > 0 ? letter : -letter) - 1];
        r = target_->multiply(r, letter > 0 ? img : target_->inverse(img));
      }
      return r;
    }
    case GroupFamily::Finite: break;
  }
  throw std::logic_error("unreachable");
}

std::string source_name(SoficSource s) {
  switch (s) {
    case SoficSource::Cyclic: return "cyclic";
    case SoficSource::Torus: return "torus";
    case SoficSource::RandomFree: return "random-free";
    case SoficSource::Translation: return "translation";
    case SoficSource::QuotientHom: return "quotient";
    case SoficSource::Restricted: return "restricted";
  }
  return {};
}

namespace detail {

class SoficImpl {
 public:
  SoficImpl(GroupPtr group, std::size_t d, SoficSource source, std::uint64_t seed, bool homomorphic)
      : group(std::move(group)), d(d), source(source), seed(seed), homomorphic(homomorphic) {}
  virtual ~SoficImpl() = default;

  virtual std::uint32_t apply(const GroupElement& s, std::uint32_t v) const = 0;
  virtual Permutation permutation(const GroupElement& s) const {
    Permutation p(d);
    for (std::size_t v = 0; v < d; ++v) p[v] = apply(s, static_cast<std::uint32_t>(v));
    return p;
  }

  GroupPtr group;
  std::size_t d;
  SoficSource source;
  std::uint64_t seed;
  bool homomorphic;
};

namespace {

std::uint32_t shift(std::uint64_t v, std::int64_t n, std::uint64_t d) {
  const auto sd = static_cast<std::int64_t>(d);
  auto r = n % sd;
  if (r < 0) r += sd;
  return static_cast<std::uint32_t>((v + static_cast<std::uint64_t>(r)) % d);
}

class CyclicImpl final : public SoficImpl {
 public:
  explicit CyclicImpl(std::size_t d) : SoficImpl(make_group(Group::integer_line()), d, SoficSource::Cyclic, 0, true) {}
  std::uint32_t apply(const GroupElement& s, std::uint32_t v) const override {
    group->check(s);
    return shift(v, s.data[0], d);
  }
};

class TorusImpl final : public SoficImpl {
 public:
  TorusImpl(GroupPtr g, std::vector<std::size_t> dims, std::size_t d)
      : SoficImpl(std::move(g), d, SoficSource::Torus, 0, true), dims_(std::move(dims)) {}
  std::uint32_t apply(const GroupElement& s, std::uint32_t v) const override {
    group->check(s);
    // Decode from the fastest (last) coordinate upward.
    std::uint64_t rest = v, result = 0, stride = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
      const std::uint64_t x = rest % dims_[i];
      rest /= dims_[i];
      result += shift(x, s.data[i], dims_[i]) * stride;
      stride *= dims_[i];
    }
    return static_cast<std::uint32_t>(result);
  }

 private:
  std::vector<std::size_t> dims_;
};

class RandomFreeImpl final : public SoficImpl {
 public:
  RandomFreeImpl(GroupPtr g, std::size_t d, std::uint64_t seed)
      : SoficImpl(std::move(g), d, SoficSource::RandomFree, seed, false) {
    const int k = group->rank();
    for (int i = 0; i < k; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      Permutation p = identity_permutation(d);
      for (std::size_t j = d; j > 1; --j) std::swap(p[j - 1], p[rng.below(j)]);
      inverse_.push_back(invert(p));
      forward_.push_back(std::move(p));
    }
  }
  std::uint32_t apply(const GroupElement& s, std::uint32_t v) const override {
    group->check(s);
    for (auto it = s.data.rbegin(); it != s.data.rend(); ++it) {
      const auto letter = *it;
      v = letter > 0 ? forward_[static_cast<std::size_t>(letter - 1)][v]
                     : inverse_[static_cast<std::size_t>(-letter - 1)][v];
    }
    return v;
  }
  Permutation permutation(const GroupElement& s) const override {
    group->check(s);
    Permutation p = identity_permutation(d);
    for (auto it = s.data.rbegin(); it != s.data.rend(); ++it) {
      const auto letter = *it;
      const auto& step = letter > 0 ? forward_[static_cast<std::size_t>(letter - 1)]
                                    : inverse_[static_cast<std::size_t>(-letter - 1)];
      for (auto& x : p) x = step[x];
    }
    return p;
  }

 private:
  std::vector<Permutation> forward_, inverse_;
};

class TranslationImpl final : public SoficImpl {
 public:
  explicit TranslationImpl(GroupPtr g) : SoficImpl(g, g->order(), SoficSource::Translation, 0, true) {}
  std::uint32_t apply(const GroupElement& s, std::uint32_t v) const override {
    group->check(s);
    return group->table()(static_cast<std::uint32_t>(s.data[0]), v);
  }
};

class QuotientImpl final : public SoficImpl {
 public:
  explicit QuotientImpl(Homomorphism phi)
      : SoficImpl(make_group(phi.source()), phi.target().order(), SoficSource::QuotientHom, 0, true),
        phi_(std::move(phi)) {}
  std::uint32_t apply(const GroupElement& s, std::uint32_t v) const override {
    const auto h = phi_(s);
    return phi_.target().table()(static_cast<std::uint32_t>(h.data[0]), v);
  }
  Permutation permutation(const GroupElement& s) const override {
    const auto h = static_cast<std::uint32_t>(phi_(s).data[0]);
    Permutation p(d);
    for (std::size_t v = 0; v < d; ++v) p[v] = phi_.target().table()(h, static_cast<std::uint32_t>(v));
    return p;
  }

 private:
  Homomorphism phi_;
};

class RestrictedImpl final : public SoficImpl {
 public:
  RestrictedImpl(std::shared_ptr<const SoficImpl> parent, Homomorphism embed)
      : SoficImpl(make_group(embed.source()), parent->d, SoficSource::Restricted, parent->seed,
                  parent->homomorphic),
        parent_(std::move(parent)),
        embed_(std::move(embed)) {}
  std::uint32_t apply(const GroupElement& s, std::uint32_t v) const override {
    return parent_->apply(embed_(s), v);
  }
  Permutation permutation(const GroupElement& s) const override { return parent_->permutation(embed_(s)); }

 private:
  std::shared_ptr<const SoficImpl> parent_;
  Homomorphism embed_;
};

}  // namespace
}  // namespace detail

const Group& SoficMap::group() const { return *impl_->group; }
const GroupPtr& SoficMap::group_ptr() const { return impl_->group; }
std::size_t SoficMap::size() const { return impl_->d; }
SoficSource SoficMap::source() const { return impl_->source; }
std::uint64_t SoficMap::seed() const { return impl_->seed; }
bool SoficMap::homomorphic() const { return impl_->homomorphic; }
std::uint32_t SoficMap::apply(const GroupElement& s, std::uint32_t v) const { return impl_->apply(s, v); }
Permutation SoficMap::permutation(const GroupElement& s) const { return impl_->permutation(s); }

namespace {
void check_size(std::size_t d) {
  if (d == 0) throw std::invalid_argument("sofic approximation size must be positive");
  if (d > UINT32_MAX) throw std::invalid_argument("sofic approximation size exceeds 2^32");
}
}  // namespace

SoficMap build_cyclic(std::size_t d) {
  check_size(d);
  return SoficMap(std::make_shared<detail::CyclicImpl>(d));
}

SoficMap build_torus(GroupPtr lattice, const std::vector<std::size_t>& dims) {
  if (lattice->family() != GroupFamily::Lattice && lattice->family() != GroupFamily::IntegerLine) {
    throw GroupMismatch("torus approximation needs Z or Z^k, got " + lattice->name());
  }
  if (dims.size() != static_cast<std::size_t>(lattice->rank())) {
    throw std::invalid_argument("torus has " + std::to_string(dims.size()) + " dimensions but group " +
                                lattice->name() + " has rank " + std::to_string(lattice->rank()));
  }
  std::size_t d = 1;
  for (auto x : dims) {
    check_size(x);
    d *= x;
  }
  check_size(d);
  return SoficMap(std::make_shared<detail::TorusImpl>(std::move(lattice), dims, d));
}

SoficMap build_random_free(GroupPtr free_group, std::size_t d, std::uint64_t seed) {
  if (free_group->family() != GroupFamily::Free) throw GroupMismatch("random free approximation needs F_k");
  if (d < 2) throw std::invalid_argument("random free approximation needs d >= 2");
  check_size(d);
  return SoficMap(std::make_shared<detail::RandomFreeImpl>(std::move(free_group), d, seed));
}

SoficMap build_translation(GroupPtr finite_group) {
  if (!finite_group->is_finite()) throw GroupMismatch("translation approximation needs a finite group");
  return SoficMap(std::make_shared<detail::TranslationImpl>(std::move(finite_group)));
}

SoficMap build_quotient(Homomorphism phi) {
  if (!phi.target().is_finite()) throw std::invalid_argument("quotient approximation needs a finite target");
  return SoficMap(std::make_shared<detail::QuotientImpl>(std::move(phi)));
}

SoficMap restrict(const SoficMap& sigma, const Homomorphism& embed) {
  if (!(embed.target() == sigma.group())) throw GroupMismatch("embedding target differs from the approximated group");
  std::set<GroupElement> images;
  const auto unit_ball = embed.source().ball(1);
  for (const auto& g : unit_ball) images.insert(embed(g));
  if (images.size() != unit_ball.size()) throw std::invalid_argument("embedding is not injective on the unit ball");
  return SoficMap(std::make_shared<detail::RestrictedImpl>(sigma.impl_, embed));
}

double DefectReport::min_multiplicativity() const {
  double m = 1.0;
  for (const auto& p : multiplicativity) m = std::min(m, p.fraction);
  return m;
}

double DefectReport::mean_multiplicativity() const {
  if (multiplicativity.empty()) return 1.0;
  double s = 0;
  for (const auto& p : multiplicativity) s += p.fraction;
  return s / static_cast<double>(multiplicativity.size());
}

double DefectReport::min_separation() const {
  double m = 1.0;
  for (const auto& p : separation) m = std::min(m, p.fraction);
  return m;
}

double DefectReport::mean_separation() const {
  if (separation.empty()) return 1.0;
  double s = 0;
  for (const auto& p : separation) s += p.fraction;
  return s / static_cast<double>(separation.size());
}

DefectReport defect(const SoficMap& sigma, const std::vector<GroupElement>& window) {
  const auto& g = sigma.group();
  const std::size_t d = sigma.size();
  DefectReport report;
  report.d = d;
  std::vector<Permutation> perms;
  perms.reserve(window.size());
  for (const auto& s : window) perms.push_back(sigma.permutation(s));
  const auto frac = [d](std::size_t c) { return static_cast<double>(c) / static_cast<double>(d); };
  for (std::size_t i = 0; i < window.size(); ++i) {
    for (std::size_t j = 0; j < window.size(); ++j) {
      const auto st = sigma.permutation(g.multiply(window[i], window[j]));
      std::size_t good = 0;
      for (std::size_t v = 0; v < d; ++v) good += perms[i][perms[j][v]] == st[v];
      report.multiplicativity.push_back({window[i], window[j], good, frac(good)});
      if (i < j) {
        std::size_t apart = 0;
        for (std::size_t v = 0; v < d; ++v) apart += perms[i][v] != perms[j][v];
        report.separation.push_back({window[i], window[j], apart, frac(apart)});
      }
    }
  }
  return report;
}

void SoficSchedule::validate() const {
  if (sizes.empty()) throw std::invalid_argument("schedule has no sizes");
  if (seeds.empty()) throw std::invalid_argument("schedule has no seeds");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw std::invalid_argument("schedule sizes must be strictly increasing");
  }
  for (auto d : sizes) {
    if (d == 0) throw std::invalid_argument("schedule sizes must be positive");
  }
}

std::vector<std::pair<std::size_t, std::uint64_t>> SoficSchedule::points() const {
  std::vector<std::pair<std::size_t, std::uint64_t>> out;
  for (auto d : sizes)
    for (auto s : seeds) out.emplace_back(d, s);
  return out;
}

namespace {

std::vector<std::uint64_t> parse_list(std::string_view text, char sep, std::string_view what) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    auto tok = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw std::invalid_argument("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
    }
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> SoficSchedule::parse_sizes(std::string_view text) {
  const auto v = parse_list(text, ',', "schedule");
  return {v.begin(), v.end()};
}

std::vector<std::uint64_t> SoficSchedule::parse_seeds(std::string_view text) {
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) return parse_list(text, ',', "seed list");
  const auto lo = parse_list(text.substr(0, dots), ',', "seed range");
  const auto hi = parse_list(text.substr(dots + 2), ',', "seed range");
  if (lo.size() != 1 || hi.size() != 1 || hi[0] < lo[0]) {
    throw std::invalid_argument("bad seed range '" + std::string(text) + "'");
  }
  std::vector<std::uint64_t> out;
  for (auto s = lo[0]; s <= hi[0]; ++s) out.push_back(s);
  return out;
}

std::vector<std::size_t> SoficSchedule::parse_dims(std::string_view text) {
  const auto v = parse_list(text, 'x', "torus dims");
  return {v.begin(), v.end()};
}

}  // namespace soficlen
