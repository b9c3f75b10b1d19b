#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "soficlen/groupring.hpp"

namespace soficlen {

/// A bijection of [d] stored as its image table.
using Permutation = std::vector<std::uint32_t>;

Permutation identity_permutation(std::size_t d);
/// (a o b)(v) = a(b(v)).
Permutation compose(const Permutation& a, const Permutation& b);
Permutation invert(const Permutation& p);
bool is_bijection(const Permutation& p);
std::size_t cycle_count(const Permutation& p);

/// A homomorphism out of Z, Z^k or F_k, fixed by the images of the
/// standard generators.
class Homomorphism {
 public:
  Homomorphism(GroupPtr source, GroupPtr target, std::vector<GroupElement> generator_images);

  const Group& source() const { return *source_; }
  const Group& target() const { return *target_; }
  const GroupPtr& target_ptr() const { return target_; }
  const std::vector<GroupElement>& generator_images() const { return images_; }
  GroupElement operator()(const GroupElement& g) const;

 private:
  GroupPtr source_, target_;
  std::vector<GroupElement> images_;
};

enum class SoficSource { Cyclic, Torus, RandomFree, Translation, QuotientHom, Restricted };

std::string source_name(SoficSource s);

namespace detail {
class SoficImpl;
}

/// A map sigma: G -> Sym(d). Immutable; copies share state.
class SoficMap {
 public:
  const Group& group() const;
  const GroupPtr& group_ptr() const;
  std::size_t size() const;
  SoficSource source() const;
  std::uint64_t seed() const;
  /// True when sigma is a genuine homomorphism.
  bool homomorphic() const;

  /// sigma_s(v).
  std::uint32_t apply(const GroupElement& s, std::uint32_t v) const;
  /// The whole permutation sigma_s.
  Permutation permutation(const GroupElement& s) const;

 private:
  friend SoficMap build_cyclic(std::size_t);
  friend SoficMap build_torus(GroupPtr, const std::vector<std::size_t>&);
  friend SoficMap build_random_free(GroupPtr, std::size_t, std::uint64_t);
  friend SoficMap build_translation(GroupPtr);
  friend SoficMap build_quotient(Homomorphism);
  friend SoficMap restrict(const SoficMap&, const Homomorphism&);
  explicit SoficMap(std::shared_ptr<const detail::SoficImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::SoficImpl> impl_;
};

/// sigma_n(v) = v + n mod d on Z.
SoficMap build_cyclic(std::size_t d);
/// Coordinate-wise cyclic shifts on Z^k; d is the product of dims. Index of
/// (x_1, ..., x_k) is row-major with x_1 slowest.
SoficMap build_torus(GroupPtr lattice, const std::vector<std::size_t>& dims);
/// Independent uniform permutations for the generators of F_k, extended to
/// reduced words by composition.
SoficMap build_random_free(GroupPtr free_group, std::size_t d, std::uint64_t seed);
inline SoficMap build_random_free(int k, std::size_t d, std::uint64_t seed) {
  return build_random_free(make_group(Group::free_group(k)), d, seed);
}
/// Left regular action of a finite group on itself.
SoficMap build_translation(GroupPtr finite_group);
/// sigma_g(v) = phi(g) * v for a homomorphism phi into a finite group.
SoficMap build_quotient(Homomorphism phi);
/// sigma'_g = sigma_{embed(g)}. Throws if embed is visibly non-injective on
/// the unit ball of its source; full injectivity is not verified.
SoficMap restrict(const SoficMap& sigma, const Homomorphism& embed);

struct PairFraction {
  GroupElement s, t;
  std::size_t count = 0;  // numerator; the denominator is d
  double fraction = 0;
};

struct DefectReport {
  std::size_t d = 0;
  /// |{v : sigma_s sigma_t(v) = sigma_{st}(v)}| for (s, t) in F x F.
  std::vector<PairFraction> multiplicativity;
  /// |{v : sigma_s(v) != sigma_t(v)}| for distinct s, t in F.
  std::vector<PairFraction> separation;

  double min_multiplicativity() const;
  double mean_multiplicativity() const;
  double min_separation() const;
  double mean_separation() const;
};

DefectReport defect(const SoficMap& sigma, const std::vector<GroupElement>& window);

/// Sizes d (strictly increasing) crossed with a seed list.
struct SoficSchedule {
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> seeds{1};

  /// Throws std::invalid_argument on an empty or non-increasing schedule.
  void validate() const;
  /// (d, seed) pairs, d-major.
  std::vector<std::pair<std::size_t, std::uint64_t>> points() const;

  /// `100,500,2000`.
  static std::vector<std::size_t> parse_sizes(std::string_view text);
  /// `1..5` or `1,4,9`.
  static std::vector<std::uint64_t> parse_seeds(std::string_view text);
  /// `64x64`.
  static std::vector<std::size_t> parse_dims(std::string_view text);
};

/// Produces the map for one schedule point.
using SoficFactory = std::function<SoficMap(std::size_t d, std::uint64_t seed)>;

}  // namespace soficlen
