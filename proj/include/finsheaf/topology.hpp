#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace finsheaf {

inline constexpr std::size_t kMaxPoints = 64;
inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

/// A subset of the points of a FiniteSpace, as a bitmask over point indices.
/// Point indices follow the sorted order of the point labels.
class PointSet {
 public:
  using Bits = std::uint64_t;

  constexpr PointSet() noexcept = default;
  constexpr explicit PointSet(Bits bits) noexcept : bits_(bits) {}

  static constexpr PointSet single(std::size_t i) noexcept { return PointSet(Bits{1} << i); }
  static constexpr PointSet first(std::size_t n) noexcept {
    return PointSet(n >= 64 ? ~Bits{0} : (Bits{1} << n) - 1);
  }

  constexpr Bits bits() const noexcept { return bits_; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool contains(std::size_t i) const noexcept { return (bits_ >> i) & 1U; }
  constexpr bool subset_of(PointSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(PointSet other) const noexcept { return (bits_ & other.bits_) != 0; }

  std::vector<std::size_t> indices() const;

  friend constexpr PointSet operator|(PointSet a, PointSet b) noexcept { return PointSet(a.bits_ | b.bits_); }
  friend constexpr PointSet operator&(PointSet a, PointSet b) noexcept { return PointSet(a.bits_ & b.bits_); }
  friend constexpr PointSet operator-(PointSet a, PointSet b) noexcept { return PointSet(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(PointSet, PointSet) noexcept = default;
  // Storage order only (for use as a map key); see canonical_less for report order.
  friend constexpr bool operator<(PointSet a, PointSet b) noexcept { return a.bits_ < b.bits_; }

 private:
  Bits bits_ = 0;
};

/// Lexicographic order on the ascending index lists, i.e. on sorted point labels.
bool canonical_less(PointSet a, PointSet b) noexcept;

class FiniteSpace;
using SpacePtr = std::shared_ptr<const FiniteSpace>;

/// A finite topological space. Immutable; minimal opens are precomputed.
class FiniteSpace {
 public:
  /// Explicit topology. Throws ParseError if `opens` is not a topology.
  static SpacePtr from_opens(std::vector<std::string> points,
                             const std::vector<std::vector<std::string>>& opens);
  /// Coarsest topology containing the generators; they are recorded.
  static SpacePtr from_basis(std::vector<std::string> points,
                             const std::vector<std::vector<std::string>>& generators);
  static SpacePtr from_masks(std::vector<std::string> sorted_points, std::vector<PointSet> opens);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<std::string>& points() const noexcept { return points_; }
  const std::string& label(std::size_t i) const { return points_.at(i); }
  std::optional<std::size_t> find_point(std::string_view label) const;
  std::size_t point_index(std::string_view label) const;
  PointSet all() const noexcept { return PointSet::first(points_.size()); }

  /// Opens in canonical order (∅ first).
  const std::vector<PointSet>& opens() const noexcept { return opens_; }
  std::size_t open_count() const noexcept { return opens_.size(); }
  bool is_open(PointSet s) const;
  std::size_t open_index(PointSet s) const;
  std::optional<std::size_t> find_open(PointSet s) const;

  /// Intersection of all opens containing x.
  PointSet minimal_open(std::size_t x) const { return minimal_opens_.at(x); }
  PointSet closure(PointSet subset) const;
  bool is_irreducible() const;
  /// Opens containing x, canonical order.
  std::vector<PointSet> neighborhoods(std::size_t x) const;
  /// Opens contained in u, canonical order.
  std::vector<PointSet> opens_within(PointSet u) const;

  const std::optional<std::vector<PointSet>>& generators() const noexcept { return generators_; }

  PointSet set_of(std::span<const std::string> labels) const;
  std::vector<std::string> labels_of(PointSet s) const;
  std::string key_of(PointSet s) const;
  PointSet parse_key(std::string_view key) const;

  /// Subspace topology on `subset`, keeping point labels.
  SpacePtr subspace(PointSet subset) const;

  friend bool operator==(const FiniteSpace& a, const FiniteSpace& b) {
    return a.points_ == b.points_ && a.opens_ == b.opens_;
  }

 private:
  FiniteSpace() = default;

  std::vector<std::string> points_;
  std::unordered_map<std::string, std::size_t> point_index_;
  std::vector<PointSet> opens_;
  std::unordered_map<PointSet::Bits, std::size_t> open_index_;
  std::vector<PointSet> minimal_opens_;
  std::optional<std::vector<PointSet>> generators_;
};

bool same_space(const SpacePtr& a, const SpacePtr& b);

/// Re-expresses a subset of `from` in the point indexing of `to` (by label).
PointSet transfer(PointSet s, const FiniteSpace& from, const FiniteSpace& to);

/// A family of opens such that every open is a union of members.
class Basis {
 public:
  Basis(SpacePtr space, std::vector<PointSet> members);
  static Basis all_opens(SpacePtr space);

  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<PointSet>& members() const noexcept { return members_; }
  bool contains(PointSet s) const;
  std::size_t member_index(PointSet s) const;
  std::vector<PointSet> members_within(PointSet u) const;

 private:
  SpacePtr space_;
  std::vector<PointSet> members_;
  std::unordered_map<PointSet::Bits, std::size_t> index_;
};

/// The generator family of a space built by from_basis, when it is a basis.
std::optional<Basis> recorded_basis(const SpacePtr& space);

struct Covering {
  PointSet target;
  std::vector<PointSet> parts;

  friend bool operator==(const Covering&, const Covering&) = default;
};

/// Antichain coverings of `u` (plus the trivial covering {u}); for u = ∅ the
/// empty covering comes first. Ordered by part count, then canonically.
std::vector<Covering> enumerate_antichain_coverings(const FiniteSpace& space, PointSet u,
                                                    std::size_t cap = kUnlimited);

/// Same enumeration restricted to parts drawn from `candidates`.
std::vector<Covering> antichain_coverings_from(const FiniteSpace& space, PointSet u,
                                               std::span<const PointSet> candidates,
                                               std::size_t cap = kUnlimited);

class ContinuousMap {
 public:
  /// `assignment[x]` is the image of source point x. Continuity is not checked here.
  ContinuousMap(SpacePtr source, SpacePtr target, std::vector<std::size_t> assignment);
  static ContinuousMap from_labels(SpacePtr source, SpacePtr target,
                                   const std::map<std::string, std::string>& assignment);
  static ContinuousMap identity(SpacePtr space);
  /// The inclusion of a subspace, matched by point labels.
  static ContinuousMap inclusion(SpacePtr subspace, SpacePtr ambient);

  const SpacePtr& source() const noexcept { return source_; }
  const SpacePtr& target() const noexcept { return target_; }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
  std::size_t operator()(std::size_t x) const { return assignment_.at(x); }

  PointSet preimage(PointSet target_subset) const;
  PointSet image(PointSet source_subset) const;
  bool is_continuous() const;
  /// Throws NotContinuous.
  void require_continuous() const;

 private:
  SpacePtr source_;
  SpacePtr target_;
  std::vector<std::size_t> assignment_;
};

bool check_continuous(const ContinuousMap& map);

/// second ∘ first.
ContinuousMap compose(const ContinuousMap& second, const ContinuousMap& first);

}  // namespace finsheaf
