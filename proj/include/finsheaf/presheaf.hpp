#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsheaf/topology.hpp"
#include "finsheaf/values.hpp"

namespace finsheaf {

/// Restriction data keyed by (larger open, smaller open).
using RestrictionMap = std::map<std::pair<PointSet, PointSet>, ValueMorphism>;

namespace detail {

// Sections and restrictions over a family of opens ordered by inclusion.
// Shared by presheaves (all opens) and basis presheaves (basis members).
struct SectionTable {
  Category category = Category::FinSet;
  std::vector<PointSet> members;
  std::unordered_map<PointSet::Bits, std::size_t> index;
  std::vector<ValueObject> sections;
  std::vector<std::optional<ValueMorphism>> res;  // res[v * n + u] for members u ⊆ v

  std::size_t size() const noexcept { return members.size(); }
  std::size_t slot(PointSet s) const;
  const ValueMorphism& restriction(std::size_t v, std::size_t u) const;
};

std::shared_ptr<const SectionTable> make_table(Category category, std::vector<PointSet> members,
                                               std::vector<ValueObject> sections, const RestrictionMap& given);

}  // namespace detail

/// A presheaf on a finite space with values in FinSet or FinAb. Missing
/// restrictions in the input are filled in: identities on U ⊆ U, composites
/// through the canonically least intermediate open otherwise. Copies share
/// the immutable data.
class Presheaf {
 public:
  /// `sections[i]` is the value at `space->opens()[i]`.
  Presheaf(SpacePtr space, Category category, std::vector<ValueObject> sections, const RestrictionMap& given);

  /// Builds every section and every covering-pair restriction from callbacks.
  static Presheaf from_functions(SpacePtr space, Category category,
                                 const std::function<ValueObject(PointSet)>& sections,
                                 const std::function<ValueMorphism(PointSet larger, PointSet smaller,
                                                                   const ValueObject& from,
                                                                   const ValueObject& to)>& restriction);

  const SpacePtr& space() const noexcept { return space_; }
  Category category() const noexcept { return table_->category; }
  const ValueObject& sections(PointSet u) const { return table_->sections[table_->slot(u)]; }
  const ValueObject& sections_at(std::size_t open_index) const { return table_->sections.at(open_index); }
  /// ρ from `larger` to `smaller`.
  const ValueMorphism& restriction(PointSet larger, PointSet smaller) const;
  const ValueMorphism& restriction_at(std::size_t larger, std::size_t smaller) const {
    return table_->restriction(larger, smaller);
  }
  const detail::SectionTable& table() const noexcept { return *table_; }

  friend bool operator==(const Presheaf& a, const Presheaf& b);

 private:
  SpacePtr space_;
  std::shared_ptr<const detail::SectionTable> table_;
};

struct FunctorialityViolation {
  enum class Kind { Identity, Composite } kind;
  PointSet smaller;
  PointSet middle;
  PointSet larger;
};

/// Identity and composition violations, in canonical order.
std::vector<FunctorialityViolation> functoriality_violations(const Presheaf& p);
bool validate_presheaf(const Presheaf& p);

/// A natural family of per-open value morphisms between presheaves on one space.
class PresheafMorphism {
 public:
  /// `components[i]` lives at `space->opens()[i]`. Objects are checked
  /// (ValueMismatch); naturality is checked by is_natural.
  PresheafMorphism(Presheaf source, Presheaf target, std::vector<ValueMorphism> components);
  static PresheafMorphism from_function(Presheaf source, Presheaf target,
                                        const std::function<ValueMorphism(PointSet)>& component);
  static PresheafMorphism identity(const Presheaf& p);

  const Presheaf& source() const noexcept { return source_; }
  const Presheaf& target() const noexcept { return target_; }
  const ValueMorphism& component(PointSet u) const;
  const ValueMorphism& component_at(std::size_t open_index) const { return components_.at(open_index); }
  const std::vector<ValueMorphism>& components() const noexcept { return components_; }

  bool is_natural() const;
  /// Throws IncompatibleFamily naming the first failing square.
  void require_natural() const;
  bool is_isomorphism() const;
  PresheafMorphism inverse() const;

  friend bool operator==(const PresheafMorphism& a, const PresheafMorphism& b) {
    return a.components_ == b.components_ && a.source_ == b.source_ && a.target_ == b.target_;
  }

 private:
  Presheaf source_;
  Presheaf target_;
  std::vector<ValueMorphism> components_;
};

/// after ∘ before.
PresheafMorphism compose(const PresheafMorphism& after, const PresheafMorphism& before);

/// All presheaf morphisms source → target, ordered by component tables with
/// larger opens first. Throws CapExceeded past `cap` examined candidates.
std::vector<PresheafMorphism> enumerate_presheaf_morphisms(const Presheaf& source, const Presheaf& target,
                                                           std::size_t cap = kDefaultHomCap);

enum class SheafFailureKind { G1, G2, EmptyNotTerminal };
std::string_view to_string(SheafFailureKind kind) noexcept;

struct SheafFailure {
  PointSet open;
  Covering covering;
  SheafFailureKind kind;
  /// G1: two distinct sections with equal restrictions. G2: the least
  /// compatible family (one label per part) that does not glue.
  std::vector<std::string> witness;
};

struct SheafReport {
  bool verdict = true;
  std::vector<SheafFailure> failures;
};

struct SheafCheckOptions {
  std::size_t max_coverings = kUnlimited;
};

/// G1 and G2 over every antichain covering of every open, plus the empty
/// covering of ∅ (which forces sections(∅) to be terminal).
SheafReport check_sheaf(const Presheaf& p, const SheafCheckOptions& options = {});
bool is_sheaf(const Presheaf& p);

/// G1/G2 for one covering; failures are appended to `report`.
void check_covering(const Presheaf& p, const Covering& covering, SheafReport& report);

/// The unique section over `u` restricting to `family` on `parts`, if exactly one exists.
std::optional<std::size_t> glue_sections(const Presheaf& p, PointSet u, std::span<const PointSet> parts,
                                         std::span<const std::size_t> family);

/// U ↦ Hom(probe, F(U)) as a set-valued presheaf.
Presheaf hom_presheaf(const ValueObject& probe, const Presheaf& p);
/// Singleton for FinSet; Z/1..Z/e for FinAb, with e the exponent of all section groups.
std::vector<ValueObject> default_probes(const Presheaf& p);
bool check_sheaf_by_representables(const Presheaf& p, std::span<const ValueObject> probes);

/// Presheaf induced on the open subspace u.
Presheaf restrict_to_open(const Presheaf& p, PointSet u);
PresheafMorphism restrict_to_open(const PresheafMorphism& m, PointSet u);

/// A presheaf defined only on the members of a basis.
class BasisPresheaf {
 public:
  /// `sections[i]` is the value at `basis.members()[i]`.
  BasisPresheaf(Basis basis, Category category, std::vector<ValueObject> sections, const RestrictionMap& given);

  const Basis& basis() const noexcept { return basis_; }
  const SpacePtr& space() const noexcept { return basis_.space(); }
  Category category() const noexcept { return table_->category; }
  const ValueObject& sections(PointSet v) const { return table_->sections[table_->slot(v)]; }
  const ValueMorphism& restriction(PointSet larger, PointSet smaller) const;
  const detail::SectionTable& table() const noexcept { return *table_; }
  bool is_functorial() const;

 private:
  Basis basis_;
  std::shared_ptr<const detail::SectionTable> table_;
};

BasisPresheaf restrict_to_basis(const Presheaf& p, const Basis& basis);
/// The same data on a sub-basis (every member of `sub` must be a member of bp's basis).
BasisPresheaf restrict_to_subbasis(const BasisPresheaf& bp, const Basis& sub);

/// (F₀): for each basis member and each antichain covering by basis members,
/// joint injectivity and gluing of families compatible on every basis member
/// inside the pairwise overlaps.
SheafReport check_F0(const BasisPresheaf& bp);

/// The unique section over basis member v with the given restrictions to
/// basis members `parts`, if exactly one exists.
std::optional<std::size_t> glue_basis_sections(const BasisPresheaf& bp, PointSet v, std::span<const PointSet> parts,
                                               std::span<const std::size_t> family);

/// F′(U) = lim over basis members V ⊆ U of F(V), with mediating restrictions.
struct BasisExtension {
  BasisPresheaf source;
  Presheaf sheaf;
  /// Per open of the space: the basis members inside it and the limit over them.
  std::vector<std::vector<PointSet>> members_within;
  std::vector<LimitResult> limits;

  /// The projection F′(U) → F(V) for a basis member V ⊆ U.
  ValueMorphism can(PointSet u, PointSet v) const;
  /// can_V : F′(V) → F(V) for a basis member V.
  ValueMorphism can(PointSet v) const { return can(v, v); }
};

BasisExtension extend_from_basis(const BasisPresheaf& bp);

/// The unique F′ → G′ whose basis components agree with `family` under can.
/// `family[i]` lives at the i-th basis member. Throws IncompatibleFamily.
PresheafMorphism extend_morphism_from_basis(const BasisExtension& source, const BasisExtension& target,
                                            std::span<const ValueMorphism> family);

/// The canonical pair between a sheaf F and the extension of its basis
/// restriction: forward = F → F′ (restrict to basis members), backward =
/// F′ → F (glue). Throws NotASheaf when gluing fails.
struct CanonicalPair {
  PresheafMorphism forward;
  PresheafMorphism backward;
};
CanonicalPair compare_with_extension(const Presheaf& sheaf, const BasisExtension& extension);

/// For basis members B′ ⊆ B: forward = F′_B → F′_B′ (forget members outside
/// B′), backward = F′_B′ → F′_B (glue over B′ members via (F₀)).
CanonicalPair compare_basis_extensions(const BasisExtension& coarse, const BasisExtension& fine_subbasis);

struct BasisAgreement {
  bool on_basis = false;
  bool everywhere = false;
};
BasisAgreement morphism_determined_by_basis(const PresheafMorphism& u, const PresheafMorphism& v,
                                            const Basis& basis);

/// A projective system of sheaves on one space indexed by a finite poset.
/// arrows(λ, μ) for λ < μ is u_{λμ} : F_μ → F_λ.
struct SheafDiagram {
  std::vector<std::string> names;
  std::vector<std::vector<bool>> leq;
  std::vector<Presheaf> sheaves;
  std::map<std::pair<std::size_t, std::size_t>, PresheafMorphism> arrows;

  std::size_t size() const noexcept { return sheaves.size(); }
  /// Throws MalformedDiagram, MixedCategories, NotASheaf.
  void validate() const;
};

struct SheafLimit {
  Presheaf sheaf;
  std::vector<PresheafMorphism> projections;
  std::vector<LimitResult> limits;  // per open
};

SheafLimit limit_of_sheaves(const SheafDiagram& diagram);
PresheafMorphism mediating_sheaf_morphism(const SheafLimit& limit, const Presheaf& apex,
                                          std::span<const PresheafMorphism> cone);

/// Every restriction from the whole space to a nonempty open is a bijection.
bool is_constant_presheaf(const Presheaf& p);

}  // namespace finsheaf
