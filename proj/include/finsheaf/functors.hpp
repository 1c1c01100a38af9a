#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "finsheaf/presheaf.hpp"
#include "finsheaf/stalks.hpp"

namespace finsheaf {

/// ψ_*F on the target: V ↦ F(ψ⁻¹(V)). Throws NotContinuous.
Presheaf pushforward(const ContinuousMap& psi, const Presheaf& f);
PresheafMorphism pushforward(const ContinuousMap& psi, const PresheafMorphism& u);

/// ψ_x : (ψ_*F)_{ψ(x)} → F_x on minimal-open stalks.
ValueMorphism stalk_comparison(const ContinuousMap& psi, const Presheaf& f, std::size_t x);

/// Injective, and every open of the source is the preimage of an open of the target.
bool is_embedding(const ContinuousMap& psi);

/// The two-sided inverse F_x → (ψ_*F)_{ψ(x)} of stalk_comparison for an
/// embedding, through any open whose preimage is the minimal open of x.
/// Throws NotAnOpen when ψ is not an embedding.
ValueMorphism stalk_comparison_inverse(const ContinuousMap& psi, const Presheaf& f, std::size_t x);

/// Supp(ψ_*F) ⊆ closure(ψ(Supp F)). Throws WrongCategory.
bool pushforward_support_bound(const ContinuousMap& psi, const Presheaf& f);

/// A morphism G → ψ_*F for G on the target and F on the source.
struct PsiMorphism {
  ContinuousMap map;
  Presheaf source;
  Presheaf target;
  PresheafMorphism body;
};

/// Checks that body runs G → ψ_*F and is natural (IncompatibleFamily).
PsiMorphism make_psi_morphism(const ContinuousMap& psi, const Presheaf& g, const Presheaf& f,
                              const PresheafMorphism& body);

/// Keyed by (U open in the source, V open in the target) with U ⊆ ψ⁻¹(V).
using PsiFamily = std::map<std::pair<PointSet, PointSet>, ValueMorphism>;

/// u_{U,V} = ρ(ψ⁻¹V → U) ∘ u_V for every admissible pair.
PsiFamily family_of(const PsiMorphism& u);

/// The ψ-morphism with u_V = u_{ψ⁻¹(V),V}. Every admissible pair must be
/// present and every square must commute (IncompatibleFamily).
PsiMorphism psi_morphism_from_family(const ContinuousMap& psi, const Presheaf& g, const Presheaf& f,
                                     const PsiFamily& family);

/// Basis variant: pairs range over basis members only; G and F must be
/// sheaves (NotASheaf). Extends through the projective limits over both bases.
PsiMorphism psi_morphism_from_basis_family(const ContinuousMap& psi, const Presheaf& g, const Presheaf& f,
                                           const Basis& source_basis, const Basis& target_basis,
                                           const PsiFamily& family);

namespace detail {
struct GermSections {
  /// Per open of the source: each section as one stalk element index per point of the open.
  std::vector<std::vector<std::vector<std::size_t>>> families;
};
}  // namespace detail

/// An inverse image pair (ψ*G, ρ_G : G → ψ_*ψ*G). Pairs built by pullback
/// carry the germ-family description of their sections.
struct InverseImage {
  ContinuousMap map;
  Presheaf source;
  Presheaf sheaf;
  PresheafMorphism unit;
  std::shared_ptr<const detail::GermSections> germs;
};

/// Germ-family inverse image: sections over U are families (s(x)) with s(x) in
/// the stalk of G at ψ(x), locally induced by one section of G. Elements are
/// labelled by the tuple of stalk labels over the points of U.
InverseImage pullback(const ContinuousMap& psi, const Presheaf& g);

/// Inverse image along the identity.
InverseImage sheafify(const Presheaf& g);

/// ψ*(u) : ψ*G₁ → ψ*G₂, applied germ by germ.
PresheafMorphism pullback_morphism(const InverseImage& from, const InverseImage& to, const PresheafMorphism& u);

/// The unique ν : ψ*G → F with ψ_*(ν) ∘ ρ_G = u. `inv` must come from
/// pullback. Throws NotASheaf when F is not a sheaf.
PresheafMorphism sharp(const InverseImage& inv, const PsiMorphism& u);

/// ψ_*(ν) ∘ ρ_G.
PsiMorphism flat(const InverseImage& inv, const PresheafMorphism& nu);

struct Counit {
  InverseImage inverse;  // ψ*ψ_*F
  PresheafMorphism morphism;  // σ_F
};
/// σ_F = (id of ψ_*F)♯. Throws NotASheaf.
Counit counit(const ContinuousMap& psi, const Presheaf& f);

struct AdjunctionWitness {
  std::vector<PresheafMorphism> sheaf_side;  // Hom_X(ψ*G, F)
  std::vector<PsiMorphism> psi_side;         // Hom_Y(G, ψ_*F)
  std::vector<std::size_t> forward;          // ν ↦ ν♭
  std::vector<std::size_t> backward;         // u ↦ u♯
  bool bijective = false;
};

/// Enumerates both Hom-sets and checks that ♭ and ♯ are mutually inverse.
/// Throws NotASheaf, CapExceeded.
AdjunctionWitness check_adjunction(const InverseImage& inv, const Presheaf& f, std::size_t cap = kDefaultHomCap);

/// (w ∘ ν)♭ = ψ_*(w) ∘ ν♭ for every ν : ψ*G → F₁ and the given w : F₁ → F₂.
bool check_adjunction_naturality(const InverseImage& inv, const PresheafMorphism& w,
                                 std::size_t cap = kDefaultHomCap);

/// The unique iso ζ : first.sheaf → second.sheaf with ψ_*(ζ) ∘ ρ₁ = ρ₂, as
/// α₂ ∘ α₁⁻¹ where α_i is ρ_i♯ against the germ-family pullback. Throws
/// NotInverseImagePair when a unit fails the universal property.
PresheafMorphism canonical_comparison(const InverseImage& first, const InverseImage& second);

struct CompositionIso {
  InverseImage direct;  // (ψ′∘ψ)*H
  InverseImage inner;   // ψ′*H
  InverseImage nested;  // ψ*(ψ′*H) with the composite unit
  PresheafMorphism iso; // direct.sheaf → nested.sheaf
};
/// ψ : X → Y, ψ′ : Y → Z, H on Z.
CompositionIso composition_iso(const ContinuousMap& psi, const ContinuousMap& psi_prime, const Presheaf& h);

/// ψ_x ∘ ρ_{ψ(x)} : G_{ψ(x)} → (ψ*G)_x, sending ⟨V,s⟩ to ⟨ψ⁻¹V, (s_{ψ(p)})⟩.
ValueMorphism pullback_stalk_iso(const InverseImage& inv, std::size_t x);

}  // namespace finsheaf
