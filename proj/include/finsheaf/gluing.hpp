#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "finsheaf/presheaf.hpp"

namespace finsheaf {

/// Sheaves F_λ on the open subspaces U_λ of a covering, with isomorphisms
/// θ_{λμ} : F_μ|_{U_λ∩U_μ} → F_λ|_{U_λ∩U_μ} keyed by (λ, μ). Missing
/// diagonal entries are identities; a missing (μ, λ) is the inverse of (λ, μ).
struct GluingDatum {
  SpacePtr space;
  std::vector<std::string> labels;
  std::vector<PointSet> covering;
  std::vector<Presheaf> parts;
  std::map<std::pair<std::size_t, std::size_t>, PresheafMorphism> cocycle;

  std::size_t size() const noexcept { return labels.size(); }
  /// F_λ restricted to the open w ⊆ U_λ (w in the points of `space`).
  Presheaf part_on(std::size_t lambda, PointSet w) const;
};

/// Checks the shape of the datum and fills in the derived cocycle entries.
/// Throws MalformedDiagram, NotASheaf, CocycleViolation (non-iso entries).
GluingDatum complete_cocycle(const GluingDatum& d);

/// Restriction of F to the open sets U_λ, with identity cocycle.
GluingDatum gluing_datum_of(const Presheaf& f, std::vector<std::string> labels, std::vector<PointSet> covering);

struct CocycleViolation {
  std::size_t lambda = 0;
  std::size_t mu = 0;
  std::size_t nu = 0;
  /// Diagonal violations have lambda == mu == nu.
  bool diagonal = false;
};

struct CocycleReport {
  bool verdict = true;
  std::vector<CocycleViolation> violations;
};

CocycleReport check_cocycle(const GluingDatum& d);

struct GluedSheaf {
  Presheaf sheaf;
  /// η_λ : sheaf|_{U_λ} → F_λ.
  std::vector<PresheafMorphism> isos;
};

/// F′ from the basis of opens inside some U_λ, with the choice τ(V) = the
/// first index in `preference` (default: least label) whose U_λ contains V.
/// Throws CocycleViolation.
GluedSheaf glue(const GluingDatum& d, std::vector<std::size_t> preference = {});

/// θ_{λμ} = η′_λ ∘ (η′_μ)⁻¹ on every overlap.
bool satisfies_gluing(const GluingDatum& d, const GluedSheaf& g);

/// The unique isomorphism Φ : candidate.sheaf → glue(d).sheaf with
/// ζ_λ = η_λ ∘ Φ|_{U_λ}. Throws NotAGluing.
PresheafMorphism glued_uniqueness(const GluingDatum& d, const GluedSheaf& candidate);

/// The unique u : glue(d) → glue(e) with u_λ = ζ_λ ∘ u|_{U_λ} ∘ η_λ⁻¹.
/// Throws IncompatibleFamily when some u_λ does not intertwine the cocycles.
PresheafMorphism glue_morphisms(const GluingDatum& d, const GluedSheaf& gd, const GluingDatum& e,
                                const GluedSheaf& ge, const std::vector<PresheafMorphism>& family);
PresheafMorphism glue_morphisms(const GluingDatum& d, const GluingDatum& e, const std::vector<PresheafMorphism>& family);

/// Inverse of glue_morphisms: u_λ = ζ_λ ∘ u|_{U_λ} ∘ η_λ⁻¹.
std::vector<PresheafMorphism> local_family(const GluedSheaf& gd, const GluedSheaf& ge, const PresheafMorphism& u);

/// The datum on the open subspace v: covering V ∩ U_λ, restricted parts and
/// cocycle. Throws NotAnOpen.
GluingDatum restrict_gluing(const GluingDatum& d, PointSet v);

/// glue(d) restricted to v, carrying the restricted η_λ; a gluing of restrict_gluing(d, v).
GluedSheaf restrict_glued(const GluingDatum& d, const GluedSheaf& g, PointSet v);

}  // namespace finsheaf
