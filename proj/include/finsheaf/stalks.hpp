#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "finsheaf/presheaf.hpp"

namespace finsheaf {

/// The stalk at a point with its canonical maps F(U) → F_x, one per open
/// neighborhood (in canonical order).
struct Stalk {
  std::size_t point = 0;
  ValueObject object;
  std::vector<PointSet> neighborhoods;
  std::vector<ValueMorphism> canonical;

  const ValueMorphism& canonical_from(PointSet u) const;
};

/// Stalk realized on the minimal open neighborhood: the object is F(m_x)
/// itself and canonical(U) is the restriction U → m_x.
Stalk stalk(const Presheaf& p, std::size_t x);
Stalk stalk(const Presheaf& p, std::string_view point);

/// Stalk as the germ quotient: the filtered colimit over all neighborhoods of x
/// ordered by reverse inclusion. Elements are labelled "(open-key,section)" by
/// their least representative.
Stalk stalk_by_germs(const Presheaf& p, std::size_t x);

/// The comparison F_x (minimal open form) → germ quotient; always a bijection.
ValueMorphism shortcut_comparison(const Presheaf& p, std::size_t x);

struct Germ {
  std::size_t point = 0;
  /// Label of the representative over the minimal open.
  std::string class_id;
  PointSet open;
  std::size_t section = 0;
};

/// Throws UnknownPoint if x ∉ u, NotASection for a bad label.
Germ germ_of(const Presheaf& p, PointSet u, std::size_t section, std::size_t x);
Germ germ_of(const Presheaf& p, PointSet u, std::string_view section, std::string_view point);

/// u_x : F_x → G_x.
ValueMorphism stalk_of_morphism(const PresheafMorphism& u, std::size_t x);

struct BasisStalk {
  Stalk stalk;
  /// The canonical bijection from the basis colimit to stalk(p, x).
  ValueMorphism comparison;
};

/// Colimit over the basis neighborhoods of x only.
Stalk stalk_via_basis(const BasisPresheaf& bp, std::size_t x);
BasisStalk stalk_via_basis(const Presheaf& p, const Basis& basis, std::size_t x);

/// Points with a nonzero stalk. Throws WrongCategory for set-valued presheaves.
PointSet support(const Presheaf& p);

}  // namespace finsheaf
