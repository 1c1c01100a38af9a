#pragma once

#include <optional>

#include "finsheaf/functors.hpp"

namespace finsheaf {

/// The identity-restriction presheaf U ↦ e on nonempty opens, terminal on ∅.
Presheaf constant_presheaf_of(const SpacePtr& space, const ValueObject& e);

/// An isomorphism from the sheaf associated to a constant presheaf onto p,
/// found by enumeration with value F(m_x) for some point; nullopt when p is
/// not a sheaf or no such isomorphism exists.
std::optional<PresheafMorphism> simple_witness(const Presheaf& p, std::size_t cap = kDefaultHomCap);

struct SimpleReport {
  bool constant = false;        // a)
  bool simple = false;          // b)
  bool locally_simple = false;  // c)
  bool sheaf = false;           // check_sheaf verdict
  bool unit_iso = false;        // the unit p → sheafify(p) is an isomorphism
  /// Per point: a nonempty neighborhood on which p is simple, if any.
  std::vector<std::optional<PointSet>> simple_neighborhoods;

  /// constant ⇒ (sheaf and unit_iso).
  bool a_implies_b() const { return !constant || (sheaf && unit_iso); }
  bool c_implies_a() const { return !locally_simple || constant; }
  bool equivalent() const { return constant == simple && simple == locally_simple; }
};

/// Evaluates the three conditions on an irreducible space and the two
/// implications between them. Throws NotIrreducible.
SimpleReport check_simple_equivalence(const Presheaf& p, std::size_t cap = kDefaultHomCap);

}  // namespace finsheaf
