#include "finsheaf/simple.hpp"

#include "finsheaf/error.hpp"

namespace finsheaf {

Presheaf constant_presheaf_of(const SpacePtr& space, const ValueObject& e) {
  auto terminal = ValueObject::terminal(e.category());
  return Presheaf::from_functions(
      space, e.category(), [&](PointSet u) { return u.empty() ? terminal : e; },
      [&](PointSet, PointSet smaller, const ValueObject& from, const ValueObject& to) {
        if (!smaller.empty()) return ValueMorphism::identity(from);
        return ValueMorphism(from, to, std::vector<std::size_t>(from.size(), 0));
      });
}

std::optional<PresheafMorphism> simple_witness(const Presheaf& p, std::size_t cap) {
  const auto& space = p.space();
  if (space->size() == 0 || !is_sheaf(p)) return std::nullopt;
  // Any such isomorphism identifies the stalk at a point with the constant value.
  auto associated = sheafify(constant_presheaf_of(space, p.sections(space->minimal_open(0)))).sheaf;
  for (auto& m : enumerate_presheaf_morphisms(associated, p, cap))
    if (m.is_isomorphism()) return std::move(m);
  return std::nullopt;
}

SimpleReport check_simple_equivalence(const Presheaf& p, std::size_t cap) {
  const auto& space = *p.space();
  if (!space.is_irreducible()) throw Error(ErrorKind::NotIrreducible, "space is not irreducible");
  SimpleReport r;
  r.constant = is_constant_presheaf(p);
  r.sheaf = is_sheaf(p);
  r.unit_iso = sheafify(p).unit.is_isomorphism();
  r.simple = simple_witness(p, cap).has_value();
  r.locally_simple = r.sheaf;
  for (std::size_t x = 0; x < space.size(); ++x) {
    std::optional<PointSet> found;
    for (auto u : space.neighborhoods(x))
      if (simple_witness(restrict_to_open(p, u), cap)) {
        found = u;
        break;
      }
    r.locally_simple = r.locally_simple && found.has_value();
    r.simple_neighborhoods.push_back(found);
  }
  return r;
}

}  // namespace finsheaf
