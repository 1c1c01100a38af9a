#include "finsheaf/stalks.hpp"

#include <algorithm>

#include "finsheaf/error.hpp"

namespace finsheaf {

namespace {

void require_point(const FiniteSpace& space, std::size_t x) {
  if (x >= space.size()) throw Error(ErrorKind::UnknownPoint, "point index out of range");
}

// Covariant diagram over the given neighborhoods, U ≤ V iff V ⊆ U.
template <typename SectionsFn, typename RestrictFn>
ColimitResult germ_colimit(const FiniteSpace& space, Category category, const std::vector<PointSet>& nbhds,
                           SectionsFn sections, RestrictFn restriction) {
  Diagram d;
  d.category = category;
  d.orientation = Diagram::Orientation::Covariant;
  const std::size_t n = nbhds.size();
  d.leq.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    d.names.push_back(space.key_of(nbhds[i]));
    d.objects.push_back(sections(nbhds[i]));
    for (std::size_t j = 0; j < n; ++j) {
      d.leq[i][j] = nbhds[j].subset_of(nbhds[i]);
      if (i != j && d.leq[i][j]) d.arrows.emplace(std::pair{i, j}, restriction(nbhds[i], nbhds[j]));
    }
  }
  return filtered_colimit(d);
}

}  // namespace

const ValueMorphism& Stalk::canonical_from(PointSet u) const {
  auto it = std::find(neighborhoods.begin(), neighborhoods.end(), u);
  if (it == neighborhoods.end()) throw Error(ErrorKind::NotAnOpen, "not a neighborhood of the stalk point");
  return canonical[static_cast<std::size_t>(it - neighborhoods.begin())];
}

Stalk stalk(const Presheaf& p, std::size_t x) {
  const auto& space = *p.space();
  require_point(space, x);
  const PointSet m = space.minimal_open(x);
  Stalk out;
  out.point = x;
  out.object = p.sections(m);
  out.neighborhoods = space.neighborhoods(x);
  for (auto u : out.neighborhoods) out.canonical.push_back(p.restriction(u, m));
  return out;
}

Stalk stalk(const Presheaf& p, std::string_view point) { return stalk(p, p.space()->point_index(point)); }

Stalk stalk_by_germs(const Presheaf& p, std::size_t x) {
  const auto& space = *p.space();
  require_point(space, x);
  Stalk out;
  out.point = x;
  out.neighborhoods = space.neighborhoods(x);
  auto colim = germ_colimit(
      space, p.category(), out.neighborhoods, [&](PointSet u) { return p.sections(u); },
      [&](PointSet a, PointSet b) { return p.restriction(a, b); });
  out.object = colim.object;
  out.canonical = std::move(colim.injections);
  return out;
}

ValueMorphism shortcut_comparison(const Presheaf& p, std::size_t x) {
  auto germs = stalk_by_germs(p, x);
  return germs.canonical_from(p.space()->minimal_open(x));
}

Germ germ_of(const Presheaf& p, PointSet u, std::size_t section, std::size_t x) {
  const auto& space = *p.space();
  require_point(space, x);
  if (!u.contains(x)) throw Error(ErrorKind::UnknownPoint, "point " + space.label(x) + " is not in the open");
  const auto& fu = p.sections(u);
  if (section >= fu.size()) throw Error(ErrorKind::NotASection, "section index out of range");
  const PointSet m = space.minimal_open(x);
  const std::size_t rep = p.restriction(u, m)(section);
  return Germ{x, p.sections(m).element(rep), m, rep};
}

Germ germ_of(const Presheaf& p, PointSet u, std::string_view section, std::string_view point) {
  return germ_of(p, u, p.sections(u).index_of(section), p.space()->point_index(point));
}

ValueMorphism stalk_of_morphism(const PresheafMorphism& u, std::size_t x) {
  const auto& space = *u.source().space();
  require_point(space, x);
  return u.component(space.minimal_open(x));
}

namespace {

std::pair<Stalk, ColimitResult> basis_colimit(const BasisPresheaf& bp, std::size_t x) {
  const auto& space = *bp.space();
  require_point(space, x);
  Stalk out;
  out.point = x;
  for (auto m : bp.basis().members())
    if (m.contains(x)) out.neighborhoods.push_back(m);
  auto colim = germ_colimit(
      space, bp.category(), out.neighborhoods, [&](PointSet u) { return bp.sections(u); },
      [&](PointSet a, PointSet b) { return bp.restriction(a, b); });
  out.object = colim.object;
  out.canonical = colim.injections;
  return {std::move(out), std::move(colim)};
}

}  // namespace

Stalk stalk_via_basis(const BasisPresheaf& bp, std::size_t x) { return basis_colimit(bp, x).first; }

BasisStalk stalk_via_basis(const Presheaf& p, const Basis& basis, std::size_t x) {
  auto [restricted, colim] = basis_colimit(restrict_to_basis(p, basis), x);
  auto full = stalk(p, x);
  std::vector<ValueMorphism> cocone;
  for (auto u : restricted.neighborhoods) cocone.push_back(full.canonical_from(u));
  auto comparison = comediating_morphism(colim, full.object, cocone);
  return BasisStalk{std::move(restricted), std::move(comparison)};
}

PointSet support(const Presheaf& p) {
  if (p.category() != Category::FinAb) throw Error(ErrorKind::WrongCategory, "support needs group-valued sections");
  const auto& space = *p.space();
  PointSet out;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (p.sections(space.minimal_open(x)).size() > 1) out = out | PointSet::single(x);
  return out;
}

}  // namespace finsheaf
