#pragma once

#include "finsheaf/gluing.hpp"
#include "presheaves.hpp"

namespace fixtures {

using finsheaf::GluingDatum;
using finsheaf::PresheafMorphism;

// Locally constant {0,1}-valued functions on the open subspace u.
inline Presheaf constant_part(const SpacePtr& space, PointSet u) {
  return function_sheaf(space->subspace(u), {"0", "1"}, true);
}

// On a {0,1} function sheaf: flips the value at the points of `which`
// (labels), leaving the others alone.
inline PresheafMorphism flip_at(const Presheaf& f, const std::vector<std::string>& which) {
  const auto& space = *f.space();
  PointSet flipped;
  for (const auto& l : which)
    if (auto i = space.find_point(l)) flipped = flipped | PointSet::single(*i);
  return PresheafMorphism::from_function(f, f, [&](PointSet w) {
    const auto pts = w.indices();
    std::vector<PointSet> parts;
    for (auto p : pts) parts.push_back(space.minimal_open(p));
    std::vector<std::size_t> map;
    for (std::size_t s = 0; s < f.sections(w).size(); ++s) {
      std::vector<std::size_t> family;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const std::size_t v = f.restriction(w, parts[k])(s);
        family.push_back(flipped.contains(pts[k]) ? 1 - v : v);
      }
      map.push_back(*finsheaf::glue_sections(f, w, parts, family));
    }
    return ValueMorphism(f.sections(w), f.sections(w), map);
  });
}

// PC4 covered by A = {a,b,x} and B = {a,b,y} with constant parts; twisted
// swaps the value at b across the overlap {a,b}.
inline GluingDatum pc4_gluing(bool twisted) {
  auto p = pc4();
  auto a = set(p, {"a", "b", "x"});
  auto b = set(p, {"a", "b", "y"});
  GluingDatum d{p, {"A", "B"}, {a, b}, {constant_part(p, a), constant_part(p, b)}, {}};
  auto ov = d.part_on(1, a & b);
  auto theta = twisted ? flip_at(ov, {"b"}) : PresheafMorphism::identity(ov);
  d.cocycle.emplace(std::pair{0, 1}, PresheafMorphism(ov, d.part_on(0, a & b), theta.components()));
  return d;
}

}  // namespace fixtures
