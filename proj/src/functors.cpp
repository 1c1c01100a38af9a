#include "finsheaf/functors.hpp"

#include <algorithm>

#include "finsheaf/error.hpp"
#include "finsheaf/labels.hpp"

namespace finsheaf {

namespace {

void require_source(const ContinuousMap& psi, const Presheaf& f) {
  if (!same_space(psi.source(), f.space()))
    throw Error(ErrorKind::ValueMismatch, "presheaf does not live on the source of the map");
}

void require_target(const ContinuousMap& psi, const Presheaf& g) {
  if (!same_space(psi.target(), g.space()))
    throw Error(ErrorKind::ValueMismatch, "presheaf does not live on the target of the map");
}

bool same_map(const ContinuousMap& a, const ContinuousMap& b) {
  return same_space(a.source(), b.source()) && same_space(a.target(), b.target()) &&
         a.assignment() == b.assignment();
}

using Key = std::vector<std::vector<std::size_t>>;

Key key_of(const PresheafMorphism& m) {
  Key k;
  for (const auto& c : m.components()) k.push_back(c.table());
  return k;
}

}  // namespace

// ---------------------------------------------------------------------------
// Direct image

Presheaf pushforward(const ContinuousMap& psi, const Presheaf& f) {
  psi.require_continuous();
  require_source(psi, f);
  const auto& opens = psi.target()->opens();
  std::vector<PointSet> pre;
  std::vector<ValueObject> objs;
  for (auto v : opens) {
    pre.push_back(psi.preimage(v));
    objs.push_back(f.sections(pre.back()));
  }
  RestrictionMap given;
  for (std::size_t v = 0; v < opens.size(); ++v)
    for (std::size_t w = 0; w < opens.size(); ++w)
      if (opens[w].subset_of(opens[v])) given.emplace(std::pair{opens[v], opens[w]}, f.restriction(pre[v], pre[w]));
  return Presheaf(psi.target(), f.category(), std::move(objs), given);
}

PresheafMorphism pushforward(const ContinuousMap& psi, const PresheafMorphism& u) {
  auto src = pushforward(psi, u.source());
  auto tgt = pushforward(psi, u.target());
  return PresheafMorphism::from_function(src, tgt, [&](PointSet v) { return u.component(psi.preimage(v)); });
}

ValueMorphism stalk_comparison(const ContinuousMap& psi, const Presheaf& f, std::size_t x) {
  psi.require_continuous();
  require_source(psi, f);
  const auto& space = *psi.source();
  if (x >= space.size()) throw Error(ErrorKind::UnknownPoint, "point index out of range");
  const auto pre = psi.preimage(psi.target()->minimal_open(psi(x)));
  return f.restriction(pre, space.minimal_open(x));
}

bool is_embedding(const ContinuousMap& psi) {
  if (!psi.is_continuous()) return false;
  const auto& a = psi.assignment();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (a[i] == a[j]) return false;
  for (auto u : psi.source()->opens()) {
    const auto& targets = psi.target()->opens();
    if (std::none_of(targets.begin(), targets.end(), [&](PointSet v) { return psi.preimage(v) == u; })) return false;
  }
  return true;
}

ValueMorphism stalk_comparison_inverse(const ContinuousMap& psi, const Presheaf& f, std::size_t x) {
  if (!is_embedding(psi)) throw Error(ErrorKind::NotAnOpen, "map is not a homeomorphism onto its image");
  require_source(psi, f);
  const auto& space = *psi.source();
  if (x >= space.size()) throw Error(ErrorKind::UnknownPoint, "point index out of range");
  const auto mx = space.minimal_open(x);
  for (auto v : psi.target()->opens())
    if (psi.preimage(v) == mx)
      return f.restriction(mx, psi.preimage(psi.target()->minimal_open(psi(x))));
  throw Error(ErrorKind::NotAnOpen, "no open pulls back to the minimal open");
}

bool pushforward_support_bound(const ContinuousMap& psi, const Presheaf& f) {
  if (f.category() != Category::FinAb) throw Error(ErrorKind::WrongCategory, "support needs group values");
  auto push = pushforward(psi, f);
  return support(push).subset_of(psi.target()->closure(psi.image(support(f))));
}

// ---------------------------------------------------------------------------
// ψ-morphisms

PsiMorphism make_psi_morphism(const ContinuousMap& psi, const Presheaf& g, const Presheaf& f,
                              const PresheafMorphism& body) {
  require_target(psi, g);
  if (!(body.source() == g) || !(body.target() == pushforward(psi, f)))
    throw Error(ErrorKind::IncompatibleFamily, "morphism does not run G -> psi_*F");
  body.require_natural();
  return PsiMorphism{psi, g, f, body};
}

PsiFamily family_of(const PsiMorphism& u) {
  PsiFamily out;
  const auto& y = *u.map.target();
  for (std::size_t j = 0; j < y.open_count(); ++j) {
    const auto v = y.opens()[j];
    const auto pre = u.map.preimage(v);
    for (auto w : u.map.source()->opens_within(pre))
      out.emplace(std::pair{w, v}, compose(u.target.restriction(pre, w), u.body.component_at(j)));
  }
  return out;
}

namespace {

// Checks presence and the commuting squares for the pairs (U, V) drawn from
// `xs` × `ys` with U ⊆ ψ⁻¹(V). Steps (U', V) and (U, V') generate the order.
void check_family(const ContinuousMap& psi, const Presheaf& g, const Presheaf& f, std::span<const PointSet> xs,
                  std::span<const PointSet> ys, const PsiFamily& family) {
  const auto& sx = *psi.source();
  const auto& sy = *psi.target();
  auto name = [&](PointSet u, PointSet v) { return "(" + sx.key_of(u) + ", " + sy.key_of(v) + ")"; };
  auto admissible = [&](PointSet u, PointSet v) {
    return std::find(xs.begin(), xs.end(), u) != xs.end() && std::find(ys.begin(), ys.end(), v) != ys.end() &&
           u.subset_of(psi.preimage(v));
  };
  for (const auto& [key, m] : family) {
    if (!admissible(key.first, key.second))
      throw Error(ErrorKind::IncompatibleFamily, "pair " + name(key.first, key.second) + " is not admissible");
    if (!(m.source() == g.sections(key.second)) || !(m.target() == f.sections(key.first)))
      throw Error(ErrorKind::IncompatibleFamily, "map at " + name(key.first, key.second) + " has the wrong objects");
  }
  for (auto v : ys)
    for (auto u : xs) {
      if (!u.subset_of(psi.preimage(v))) continue;
      auto it = family.find({u, v});
      if (it == family.end()) throw Error(ErrorKind::IncompatibleFamily, "missing map at " + name(u, v));
      for (auto u2 : xs) {
        if (u2 == u || !u2.subset_of(u)) continue;
        auto lower = family.find({u2, v});
        if (lower != family.end() && !(lower->second == compose(f.restriction(u, u2), it->second)))
          throw Error(ErrorKind::IncompatibleFamily, "square fails from " + name(u, v) + " to " + name(u2, v));
      }
      for (auto v2 : ys) {
        if (v2 == v || !v2.subset_of(v) || !u.subset_of(psi.preimage(v2))) continue;
        auto lower = family.find({u, v2});
        if (lower != family.end() && !(it->second == compose(lower->second, g.restriction(v, v2))))
          throw Error(ErrorKind::IncompatibleFamily, "square fails from " + name(u, v) + " to " + name(u, v2));
      }
    }
}

}  // namespace

PsiMorphism psi_morphism_from_family(const ContinuousMap& psi, const Presheaf& g, const Presheaf& f,
                                     const PsiFamily& family) {
  psi.require_continuous();
  require_source(psi, f);
  require_target(psi, g);
  const auto& xs = psi.source()->opens();
  const auto& ys = psi.target()->opens();
  check_family(psi, g, f, xs, ys, family);
  auto push = pushforward(psi, f);
  auto body = PresheafMorphism::from_function(g, push, [&](PointSet v) {
    return family.at({psi.preimage(v), v});
  });
  return make_psi_morphism(psi, g, f, body);
}

PsiMorphism psi_morphism_from_basis_family(const ContinuousMap& psi, const Presheaf& g, const Presheaf& f,
                                           const Basis& source_basis, const Basis& target_basis,
                                           const PsiFamily& family) {
  psi.require_continuous();
  require_source(psi, f);
  require_target(psi, g);
  if (!same_space(source_basis.space(), psi.source()) || !same_space(target_basis.space(), psi.target()))
    throw Error(ErrorKind::ValueMismatch, "bases do not live on the spaces of the map");
  if (!is_sheaf(g) || !is_sheaf(f)) throw Error(ErrorKind::NotASheaf, "both presheaves must be sheaves");
  check_family(psi, g, f, source_basis.members(), target_basis.members(), family);

  auto ext_x = extend_from_basis(restrict_to_basis(f, source_basis));
  auto pair_x = compare_with_extension(f, ext_x);
  const auto& sx = *psi.source();
  std::map<PointSet, ValueMorphism> theta;
  for (auto v : target_basis.members()) {
    const auto pre = psi.preimage(v);
    const std::size_t i = sx.open_index(pre);
    std::vector<ValueMorphism> cone;
    for (auto u : ext_x.members_within[i]) cone.push_back(family.at({u, v}));
    auto into_limit = mediating_morphism(g.sections(v), cone, ext_x.limits[i]);
    theta.emplace(v, compose(pair_x.backward.component_at(i), into_limit));
  }

  auto push = pushforward(psi, f);
  auto ext_y = extend_from_basis(restrict_to_basis(push, target_basis));
  auto pair_y = compare_with_extension(push, ext_y);
  const auto& sy = *psi.target();
  auto body = PresheafMorphism::from_function(g, push, [&](PointSet w) {
    const std::size_t j = sy.open_index(w);
    std::vector<ValueMorphism> cone;
    for (auto v : ext_y.members_within[j]) cone.push_back(compose(theta.at(v), g.restriction(w, v)));
    return compose(pair_y.backward.component_at(j), mediating_morphism(g.sections(w), cone, ext_y.limits[j]));
  });
  return make_psi_morphism(psi, g, f, body);
}

// ---------------------------------------------------------------------------
// Inverse image

InverseImage pullback(const ContinuousMap& psi, const Presheaf& g) {
  psi.require_continuous();
  require_target(psi, g);
  const auto& x_space = *psi.source();
  const auto& y_space = *psi.target();
  const std::size_t n = x_space.size();

  // Stalk of G at ψ(x) on the minimal open, and the transition maps toward
  // the points of m_x.
  std::vector<PointSet> stalk_open(n);
  std::vector<const ValueObject*> stalk_obj(n);
  for (std::size_t x = 0; x < n; ++x) {
    stalk_open[x] = y_space.minimal_open(psi(x));
    stalk_obj[x] = &g.sections(stalk_open[x]);
  }
  std::vector<std::vector<const ValueMorphism*>> trans(n, std::vector<const ValueMorphism*>(n, nullptr));
  for (std::size_t x = 0; x < n; ++x)
    for (auto z : x_space.minimal_open(x).indices())
      if (z != x) trans[x][z] = &g.restriction(stalk_open[x], stalk_open[z]);

  auto germs = std::make_shared<detail::GermSections>();
  const auto& opens = x_space.opens();
  std::vector<ValueObject> objs;
  std::vector<std::map<std::vector<std::size_t>, std::size_t>> lookup(opens.size());
  for (std::size_t i = 0; i < opens.size(); ++i) {
    const auto pts = opens[i].indices();
    std::vector<std::vector<std::size_t>> found;
    std::vector<std::size_t> s(pts.size());
    auto consistent = [&](std::size_t k) {
      const std::size_t p = pts[k];
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t q = pts[j];
        if (trans[p][q] && (*trans[p][q])(s[k]) != s[j]) return false;
        if (trans[q][p] && (*trans[q][p])(s[j]) != s[k]) return false;
      }
      return true;
    };
    auto search = [&](auto&& self, std::size_t k) -> void {
      if (k == pts.size()) {
        found.push_back(s);
        return;
      }
      for (std::size_t e = 0; e < stalk_obj[pts[k]]->size(); ++e) {
        s[k] = e;
        if (consistent(k)) self(self, k + 1);
      }
    };
    search(search, 0);

    std::vector<std::string> labels;
    for (const auto& fam : found) {
      std::vector<std::string> parts;
      for (std::size_t k = 0; k < pts.size(); ++k) parts.push_back(stalk_obj[pts[k]]->element(fam[k]));
      labels.push_back(tuple_label(parts));
    }
    ValueObject obj;
    if (g.category() == Category::FinSet) {
      obj = ValueObject::set(labels);
    } else {
      std::map<std::vector<std::size_t>, std::size_t> pos;
      for (std::size_t k = 0; k < found.size(); ++k) pos.emplace(found[k], k);
      obj = ValueObject::group(labels, [&](std::size_t a, std::size_t b) {
        std::vector<std::size_t> sum(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) sum[k] = stalk_obj[pts[k]]->add(found[a][k], found[b][k]);
        return pos.at(sum);
      });
    }
    std::vector<std::vector<std::size_t>> ordered(found.size());
    for (std::size_t k = 0; k < found.size(); ++k) {
      const std::size_t at = obj.index_of(labels[k]);
      lookup[i].emplace(found[k], at);
      ordered[at] = std::move(found[k]);
    }
    germs->families.push_back(std::move(ordered));
    objs.push_back(std::move(obj));
  }

  RestrictionMap given;
  for (std::size_t v = 0; v < opens.size(); ++v) {
    const auto big = opens[v].indices();
    for (std::size_t u = 0; u < opens.size(); ++u) {
      if (!opens[u].subset_of(opens[v])) continue;
      std::vector<std::size_t> keep;
      for (std::size_t k = 0; k < big.size(); ++k)
        if (opens[u].contains(big[k])) keep.push_back(k);
      std::vector<std::size_t> map;
      for (const auto& fam : germs->families[v]) {
        std::vector<std::size_t> part;
        for (auto k : keep) part.push_back(fam[k]);
        map.push_back(lookup[u].at(part));
      }
      given.emplace(std::pair{opens[v], opens[u]}, ValueMorphism(objs[v], objs[u], std::move(map)));
    }
  }
  Presheaf sheaf(psi.source(), g.category(), std::move(objs), given);

  auto push = pushforward(psi, sheaf);
  auto unit = PresheafMorphism::from_function(g, push, [&](PointSet v) {
    const auto pre = psi.preimage(v);
    const std::size_t i = x_space.open_index(pre);
    const auto pts = pre.indices();
    std::vector<const ValueMorphism*> to_stalk;
    for (auto p : pts) to_stalk.push_back(&g.restriction(v, stalk_open[p]));
    std::vector<std::size_t> map;
    for (std::size_t s = 0; s < g.sections(v).size(); ++s) {
      std::vector<std::size_t> fam;
      for (const auto* r : to_stalk) fam.push_back((*r)(s));
      map.push_back(lookup[i].at(fam));
    }
    return ValueMorphism(g.sections(v), sheaf.sections_at(i), std::move(map));
  });
  return InverseImage{psi, g, sheaf, unit, std::move(germs)};
}

InverseImage sheafify(const Presheaf& g) { return pullback(ContinuousMap::identity(g.space()), g); }

PresheafMorphism pullback_morphism(const InverseImage& from, const InverseImage& to, const PresheafMorphism& u) {
  if (!from.germs || !to.germs) throw Error(ErrorKind::ValueMismatch, "inverse images must come from pullback");
  if (!same_map(from.map, to.map)) throw Error(ErrorKind::ValueMismatch, "inverse images along different maps");
  if (!(u.source() == from.source) || !(u.target() == to.source))
    throw Error(ErrorKind::ValueMismatch, "morphism does not connect the pulled-back presheaves");
  const auto& psi = from.map;
  const auto& x_space = *psi.source();
  const auto& y_space = *psi.target();
  std::vector<const ValueMorphism*> at_stalk;
  for (std::size_t x = 0; x < x_space.size(); ++x) at_stalk.push_back(&u.component(y_space.minimal_open(psi(x))));
  std::vector<ValueMorphism> comps;
  for (std::size_t i = 0; i < x_space.open_count(); ++i) {
    const auto pts = x_space.opens()[i].indices();
    std::map<std::vector<std::size_t>, std::size_t> target_index;
    const auto& tf = to.germs->families[i];
    for (std::size_t k = 0; k < tf.size(); ++k) target_index.emplace(tf[k], k);
    std::vector<std::size_t> map;
    for (const auto& fam : from.germs->families[i]) {
      std::vector<std::size_t> image;
      for (std::size_t k = 0; k < pts.size(); ++k) image.push_back((*at_stalk[pts[k]])(fam[k]));
      map.push_back(target_index.at(image));
    }
    comps.emplace_back(from.sheaf.sections_at(i), to.sheaf.sections_at(i), std::move(map));
  }
  return PresheafMorphism(from.sheaf, to.sheaf, std::move(comps));
}

namespace {

// ν_U(s) glues t(p) = ρ(ψ⁻¹(m_ψp) → m_p)(u(s(p))) over the minimal opens of U.
PresheafMorphism sharp_unchecked(const InverseImage& inv, const PsiMorphism& u) {
  const auto& psi = inv.map;
  const auto& f = u.target;
  const auto& x_space = *psi.source();
  const auto& y_space = *psi.target();
  const std::size_t n = x_space.size();
  std::vector<PointSet> parts_of(n);
  std::vector<ValueMorphism> to_part;
  for (std::size_t p = 0; p < n; ++p) {
    const auto my = y_space.minimal_open(psi(p));
    parts_of[p] = x_space.minimal_open(p);
    to_part.push_back(compose(f.restriction(psi.preimage(my), parts_of[p]), u.body.component(my)));
  }
  std::vector<ValueMorphism> comps;
  for (std::size_t i = 0; i < x_space.open_count(); ++i) {
    const auto u_open = x_space.opens()[i];
    const auto pts = u_open.indices();
    std::vector<PointSet> parts;
    for (auto p : pts) parts.push_back(parts_of[p]);
    std::vector<std::size_t> map;
    for (const auto& fam : inv.germs->families[i]) {
      std::vector<std::size_t> local;
      for (std::size_t k = 0; k < pts.size(); ++k) local.push_back(to_part[pts[k]](fam[k]));
      auto glued = glue_sections(f, u_open, parts, local);
      if (!glued) throw Error(ErrorKind::NotASheaf, "local images over " + x_space.key_of(u_open) + " do not glue");
      map.push_back(*glued);
    }
    comps.emplace_back(inv.sheaf.sections_at(i), f.sections_at(i), std::move(map));
  }
  return PresheafMorphism(inv.sheaf, f, std::move(comps));
}

void require_germs(const InverseImage& inv) {
  if (!inv.germs) throw Error(ErrorKind::ValueMismatch, "inverse image must come from pullback");
}

void require_matches(const InverseImage& inv, const PsiMorphism& u) {
  if (!same_map(inv.map, u.map)) throw Error(ErrorKind::ValueMismatch, "morphism along a different map");
  if (!(u.source == inv.source)) throw Error(ErrorKind::ValueMismatch, "morphism starts at a different presheaf");
}

}  // namespace

PresheafMorphism sharp(const InverseImage& inv, const PsiMorphism& u) {
  require_germs(inv);
  require_matches(inv, u);
  if (!is_sheaf(u.target)) throw Error(ErrorKind::NotASheaf, "target is not a sheaf");
  return sharp_unchecked(inv, u);
}

PsiMorphism flat(const InverseImage& inv, const PresheafMorphism& nu) {
  if (!(nu.source() == inv.sheaf)) throw Error(ErrorKind::ValueMismatch, "morphism does not start at the inverse image");
  return PsiMorphism{inv.map, inv.source, nu.target(), compose(pushforward(inv.map, nu), inv.unit)};
}

Counit counit(const ContinuousMap& psi, const Presheaf& f) {
  if (!is_sheaf(f)) throw Error(ErrorKind::NotASheaf, "counit needs a sheaf");
  auto push = pushforward(psi, f);
  auto inv = pullback(psi, push);
  auto morphism = sharp_unchecked(inv, PsiMorphism{psi, push, f, PresheafMorphism::identity(push)});
  return Counit{std::move(inv), std::move(morphism)};
}

AdjunctionWitness check_adjunction(const InverseImage& inv, const Presheaf& f, std::size_t cap) {
  require_germs(inv);
  require_source(inv.map, f);
  if (!is_sheaf(f)) throw Error(ErrorKind::NotASheaf, "target is not a sheaf");
  AdjunctionWitness w;
  w.sheaf_side = enumerate_presheaf_morphisms(inv.sheaf, f, cap);
  auto push = pushforward(inv.map, f);
  for (auto& body : enumerate_presheaf_morphisms(inv.source, push, cap))
    w.psi_side.push_back(PsiMorphism{inv.map, inv.source, f, std::move(body)});

  std::map<Key, std::size_t> sheaf_index;
  std::map<Key, std::size_t> psi_index;
  for (std::size_t i = 0; i < w.sheaf_side.size(); ++i) sheaf_index.emplace(key_of(w.sheaf_side[i]), i);
  for (std::size_t j = 0; j < w.psi_side.size(); ++j) psi_index.emplace(key_of(w.psi_side[j].body), j);

  constexpr std::size_t missing = static_cast<std::size_t>(-1);
  bool ok = w.sheaf_side.size() == w.psi_side.size();
  for (const auto& nu : w.sheaf_side) {
    auto it = psi_index.find(key_of(flat(inv, nu).body));
    w.forward.push_back(it == psi_index.end() ? missing : it->second);
    ok = ok && it != psi_index.end();
  }
  for (const auto& u : w.psi_side) {
    auto it = sheaf_index.find(key_of(sharp_unchecked(inv, u)));
    w.backward.push_back(it == sheaf_index.end() ? missing : it->second);
    ok = ok && it != sheaf_index.end();
  }
  for (std::size_t i = 0; ok && i < w.forward.size(); ++i) ok = w.backward[w.forward[i]] == i;
  for (std::size_t j = 0; ok && j < w.backward.size(); ++j) ok = w.forward[w.backward[j]] == j;
  w.bijective = ok;
  return w;
}

bool check_adjunction_naturality(const InverseImage& inv, const PresheafMorphism& w, std::size_t cap) {
  auto pushed = pushforward(inv.map, w);
  for (const auto& nu : enumerate_presheaf_morphisms(inv.sheaf, w.source(), cap))
    if (!(flat(inv, compose(w, nu)).body == compose(pushed, flat(inv, nu).body))) return false;
  return true;
}

PresheafMorphism canonical_comparison(const InverseImage& first, const InverseImage& second) {
  if (!same_map(first.map, second.map)) throw Error(ErrorKind::ValueMismatch, "inverse images along different maps");
  if (!(first.source == second.source)) throw Error(ErrorKind::ValueMismatch, "inverse images of different presheaves");
  const auto reference = first.germs ? first : pullback(first.map, first.source);
  auto alpha = [&](const InverseImage& pair) {
    if (!(pair.unit.source() == pair.source) || !(pair.unit.target() == pushforward(pair.map, pair.sheaf)) ||
        !pair.unit.is_natural())
      throw Error(ErrorKind::NotInverseImagePair, "unit does not run G -> psi_*F");
    if (!is_sheaf(pair.sheaf)) throw Error(ErrorKind::NotInverseImagePair, "candidate is not a sheaf");
    auto a = sharp_unchecked(reference, PsiMorphism{pair.map, pair.source, pair.sheaf, pair.unit});
    if (!a.is_isomorphism()) throw Error(ErrorKind::NotInverseImagePair, "unit is not universal");
    return a;
  };
  return compose(alpha(second), alpha(first).inverse());
}

CompositionIso composition_iso(const ContinuousMap& psi, const ContinuousMap& psi_prime, const Presheaf& h) {
  auto inner = pullback(psi_prime, h);
  auto outer = pullback(psi, inner.sheaf);
  auto through = compose(psi_prime, psi);
  auto unit = compose(pushforward(psi_prime, outer.unit), inner.unit);
  InverseImage nested{through, h, outer.sheaf, unit, nullptr};
  auto direct = pullback(through, h);
  auto iso = canonical_comparison(direct, nested);
  return CompositionIso{std::move(direct), std::move(inner), std::move(nested), std::move(iso)};
}

ValueMorphism pullback_stalk_iso(const InverseImage& inv, std::size_t x) {
  const auto& psi = inv.map;
  if (x >= psi.source()->size()) throw Error(ErrorKind::UnknownPoint, "point index out of range");
  const auto my = psi.target()->minimal_open(psi(x));
  return compose(inv.sheaf.restriction(psi.preimage(my), psi.source()->minimal_open(x)), inv.unit.component(my));
}

}  // namespace finsheaf
