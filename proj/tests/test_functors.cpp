#include <set>

#include "doctest.h"
#include "finsheaf/error.hpp"
#include "finsheaf/functors.hpp"
#include "presheaves.hpp"
#include "spaces.hpp"

using namespace finsheaf;
using fixtures::set;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ParseError;
}

// Sections of ψ*G over U straight from the definition: families of germs
// (s(x) ∈ G_ψ(x), germ quotient) such that every x has V ∋ ψ(x), an open
// W ∋ x inside U ∩ ψ⁻¹(V) and t ∈ G(V) with s(z) = t_ψ(z) on W.
std::set<std::vector<std::string>> brute_force_pullback(const ContinuousMap& psi, const Presheaf& g, PointSet u) {
  const auto& xs = *psi.source();
  const auto& ys = *psi.target();
  const auto pts = u.indices();
  std::vector<Stalk> st;
  for (std::size_t x = 0; x < xs.size(); ++x) st.push_back(stalk_by_germs(g, psi(x)));
  std::set<std::vector<std::string>> out;
  std::vector<std::size_t> s(pts.size(), 0);
  for (auto p : pts)
    if (st[p].object.size() == 0) return out;
  auto position = [&](std::size_t z) {
    return static_cast<std::size_t>(std::find(pts.begin(), pts.end(), z) - pts.begin());
  };
  while (true) {
    bool all_ok = true;
    for (std::size_t k = 0; k < pts.size() && all_ok; ++k) {
      const std::size_t x = pts[k];
      bool found = false;
      for (auto v : ys.neighborhoods(psi(x)))
        for (auto w : xs.neighborhoods(x)) {
          if (found || !w.subset_of(u & psi.preimage(v))) continue;
          for (std::size_t t = 0; t < g.sections(v).size() && !found; ++t) {
            bool agrees = true;
            for (auto z : w.indices()) agrees = agrees && s[position(z)] == st[z].canonical_from(v)(t);
            found = agrees;
          }
        }
      all_ok = found;
    }
    if (all_ok) {
      std::vector<std::string> labels;
      for (std::size_t k = 0; k < pts.size(); ++k) labels.push_back(st[pts[k]].object.element(s[k]));
      out.insert(labels);
    }
    std::size_t pos = pts.size();
    while (pos > 0) {
      if (++s[pos - 1] < st[pts[pos - 1]].object.size()) break;
      s[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return out;
}

std::set<std::vector<std::string>> pullback_as_germs(const InverseImage& inv, std::size_t open_index) {
  const auto& psi = inv.map;
  const auto pts = psi.source()->opens()[open_index].indices();
  std::set<std::vector<std::string>> out;
  for (const auto& fam : inv.germs->families[open_index]) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      auto cmp = shortcut_comparison(inv.source, psi(pts[k]));
      labels.push_back(cmp.target().element(cmp(fam[k])));
    }
    out.insert(labels);
  }
  return out;
}

struct Case {
  ContinuousMap map;
  Presheaf g;
};

std::vector<Case> pullback_cases() {
  std::vector<Case> out;
  auto spaces = fixtures::all_topologies(2);
  spaces.push_back(fixtures::pt());
  for (const auto& y : spaces) {
    std::vector<Presheaf> gs;
    std::size_t k = 0;
    fixtures::for_each_small_presheaf(y, 2, [&](const fixtures::RawPresheaf& raw) {
      if (k++ % 23 == 0) gs.push_back(fixtures::to_presheaf(raw));
    });
    for (const auto& x : spaces)
      for (const auto& m : fixtures::all_continuous_maps(x, y))
        for (const auto& g : gs) out.push_back({m, g});
  }
  auto p = fixtures::pc4();
  auto s = fixtures::sierp();
  auto to_sierp = ContinuousMap::from_labels(p, s, {{"a", "1"}, {"b", "1"}, {"x", "0"}, {"y", "0"}});
  out.push_back({to_sierp, fixtures::sierp_two_to_one()});
  out.push_back({to_sierp, fixtures::function_sheaf(s, ValueObject::cyclic(2), false)});
  auto into_pc4 = ContinuousMap::from_labels(s, p, {{"1", "a"}, {"0", "x"}});
  out.push_back({into_pc4, fixtures::function_sheaf(p, {"0", "1"}, true)});
  out.push_back({ContinuousMap::identity(fixtures::disc2()), fixtures::disc2_g2_failure()});
  return out;
}

}  // namespace

TEST_CASE("pushforward") {
  auto p = fixtures::pc4();
  auto s = fixtures::sierp();
  auto pt = fixtures::pt();
  auto f = fixtures::function_sheaf(p, {"0", "1"}, false);
  CHECK(pushforward(ContinuousMap::identity(p), f) == f);

  auto to_sierp = ContinuousMap::from_labels(p, s, {{"a", "1"}, {"b", "1"}, {"x", "0"}, {"y", "0"}});
  auto to_pt = ContinuousMap::from_labels(s, pt, {{"0", "p"}, {"1", "p"}});
  auto pushed = pushforward(to_sierp, f);
  CHECK(pushed.sections(set(s, {"1"})) == f.sections(set(p, {"a", "b"})));
  CHECK(is_sheaf(pushed));
  // Pushing to a point gives the global sections.
  auto global = pushforward(compose(to_pt, to_sierp), f);
  CHECK(global.sections(pt->all()) == f.sections(p->all()));
  CHECK(global == pushforward(to_pt, pushed));

  // Functoriality on morphisms.
  auto lc = fixtures::function_sheaf(p, {"0", "1"}, true);
  auto homs = enumerate_presheaf_morphisms(lc, f);
  REQUIRE_FALSE(homs.empty());
  for (std::size_t i = 0; i < homs.size(); i += 5) {
    auto once = pushforward(compose(to_pt, to_sierp), homs[i]);
    CHECK(once == pushforward(to_pt, pushforward(to_sierp, homs[i])));
    CHECK(once.is_natural());
  }
  CHECK(pushforward(to_sierp, PresheafMorphism::identity(f)) == PresheafMorphism::identity(pushed));

  auto bad = ContinuousMap::from_labels(s, fixtures::disc2(), {{"0", "1"}, {"1", "2"}});
  CHECK(kind_of([&] { pushforward(bad, fixtures::sierp_two_to_one()); }) == ErrorKind::NotContinuous);
}

TEST_CASE("pushforward stalk comparison") {
  for (const auto& c : pullback_cases()) {
    const auto& psi = c.map;
    auto inv = pullback(psi, c.g);
    const auto& f = inv.sheaf;
    auto push = pushforward(psi, f);
    for (std::size_t x = 0; x < psi.source()->size(); ++x) {
      auto cmp = stalk_comparison(psi, f, x);
      CHECK(cmp.source() == stalk(push, psi(x)).object);
      CHECK(cmp.target() == stalk(f, x).object);
      // Compatible with the canonical maps out of (ψ_*F)(V) = F(ψ⁻¹V).
      for (auto v : psi.target()->neighborhoods(psi(x)))
        CHECK(compose(cmp, stalk(push, psi(x)).canonical_from(v)) == stalk(f, x).canonical_from(psi.preimage(v)));
      if (is_embedding(psi)) {
        auto inv_cmp = stalk_comparison_inverse(psi, f, x);
        CHECK(compose(cmp, inv_cmp) == ValueMorphism::identity(cmp.target()));
        CHECK(compose(inv_cmp, cmp) == ValueMorphism::identity(cmp.source()));
      }
    }
  }
  auto s = fixtures::sierp();
  auto collapse = ContinuousMap::from_labels(s, fixtures::pt(), {{"0", "p"}, {"1", "p"}});
  CHECK_FALSE(is_embedding(collapse));
  CHECK(kind_of([&] { stalk_comparison_inverse(collapse, fixtures::sierp_two_to_one(), 0); }) ==
        ErrorKind::NotAnOpen);
}

TEST_CASE("support of a direct image") {
  auto z2 = ValueObject::cyclic(2);
  std::vector<std::pair<ContinuousMap, Presheaf>> cases;
  for (const auto& x : fixtures::all_topologies(2))
    for (const auto& y : fixtures::all_topologies(2))
      for (const auto& m : fixtures::all_continuous_maps(x, y)) {
        cases.emplace_back(m, fixtures::function_sheaf(x, z2, true));
        cases.emplace_back(m, fixtures::function_sheaf(x, z2, false));
      }
  for (const auto& [m, f] : cases) CHECK(pushforward_support_bound(m, f));
  auto s = fixtures::sierp();
  CHECK(kind_of([&] { pushforward_support_bound(ContinuousMap::identity(s), fixtures::sierp_two_to_one()); }) ==
        ErrorKind::WrongCategory);
}

TEST_CASE("psi-morphisms from families") {
  auto p = fixtures::pc4();
  auto s = fixtures::sierp();
  auto psi = ContinuousMap::from_labels(p, s, {{"a", "1"}, {"b", "1"}, {"x", "0"}, {"y", "0"}});
  auto g = fixtures::function_sheaf(s, {"0", "1"}, false);
  auto f = fixtures::function_sheaf(p, {"0", "1"}, true);
  auto push = pushforward(psi, f);
  auto homs = enumerate_presheaf_morphisms(g, push);
  REQUIRE(homs.size() > 1);
  auto basis_x = *recorded_basis(p);
  auto basis_y = *recorded_basis(s);
  for (const auto& body : homs) {
    auto u = make_psi_morphism(psi, g, f, body);
    auto fam = family_of(u);
    CHECK(psi_morphism_from_family(psi, g, f, fam).body == body);

    PsiFamily on_basis;
    for (const auto& [key, m] : fam)
      if (basis_x.contains(key.first) && basis_y.contains(key.second)) on_basis.emplace(key, m);
    CHECK(psi_morphism_from_basis_family(psi, g, f, basis_x, basis_y, on_basis).body == body);
  }

  auto fam = family_of(make_psi_morphism(psi, g, f, homs.back()));
  auto missing = fam;
  missing.erase(missing.begin());
  CHECK(kind_of([&] { psi_morphism_from_family(psi, g, f, missing); }) == ErrorKind::IncompatibleFamily);
  auto bent = fam;
  const auto key = std::pair{set(p, {"a"}), s->all()};
  const auto& old = bent.at(key);
  std::vector<std::size_t> table(old.table());
  table[0] = 1 - table[0];
  bent.insert_or_assign(key, ValueMorphism(old.source(), old.target(), table));
  CHECK(kind_of([&] { psi_morphism_from_family(psi, g, f, bent); }) == ErrorKind::IncompatibleFamily);

  auto d = fixtures::disc2();
  auto id = ContinuousMap::identity(d);
  auto basis_d = *recorded_basis(d);
  auto not_sheaf = fixtures::disc2_g2_failure();
  CHECK(kind_of([&] {
          psi_morphism_from_basis_family(id, not_sheaf, not_sheaf, basis_d, basis_d, {});
        }) == ErrorKind::NotASheaf);
}

TEST_CASE("germ-family pullback matches the definition") {
  for (const auto& c : pullback_cases()) {
    auto inv = pullback(c.map, c.g);
    const auto& opens = c.map.source()->opens();
    for (std::size_t i = 0; i < opens.size(); ++i) {
      auto expected = brute_force_pullback(c.map, c.g, opens[i]);
      CHECK(pullback_as_germs(inv, i) == expected);
      CHECK(inv.sheaf.sections_at(i).size() == expected.size());
    }
    CHECK(validate_presheaf(inv.sheaf));
    CHECK(is_sheaf(inv.sheaf));
    CHECK(inv.unit.is_natural());
    CHECK(inv.unit.target() == pushforward(c.map, inv.sheaf));
  }
}

TEST_CASE("sheafification") {
  auto d = fixtures::disc2();
  auto two = ValueObject::set({"p", "q"});
  auto c = fixtures::constant_presheaf(d, two, two);
  auto sh = sheafify(c);
  CHECK(sh.sheaf.sections(d->all()).size() == 4);
  CHECK(sh.sheaf.sections(PointSet{}).size() == 1);
  CHECK(sh.sheaf.sections(set(d, {"1"})).size() == 2);

  auto g2 = sheafify(fixtures::disc2_g2_failure());
  CHECK(g2.sheaf.sections(d->all()).size() == 2);

  // A sheaf is its own sheafification through the unit.
  auto f = fixtures::function_sheaf(fixtures::pc4(), {"0", "1"}, true);
  auto again = sheafify(f);
  CHECK(again.unit.is_isomorphism());
}

TEST_CASE("adjunction") {
  std::size_t checked = 0;
  for (const auto& c : pullback_cases()) {
    if (checked > 60) break;
    auto inv = pullback(c.map, c.g);
    const auto& x = c.map.source();
    std::vector<Presheaf> targets{fixtures::function_sheaf(x, {"0", "1"}, true),
                                  fixtures::function_sheaf(x, {"0", "1"}, false)};
    for (const auto& f : targets) {
      auto w = check_adjunction(inv, f);
      CHECK(w.bijective);
      CHECK(w.sheaf_side.size() == w.psi_side.size());
      ++checked;
    }
    auto homs = enumerate_presheaf_morphisms(targets[0], targets[1]);
    for (std::size_t k = 0; k < homs.size(); k += 3) CHECK(check_adjunction_naturality(inv, homs[k]));
  }
  CHECK(checked > 20);

  auto inv = pullback(ContinuousMap::identity(fixtures::disc2()), fixtures::disc2_g2_failure());
  CHECK(kind_of([&] { check_adjunction(inv, fixtures::disc2_g2_failure()); }) == ErrorKind::NotASheaf);
  auto u = PsiMorphism{inv.map, inv.source, inv.source,
                       PresheafMorphism(inv.source, pushforward(inv.map, inv.source),
                                        PresheafMorphism::identity(inv.source).components())};
  CHECK(kind_of([&] { sharp(inv, u); }) == ErrorKind::NotASheaf);
}

TEST_CASE("unit and counit") {
  for (const auto& c : pullback_cases()) {
    const auto& psi = c.map;
    auto f = fixtures::function_sheaf(psi.source(), {"0", "1"}, false);
    auto sigma = counit(psi, f);
    auto push = pushforward(psi, f);
    // ψ_*(σ_F) ∘ ρ_{ψ_*F} = id.
    CHECK(compose(pushforward(psi, sigma.morphism), sigma.inverse.unit) == PresheafMorphism::identity(push));
    // σ_{ψ*G} ∘ ψ*(ρ_G) = id.
    auto inv = pullback(psi, c.g);
    auto sigma_g = counit(psi, inv.sheaf);
    auto lifted = pullback_morphism(inv, sigma_g.inverse, inv.unit);
    CHECK(compose(sigma_g.morphism, lifted) == PresheafMorphism::identity(inv.sheaf));
  }
}

TEST_CASE("pullback of morphisms") {
  auto s = fixtures::sierp();
  auto p = fixtures::pc4();
  auto psi = ContinuousMap::from_labels(p, s, {{"a", "1"}, {"b", "1"}, {"x", "0"}, {"y", "0"}});
  auto g1 = fixtures::sierp_two_to_one();
  auto g2 = fixtures::function_sheaf(s, {"0", "1"}, false);
  auto a = pullback(psi, g1);
  auto b = pullback(psi, g2);
  auto homs = enumerate_presheaf_morphisms(g1, g2);
  REQUIRE_FALSE(homs.empty());
  for (const auto& u : homs) {
    auto lifted = pullback_morphism(a, b, u);
    CHECK(lifted.is_natural());
    auto via_sharp = sharp(a, PsiMorphism{psi, g1, b.sheaf, compose(b.unit, u)});
    CHECK(lifted == via_sharp);
  }
  auto id = pullback_morphism(b, b, PresheafMorphism::identity(g2));
  CHECK(id == PresheafMorphism::identity(b.sheaf));
}

TEST_CASE("canonical comparison") {
  auto p = fixtures::pc4();
  auto s = fixtures::sierp();
  auto psi = ContinuousMap::from_labels(p, s, {{"a", "1"}, {"b", "1"}, {"x", "0"}, {"y", "0"}});
  auto g = fixtures::function_sheaf(s, {"0", "1"}, false);
  auto inv = pullback(psi, g);
  CHECK(canonical_comparison(inv, inv) == PresheafMorphism::identity(inv.sheaf));

  // Transport along an automorphism ζ gives back ζ.
  std::size_t isos = 0;
  for (const auto& a : enumerate_presheaf_morphisms(g, g)) {
    if (!a.is_isomorphism()) continue;
    ++isos;
    auto z = pullback_morphism(inv, inv, a);
    InverseImage moved{psi, g, inv.sheaf, compose(pushforward(psi, z), inv.unit), nullptr};
    CHECK(canonical_comparison(inv, moved) == z);
    CHECK(canonical_comparison(moved, inv) == z.inverse());
  }
  CHECK(isos > 1);

  // Not an inverse image: the unit factors but is not universal.
  auto bigger = fixtures::function_sheaf(p, {"0", "1"}, false);
  auto into = enumerate_presheaf_morphisms(g, pushforward(psi, bigger));
  REQUIRE_FALSE(into.empty());
  InverseImage wrong{psi, g, bigger, into.front(), nullptr};
  CHECK(kind_of([&] { canonical_comparison(inv, wrong); }) == ErrorKind::NotInverseImagePair);

  auto d = fixtures::disc2();
  auto bad = fixtures::disc2_g2_failure();
  InverseImage not_sheaf{ContinuousMap::identity(d), bad, bad, PresheafMorphism::identity(bad), nullptr};
  CHECK(kind_of([&] { canonical_comparison(sheafify(bad), not_sheaf); }) == ErrorKind::NotInverseImagePair);
}

TEST_CASE("composition of inverse images") {
  auto p = fixtures::pc4();
  auto s = fixtures::sierp();
  auto pt = fixtures::pt();
  auto psi = ContinuousMap::from_labels(p, s, {{"a", "1"}, {"b", "1"}, {"x", "0"}, {"y", "0"}});
  auto psi2 = ContinuousMap::from_labels(s, pt, {{"0", "p"}, {"1", "p"}});
  auto e = ValueObject::set({"u", "v"});
  auto h = fixtures::constant_presheaf(pt, e);
  auto c = composition_iso(psi, psi2, h);
  CHECK(c.iso.is_isomorphism());
  CHECK(compose(pushforward(c.direct.map, c.iso), c.direct.unit) == c.nested.unit);

  for (const auto& k : pullback_cases()) {
    const auto& y = k.map.source();
    for (const auto& m : fixtures::all_continuous_maps(fixtures::sierp(), y)) {
      auto ci = composition_iso(m, k.map, k.g);
      CHECK(ci.iso.is_isomorphism());
      CHECK(compose(pushforward(ci.direct.map, ci.iso), ci.direct.unit) == ci.nested.unit);
    }
  }
}

TEST_CASE("stalks of inverse images") {
  for (const auto& c : pullback_cases()) {
    const auto& psi = c.map;
    auto inv = pullback(psi, c.g);
    for (std::size_t x = 0; x < psi.source()->size(); ++x) {
      auto iso = pullback_stalk_iso(inv, x);
      CHECK(iso.is_bijective());
      CHECK(iso.source() == stalk(c.g, psi(x)).object);
      CHECK(iso.target() == stalk(inv.sheaf, x).object);
    }
  }

  // u♯ on stalks is ψ_x ∘ u_ψ(x) ∘ (ψ_x ∘ ρ_ψ(x))⁻¹.
  auto p = fixtures::pc4();
  auto s = fixtures::sierp();
  auto psi = ContinuousMap::from_labels(p, s, {{"a", "1"}, {"b", "1"}, {"x", "0"}, {"y", "0"}});
  auto g = fixtures::sierp_two_to_one();
  auto inv = pullback(psi, g);
  auto f = fixtures::function_sheaf(p, {"0", "1"}, false);
  for (const auto& body : enumerate_presheaf_morphisms(g, pushforward(psi, f))) {
    PsiMorphism u{psi, g, f, body};
    auto nu = sharp(inv, u);
    for (std::size_t x = 0; x < p->size(); ++x) {
      auto lhs = stalk_of_morphism(nu, x);
      auto rhs = compose(compose(stalk_comparison(psi, f, x), body.component(s->minimal_open(psi(x)))),
                         pullback_stalk_iso(inv, x).inverse());
      CHECK(lhs == rhs);
    }
  }

  // Supp(ψ*G) = ψ⁻¹(Supp G).
  auto z2 = ValueObject::cyclic(2);
  for (const auto& x : fixtures::all_topologies(2))
    for (const auto& y : fixtures::all_topologies(2))
      for (const auto& m : fixtures::all_continuous_maps(x, y))
        for (bool lc : {true, false}) {
          auto gy = fixtures::function_sheaf(y, z2, lc);
          CHECK(support(pullback(m, gy).sheaf) == m.preimage(support(gy)));
        }
  auto z1 = ValueObject::cyclic(1);
  RestrictionMap r;
  r.emplace(std::pair{s->all(), set(s, {"1"})}, ValueMorphism(z2, z1, {0, 0}));
  r.emplace(std::pair{set(s, {"1"}), PointSet{}}, ValueMorphism::identity(z1));
  Presheaf skyscraper(s, Category::FinAb, {z1, z2, z1}, r);
  CHECK(support(pullback(psi, skyscraper).sheaf) == set(p, {"x", "y"}));
}

TEST_CASE("inverse image along an open embedding is restriction") {
  auto p = fixtures::pc4();
  std::vector<Presheaf> sheaves{fixtures::function_sheaf(p, {"0", "1"}, true),
                                fixtures::function_sheaf(p, {"0", "1"}, false),
                                fixtures::function_sheaf(p, ValueObject::cyclic(2), true)};
  for (const auto& g : sheaves)
    for (auto u : p->opens()) {
      auto restricted = restrict_to_open(g, u);
      auto incl = ContinuousMap::inclusion(restricted.space(), p);
      REQUIRE(is_embedding(incl));
      auto push = pushforward(incl, restricted);
      auto unit = PresheafMorphism::from_function(g, push, [&](PointSet v) { return g.restriction(v, v & u); });
      InverseImage as_restriction{incl, g, restricted, unit, nullptr};
      auto zeta = canonical_comparison(pullback(incl, g), as_restriction);
      CHECK(zeta.is_isomorphism());
    }
}
