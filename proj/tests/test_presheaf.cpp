#include <algorithm>
#include <random>

#include "doctest.h"
#include "finsheaf/error.hpp"
#include "finsheaf/presheaf.hpp"
#include "presheaves.hpp"
#include "spaces.hpp"

using namespace finsheaf;
using fixtures::lmap;
using fixtures::set;

namespace {

bool is_identity(const PresheafMorphism& m) { return m == PresheafMorphism::identity(m.source()); }

// Natural transformations by brute force over every tuple of components.
std::size_t brute_force_morphism_count(const Presheaf& a, const Presheaf& b) {
  const std::size_t n = a.space()->open_count();
  std::vector<std::vector<ValueMorphism>> homs(n);
  for (std::size_t i = 0; i < n; ++i) homs[i] = enumerate_morphisms(a.sections_at(i), b.sections_at(i));
  std::vector<std::size_t> pick(n, 0);
  for (const auto& h : homs)
    if (h.empty()) return 0;
  std::size_t count = 0;
  while (true) {
    std::vector<ValueMorphism> comps;
    for (std::size_t i = 0; i < n; ++i) comps.push_back(homs[i][pick[i]]);
    if (PresheafMorphism(a, b, comps).is_natural()) ++count;
    std::size_t k = n;
    while (k > 0) {
      if (++pick[k - 1] < homs[k - 1].size()) break;
      pick[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return count;
}

std::vector<Presheaf> small_sheaves(const SpacePtr& space, int max_size) {
  std::vector<Presheaf> out;
  fixtures::for_each_small_presheaf(space, max_size, [&](const fixtures::RawPresheaf& raw) {
    if (fixtures::brute_force_is_sheaf(raw)) out.push_back(fixtures::to_presheaf(raw));
  });
  return out;
}

}  // namespace

TEST_CASE("validate_presheaf") {
  auto s = fixtures::sierp();
  auto e = ValueObject::set({"p", "q"});
  CHECK(validate_presheaf(fixtures::constant_presheaf(s, e)));

  // Corrupted identity at X: res({1}⊆X) ∘ res(X⊆X) ≠ res({1}⊆X).
  auto fe = ValueObject::terminal(Category::FinSet);
  RestrictionMap r;
  r.emplace(std::pair{s->all(), s->all()}, lmap(e, e, {{"p", "q"}, {"q", "p"}}));
  r.emplace(std::pair{s->all(), set(s, {"1"})}, ValueMorphism::identity(e));
  r.emplace(std::pair{set(s, {"1"}), PointSet{}}, lmap(e, fe, {{"p", "()"}, {"q", "()"}}));
  Presheaf bad(s, Category::FinSet, {fe, e, e}, r);
  CHECK_FALSE(validate_presheaf(bad));
  auto v = functoriality_violations(bad);
  REQUIRE_FALSE(v.empty());
  CHECK(v[0].kind == FunctorialityViolation::Kind::Identity);

  // PC4 with one broken composite res({a}⊆{a,b}) ∘ res({a,b}⊆X) ≠ res({a}⊆X).
  auto p = fixtures::pc4();
  auto good = fixtures::function_sheaf(p, {"0", "1"}, true);
  CHECK(validate_presheaf(good));
  RestrictionMap all;
  for (auto big : p->opens())
    for (auto small : p->opens())
      if (small.subset_of(big)) all.emplace(std::pair{big, small}, good.restriction(big, small));
  const auto a = set(p, {"a"});
  const auto& fx = good.sections(p->all());
  const auto& fa = good.sections(a);
  std::vector<std::size_t> swapped;
  for (std::size_t x = 0; x < fx.size(); ++x) swapped.push_back(1 - good.restriction(p->all(), a)(x));
  all.at({p->all(), a}) = ValueMorphism(fx, fa, swapped);
  std::vector<ValueObject> objs;
  for (auto o : p->opens()) objs.push_back(good.sections(o));
  Presheaf broken(p, Category::FinSet, objs, all);
  CHECK_FALSE(validate_presheaf(broken));
  auto vs = functoriality_violations(broken);
  REQUIRE_FALSE(vs.empty());
  bool reported = false;
  for (const auto& f : vs)
    reported = reported || (f.kind == FunctorialityViolation::Kind::Composite && f.smaller == a &&
                            f.middle == set(p, {"a", "b"}) && f.larger == p->all());
  CHECK(reported);

  // Mismatched objects are rejected on construction.
  RestrictionMap wrong;
  wrong.emplace(std::pair{s->all(), set(s, {"1"})}, ValueMorphism::identity(fe));
  CHECK_THROWS_AS(Presheaf(s, Category::FinSet, {fe, e, e}, wrong), Error);
}

TEST_CASE("check_sheaf on the fixture examples") {
  auto sierp = fixtures::sierp_two_to_one();
  CHECK(check_sheaf(sierp).verdict);

  auto disc = fixtures::disc2_g2_failure();
  auto report = check_sheaf(disc);
  CHECK_FALSE(report.verdict);
  REQUIRE(report.failures.size() == 1);
  const auto& f = report.failures[0];
  CHECK(f.kind == SheafFailureKind::G2);
  CHECK(f.open == disc.space()->all());
  CHECK(f.covering.parts == std::vector<PointSet>{set(disc.space(), {"1"}), set(disc.space(), {"2"})});
  CHECK(f.witness == std::vector<std::string>{"a", "b'"});

  for (const auto& space : {fixtures::sierp(), fixtures::disc2(), fixtures::empty_space()}) {
    auto two = ValueObject::set({"x", "y"});
    auto p = Presheaf::from_functions(
        space, Category::FinSet, [&](PointSet) { return two; },
        [](PointSet, PointSet, const ValueObject& from, const ValueObject&) { return ValueMorphism::identity(from); });
    auto r = check_sheaf(p);
    CHECK_FALSE(r.verdict);
    bool empty_failure = false;
    for (const auto& x : r.failures) empty_failure = empty_failure || x.kind == SheafFailureKind::EmptyNotTerminal;
    CHECK(empty_failure);
  }
  // Empty space with a terminal value is a sheaf.
  auto e = fixtures::empty_space();
  CHECK(is_sheaf(fixtures::constant_presheaf(e, ValueObject::set({"x"}))));
}

TEST_CASE("antichain verdict matches the all-coverings oracle on two points") {
  std::size_t checked = 0;
  for (const auto& space : fixtures::all_topologies(2))
    fixtures::for_each_small_presheaf(space, 2, [&](const fixtures::RawPresheaf& raw) {
      CHECK(check_sheaf(fixtures::to_presheaf(raw)).verdict == fixtures::brute_force_is_sheaf(raw));
      ++checked;
    });
  for (const auto& space : {fixtures::pt(), fixtures::empty_space()})
    fixtures::for_each_small_presheaf(space, 3, [&](const fixtures::RawPresheaf& raw) {
      CHECK(check_sheaf(fixtures::to_presheaf(raw)).verdict == fixtures::brute_force_is_sheaf(raw));
      ++checked;
    });
  CHECK(checked > 100);
}

TEST_CASE("sheaf verdict does not depend on covering order") {
  std::mt19937 rng(7);
  auto space = fixtures::all_topologies(3).back();
  std::size_t seen = 0;
  fixtures::for_each_small_presheaf(space, 2, [&](const fixtures::RawPresheaf& raw) {
    if (seen++ % 97 != 0) return;
    auto p = fixtures::to_presheaf(raw);
    std::vector<Covering> all;
    for (auto u : space->opens())
      for (auto& c : enumerate_antichain_coverings(*space, u)) all.push_back(c);
    std::shuffle(all.begin(), all.end(), rng);
    SheafReport shuffled;
    for (const auto& c : all) check_covering(p, c, shuffled);
    auto report = check_sheaf(p);
    CHECK(shuffled.verdict == report.verdict);
    CHECK(shuffled.failures.size() == report.failures.size());
  });
}

TEST_CASE("sheaves have terminal sections over the empty open") {
  for (const auto& space : fixtures::all_topologies(2))
    for (const auto& f : small_sheaves(space, 2)) CHECK(f.sections(PointSet{}).size() == 1);
}

TEST_CASE("check_sheaf_by_representables") {
  auto probe = std::vector<ValueObject>{ValueObject::terminal(Category::FinSet)};
  CHECK(check_sheaf_by_representables(fixtures::sierp_two_to_one(), probe));
  CHECK_FALSE(check_sheaf_by_representables(fixtures::disc2_g2_failure(), probe));

  auto z2 = ValueObject::cyclic(2);
  auto ab = fixtures::constant_presheaf(fixtures::sierp(), z2);
  auto z1 = std::vector<ValueObject>{ValueObject::cyclic(1)};
  CHECK(check_sheaf_by_representables(ab, z1));
  CHECK(check_sheaf_by_representables(ab, default_probes(ab)));
  CHECK(default_probes(ab).size() == 2);
  CHECK_THROWS_AS(check_sheaf_by_representables(ab, probe), Error);

  // The FinAb constant presheaf on DISC2 fails; cyclic probes see it.
  auto bad = fixtures::constant_presheaf(fixtures::disc2(), z2);
  CHECK_FALSE(is_sheaf(bad));
  CHECK_FALSE(check_sheaf_by_representables(bad, default_probes(bad)));

  for (const auto& space : fixtures::all_topologies(2))
    fixtures::for_each_small_presheaf(space, 2, [&](const fixtures::RawPresheaf& raw) {
      auto p = fixtures::to_presheaf(raw);
      CHECK(check_sheaf_by_representables(p, probe) == is_sheaf(p));
    });
}

TEST_CASE("restrict_to_open") {
  auto sierp = fixtures::sierp_two_to_one();
  CHECK(restrict_to_open(sierp, sierp.space()->all()) == sierp);
  auto r = restrict_to_open(sierp, set(sierp.space(), {"1"}));
  CHECK(r.space()->size() == 1);
  CHECK(r.sections(r.space()->all()) == ValueObject::set({"u"}));
  CHECK(is_sheaf(r));

  auto p = fixtures::pc4();
  auto f = fixtures::function_sheaf(p, {"0", "1"}, true);
  REQUIRE(is_sheaf(f));
  auto sub = restrict_to_open(f, set(p, {"a", "b", "x"}));
  CHECK(sub.space()->open_count() == 5);
  CHECK(check_sheaf(sub).verdict);
  CHECK_THROWS_AS(restrict_to_open(f, set(p, {"x"})), Error);

  for (const auto& space : fixtures::all_topologies(2))
    for (const auto& s : small_sheaves(space, 2))
      for (auto u : space->opens()) CHECK(is_sheaf(restrict_to_open(s, u)));
}

TEST_CASE("check_F0") {
  auto d = fixtures::disc2();
  Basis singles(d, {set(d, {"1"}), set(d, {"2"})});
  auto f1 = ValueObject::set({"s"});
  auto f2 = ValueObject::set({"t", "u"});
  BasisPresheaf bp(singles, Category::FinSet, {f1, f2}, {});
  CHECK(check_F0(bp).verdict);

  auto disc = fixtures::disc2_g2_failure();
  auto via_basis = check_F0(restrict_to_basis(disc, Basis::all_opens(d)));
  auto direct = check_sheaf(disc);
  CHECK(via_basis.verdict == direct.verdict);
  REQUIRE(via_basis.failures.size() == direct.failures.size());
  CHECK(via_basis.failures[0].witness == direct.failures[0].witness);

  auto sierp = fixtures::sierp_two_to_one();
  auto sb = recorded_basis(sierp.space());
  REQUIRE(sb.has_value());
  CHECK(check_F0(restrict_to_basis(sierp, *sb)).verdict);

  // On the all-opens basis (F0) and the sheaf axiom agree.
  for (const auto& space : fixtures::all_topologies(2))
    fixtures::for_each_small_presheaf(space, 2, [&](const fixtures::RawPresheaf& raw) {
      auto p = fixtures::to_presheaf(raw);
      CHECK(check_F0(restrict_to_basis(p, Basis::all_opens(space))).verdict == is_sheaf(p));
    });
}

TEST_CASE("extend_from_basis") {
  auto d = fixtures::disc2();
  Basis singles(d, {set(d, {"1"}), set(d, {"2"})});
  auto f1 = ValueObject::set({"s"});
  auto f2 = ValueObject::set({"t", "u"});
  BasisPresheaf bp(singles, Category::FinSet, {f1, f2}, {});
  auto ext = extend_from_basis(bp);
  CHECK(ext.sheaf.sections(d->all()).size() == 2);
  CHECK(ext.sheaf.sections(PointSet{}).size() == 1);
  CHECK(is_sheaf(ext.sheaf));
  for (auto m : singles.members()) CHECK(ext.can(m).is_bijective());

  auto s = fixtures::sierp();
  auto sierp = fixtures::sierp_two_to_one();
  auto sext = extend_from_basis(restrict_to_basis(sierp, *recorded_basis(s)));
  CHECK(sext.can(set(s, {"1"})).is_bijective());
  CHECK(sext.can(s->all()).is_bijective());
}

TEST_CASE("restrict then extend round-trips through θ and ψ") {
  std::vector<Presheaf> pool;
  for (const auto& space : fixtures::all_topologies(2))
    for (auto& f : small_sheaves(space, 2)) pool.push_back(f);
  pool.push_back(fixtures::function_sheaf(fixtures::pc4(), {"0", "1"}, true));
  pool.push_back(fixtures::function_sheaf(fixtures::pc4(), {"0", "1"}, false));
  pool.push_back(fixtures::sierp_two_to_one());
  for (const auto& f : pool) {
    std::vector<Basis> bases{Basis::all_opens(f.space())};
    if (auto rb = recorded_basis(f.space())) bases.push_back(*rb);
    for (const auto& b : bases) {
      auto ext = extend_from_basis(restrict_to_basis(f, b));
      CHECK(is_sheaf(ext.sheaf));
      auto pair = compare_with_extension(f, ext);
      CHECK(pair.forward.is_natural());
      CHECK(pair.backward.is_natural());
      CHECK(is_identity(compose(pair.backward, pair.forward)));
      CHECK(is_identity(compose(pair.forward, pair.backward)));
    }
    // Sub-basis comparison ζ/ξ between all opens and the recorded generators.
    if (auto rb = recorded_basis(f.space())) {
      auto coarse_bp = restrict_to_basis(f, Basis::all_opens(f.space()));
      auto coarse = extend_from_basis(coarse_bp);
      auto fine = extend_from_basis(restrict_to_subbasis(coarse_bp, *rb));
      auto pair = compare_basis_extensions(coarse, fine);
      CHECK(is_identity(compose(pair.backward, pair.forward)));
      CHECK(is_identity(compose(pair.forward, pair.backward)));
    }
  }
  auto bad = fixtures::disc2_g2_failure();
  Basis singles(bad.space(), {set(bad.space(), {"1"}), set(bad.space(), {"2"})});
  CHECK_THROWS_AS(compare_with_extension(bad, extend_from_basis(restrict_to_basis(bad, singles))), Error);
}

TEST_CASE("extend_morphism_from_basis") {
  auto d = fixtures::disc2();
  Basis singles(d, {set(d, {"1"}), set(d, {"2"})});
  auto f1 = ValueObject::set({"s"});
  auto f2 = ValueObject::set({"t", "u"});
  auto g1 = ValueObject::set({"s'"});
  auto g2 = ValueObject::set({"t'"});
  auto src = extend_from_basis(BasisPresheaf(singles, Category::FinSet, {f1, f2}, {}));
  auto tgt = extend_from_basis(BasisPresheaf(singles, Category::FinSet, {g1, g2}, {}));

  std::vector<ValueMorphism> id{ValueMorphism::identity(f1), ValueMorphism::identity(f2)};
  CHECK(is_identity(extend_morphism_from_basis(src, src, id)));

  std::vector<ValueMorphism> u{lmap(f1, g1, {{"s", "s'"}}), lmap(f2, g2, {{"t", "t'"}, {"u", "t'"}})};
  auto ext = extend_morphism_from_basis(src, tgt, u);
  CHECK(ext.is_natural());
  // Product map on F′(X): both global sections go to the single target section.
  CHECK(ext.component(d->all()).table() == std::vector<std::size_t>{0, 0});
  for (std::size_t i = 0; i < singles.members().size(); ++i) {
    auto m = singles.members()[i];
    CHECK(compose(tgt.can(m), ext.component(m)) == compose(u[i], src.can(m)));
  }

  // Composite families extend to the composite.
  auto h1 = ValueObject::set({"p", "q"});
  auto h2 = ValueObject::set({"r"});
  auto third = extend_from_basis(BasisPresheaf(singles, Category::FinSet, {h1, h2}, {}));
  std::vector<ValueMorphism> w{lmap(g1, h1, {{"s'", "q"}}), lmap(g2, h2, {{"t'", "r"}})};
  std::vector<ValueMorphism> wu{compose(w[0], u[0]), compose(w[1], u[1])};
  CHECK(extend_morphism_from_basis(src, third, wu) ==
        compose(extend_morphism_from_basis(tgt, third, w), ext));

  // A family that ignores restrictions is rejected.
  auto s = fixtures::sierp();
  auto two = ValueObject::set({"0", "1"});
  auto sbasis = *recorded_basis(s);
  auto cst = extend_from_basis(restrict_to_basis(fixtures::constant_presheaf(s, two), sbasis));
  std::vector<ValueMorphism> twist{ValueMorphism::identity(two), lmap(two, two, {{"0", "1"}, {"1", "0"}})};
  CHECK_THROWS_AS(extend_morphism_from_basis(cst, cst, twist), Error);
}

TEST_CASE("sheaf morphisms are determined by a basis") {
  auto d = fixtures::disc2();
  Basis singles(d, {set(d, {"1"}), set(d, {"2"})});
  auto sheaves = small_sheaves(d, 2);
  std::size_t pairs = 0;
  for (const auto& a : sheaves)
    for (const auto& b : sheaves) {
      auto homs = enumerate_presheaf_morphisms(a, b);
      for (const auto& u : homs)
        for (const auto& v : homs) {
          auto agree = morphism_determined_by_basis(u, v, singles);
          CHECK(agree.on_basis == agree.everywhere);
          ++pairs;
        }
    }
  CHECK(pairs > 0);
  auto f = fixtures::function_sheaf(d, {"0", "1"}, false);
  auto id = PresheafMorphism::identity(f);
  auto agree = morphism_determined_by_basis(id, id, singles);
  CHECK(agree.on_basis);
  CHECK(agree.everywhere);
}

TEST_CASE("enumerate_presheaf_morphisms matches brute force") {
  auto s = fixtures::sierp();
  std::vector<Presheaf> pool;
  fixtures::for_each_small_presheaf(s, 2, [&](const fixtures::RawPresheaf& raw) {
    pool.push_back(fixtures::to_presheaf(raw));
  });
  REQUIRE(pool.size() > 10);
  for (std::size_t i = 0; i < pool.size(); i += 3)
    for (std::size_t j = 0; j < pool.size(); j += 5) {
      auto homs = enumerate_presheaf_morphisms(pool[i], pool[j]);
      CHECK(homs.size() == brute_force_morphism_count(pool[i], pool[j]));
      for (const auto& h : homs) CHECK(h.is_natural());
    }
  auto z2 = ValueObject::cyclic(2);
  auto z4 = ValueObject::cyclic(4);
  auto a = fixtures::constant_presheaf(s, z4);
  auto b = fixtures::constant_presheaf(s, z2);
  CHECK(enumerate_presheaf_morphisms(a, b).size() == brute_force_morphism_count(a, b));
  CHECK(enumerate_presheaf_morphisms(a, b).size() == 2);
  CHECK_THROWS_AS(enumerate_presheaf_morphisms(a, b, 1), Error);
}

TEST_CASE("limit_of_sheaves") {
  auto s = fixtures::sierp();
  auto f1 = fixtures::sierp_two_to_one();
  auto f2 = fixtures::function_sheaf(s, {"0", "1"}, false);

  SheafDiagram single{{"A"}, {{true}}, {f1}, {}};
  auto l1 = limit_of_sheaves(single);
  CHECK(l1.projections[0].is_isomorphism());

  SheafDiagram pair{{"A", "B"}, {{true, false}, {false, true}}, {f1, f2}, {}};
  auto l2 = limit_of_sheaves(pair);
  CHECK(l2.sheaf.sections(s->all()).size() == f1.sections(s->all()).size() * f2.sections(s->all()).size());
  CHECK(is_sheaf(l2.sheaf));
  for (const auto& p : l2.projections) CHECK(p.is_natural());

  // Cospan A ≤ C ≥ B: arrows F_C → F_A and F_C → F_B.
  SheafDiagram cospan{{"A", "B", "C"}, {{true, false, true}, {false, true, true}, {false, false, true}}, {f1, f1, f2}, {}};
  auto leg = enumerate_presheaf_morphisms(f2, f1);
  cospan.arrows.emplace(std::pair{std::size_t{0}, std::size_t{2}}, leg[0]);
  cospan.arrows.emplace(std::pair{std::size_t{1}, std::size_t{2}}, leg[1]);
  auto l3 = limit_of_sheaves(cospan);
  CHECK(is_sheaf(l3.sheaf));

  // Every cone from a small sheaf factors exactly once.
  for (const auto& apex : small_sheaves(s, 2)) {
    std::vector<std::vector<PresheafMorphism>> legs;
    for (const auto& node : pair.sheaves) legs.push_back(enumerate_presheaf_morphisms(apex, node));
    for (const auto& a : legs[0])
      for (const auto& b : legs[1]) {
        std::vector<PresheafMorphism> cone{a, b};
        std::size_t factoring = 0;
        for (const auto& m : enumerate_presheaf_morphisms(apex, l2.sheaf))
          if (compose(l2.projections[0], m) == a && compose(l2.projections[1], m) == b) ++factoring;
        CHECK(factoring == 1);
        auto med = mediating_sheaf_morphism(l2, apex, cone);
        CHECK(compose(l2.projections[0], med) == a);
        CHECK(compose(l2.projections[1], med) == b);
      }
  }

  SheafDiagram not_sheaf{{"A"}, {{true}}, {fixtures::disc2_g2_failure()}, {}};
  CHECK_THROWS_AS(limit_of_sheaves(not_sheaf), Error);
}

TEST_CASE("is_constant_presheaf") {
  auto two = ValueObject::set({"0", "1"});
  CHECK(is_constant_presheaf(fixtures::constant_presheaf(fixtures::sierp(), two)));
  auto sheafified = fixtures::function_sheaf(fixtures::disc2(), {"0", "1"}, true);
  CHECK(sheafified.sections(fixtures::disc2()->all()).size() == 4);
  CHECK_FALSE(is_constant_presheaf(sheafified));
  CHECK(is_constant_presheaf(fixtures::constant_presheaf(fixtures::empty_space(), two)));
}
