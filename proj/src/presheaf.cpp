#include "finsheaf/presheaf.hpp"

#include <algorithm>
#include <numeric>

#include "finsheaf/error.hpp"
#include "finsheaf/labels.hpp"

namespace finsheaf {

namespace detail {

std::size_t SectionTable::slot(PointSet s) const {
  auto it = index.find(s.bits());
  if (it == index.end()) throw Error(ErrorKind::NotAnOpen, "no sections recorded over this set");
  return it->second;
}

const ValueMorphism& SectionTable::restriction(std::size_t v, std::size_t u) const {
  const auto& r = res.at(v * size() + u);
  if (!r) throw Error(ErrorKind::NotAnOpen, "restriction requested between non-nested opens");
  return *r;
}

std::shared_ptr<const SectionTable> make_table(Category category, std::vector<PointSet> members,
                                               std::vector<ValueObject> sections, const RestrictionMap& given) {
  auto t = std::make_shared<SectionTable>();
  const std::size_t n = members.size();
  if (sections.size() != n) throw Error(ErrorKind::ValueMismatch, "one value is needed per open");
  for (const auto& s : sections)
    if (s.category() != category) throw Error(ErrorKind::MixedCategories, "section object in the wrong category");
  t->category = category;
  t->members = std::move(members);
  t->sections = std::move(sections);
  for (std::size_t i = 0; i < n; ++i) t->index.emplace(t->members[i].bits(), i);
  t->res.assign(n * n, std::nullopt);

  for (const auto& [key, map] : given) {
    const std::size_t v = t->slot(key.first);
    const std::size_t u = t->slot(key.second);
    if (!key.second.subset_of(key.first))
      throw Error(ErrorKind::ValueMismatch, "restriction between non-nested opens");
    if (!(map.source() == t->sections[v]) || !(map.target() == t->sections[u]))
      throw Error(ErrorKind::ValueMismatch, "restriction does not match the section objects");
    t->res[v * n + u] = map;
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u)
      if (t->members[u].subset_of(t->members[v])) pairs.emplace_back(v, u);
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return t->members[a.first].size() - t->members[a.second].size() <
           t->members[b.first].size() - t->members[b.second].size();
  });
  for (auto [v, u] : pairs) {
    auto& slot = t->res[v * n + u];
    if (slot) continue;
    if (v == u) {
      slot = ValueMorphism::identity(t->sections[v]);
      continue;
    }
    for (std::size_t w = 0; w < n; ++w) {
      if (w == u || w == v) continue;
      if (t->members[u].subset_of(t->members[w]) && t->members[w].subset_of(t->members[v])) {
        slot = compose(*t->res[w * n + u], *t->res[v * n + w]);
        break;
      }
    }
    if (!slot) throw Error(ErrorKind::ValueMismatch, "missing restriction between adjacent opens");
  }
  return t;
}

}  // namespace detail

namespace {

bool tables_equal(const detail::SectionTable& a, const detail::SectionTable& b) {
  return a.category == b.category && a.members == b.members && a.sections == b.sections && a.res == b.res;
}

// Restriction tuples and compatibility tests for one covering.
using OverlapSlots = std::function<std::vector<std::size_t>(PointSet)>;

void check_cover_in_table(const detail::SectionTable& t, const Covering& cov, const OverlapSlots& overlaps,
                          SheafReport& report) {
  const std::size_t u = t.slot(cov.target);
  const auto& fu = t.sections[u];
  const std::size_t k = cov.parts.size();
  std::vector<std::size_t> part_slot(k);
  std::vector<const ValueMorphism*> to_part(k);
  for (std::size_t i = 0; i < k; ++i) {
    part_slot[i] = t.slot(cov.parts[i]);
    to_part[i] = &t.restriction(u, part_slot[i]);
  }
  const bool empty_cover = k == 0;
  auto fail = [&](SheafFailureKind kind, std::vector<std::string> witness) {
    report.verdict = false;
    report.failures.push_back({cov.target, cov, empty_cover ? SheafFailureKind::EmptyNotTerminal : kind,
                               std::move(witness)});
  };

  std::map<std::vector<std::size_t>, std::size_t> image;
  bool g1_done = false;
  for (std::size_t s = 0; s < fu.size(); ++s) {
    std::vector<std::size_t> tuple(k);
    for (std::size_t i = 0; i < k; ++i) tuple[i] = (*to_part[i])(s);
    auto [it, inserted] = image.emplace(std::move(tuple), s);
    if (!inserted && !g1_done) {
      fail(SheafFailureKind::G1, {fu.element(it->second), fu.element(s)});
      g1_done = true;
    }
  }

  if (empty_cover) {
    if (fu.size() == 0) fail(SheafFailureKind::G2, {});
    return;
  }

  // Pairwise compatibility: both parts restrict to the same section on every test member.
  struct Test {
    const ValueMorphism* a;
    const ValueMorphism* b;
  };
  std::vector<std::vector<std::vector<Test>>> tests(k, std::vector<std::vector<Test>>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j)
      for (auto w : overlaps(cov.parts[i] & cov.parts[j]))
        tests[i][j].push_back({&t.restriction(part_slot[i], w), &t.restriction(part_slot[j], w)});

  std::vector<std::size_t> family(k);
  bool found = false;
  std::function<void(std::size_t)> dfs = [&](std::size_t i) {
    if (found) return;
    if (i == k) {
      if (!image.contains(family)) {
        std::vector<std::string> witness;
        for (std::size_t p = 0; p < k; ++p) witness.push_back(t.sections[part_slot[p]].element(family[p]));
        fail(SheafFailureKind::G2, std::move(witness));
        found = true;
      }
      return;
    }
    const auto& fi = t.sections[part_slot[i]];
    for (std::size_t x = 0; x < fi.size() && !found; ++x) {
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j)
        for (const auto& test : tests[i][j])
          if ((*test.a)(x) != (*test.b)(family[j])) {
            ok = false;
            break;
          }
      if (!ok) continue;
      family[i] = x;
      dfs(i + 1);
    }
  };
  dfs(0);
}

std::optional<std::size_t> glue_in_table(const detail::SectionTable& t, PointSet u, std::span<const PointSet> parts,
                                         std::span<const std::size_t> family) {
  if (parts.size() != family.size()) throw Error(ErrorKind::IncompatibleFamily, "one section is needed per part");
  const std::size_t us = t.slot(u);
  std::vector<const ValueMorphism*> maps;
  for (auto p : parts) maps.push_back(&t.restriction(us, t.slot(p)));
  std::optional<std::size_t> found;
  for (std::size_t s = 0; s < t.sections[us].size(); ++s) {
    bool match = true;
    for (std::size_t i = 0; i < parts.size() && match; ++i) match = (*maps[i])(s) == family[i];
    if (!match) continue;
    if (found) return std::nullopt;
    found = s;
  }
  return found;
}

bool table_functorial(const detail::SectionTable& t) {
  const std::size_t n = t.size();
  for (std::size_t u = 0; u < n; ++u)
    if (!(t.restriction(u, u) == ValueMorphism::identity(t.sections[u]))) return false;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t w = 0; w < n; ++w) {
      if (!t.members[u].subset_of(t.members[w])) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (!t.members[w].subset_of(t.members[v])) continue;
        const auto& outer = t.restriction(v, u);
        const auto& first = t.restriction(v, w);
        const auto& second = t.restriction(w, u);
        for (std::size_t s = 0; s < t.sections[v].size(); ++s)
          if (second(first(s)) != outer(s)) return false;
      }
    }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Presheaf

Presheaf::Presheaf(SpacePtr space, Category category, std::vector<ValueObject> sections, const RestrictionMap& given)
    : space_(std::move(space)),
      table_(detail::make_table(category, space_->opens(), std::move(sections), given)) {}

Presheaf Presheaf::from_functions(
    SpacePtr space, Category category, const std::function<ValueObject(PointSet)>& sections,
    const std::function<ValueMorphism(PointSet, PointSet, const ValueObject&, const ValueObject&)>& restriction) {
  const auto& opens = space->opens();
  std::vector<ValueObject> objs;
  objs.reserve(opens.size());
  for (auto u : opens) objs.push_back(sections(u));
  RestrictionMap given;
  for (std::size_t v = 0; v < opens.size(); ++v)
    for (std::size_t u = 0; u < opens.size(); ++u) {
      if (u == v || !opens[u].subset_of(opens[v])) continue;
      bool adjacent = true;
      for (std::size_t w = 0; w < opens.size() && adjacent; ++w)
        if (w != u && w != v && opens[u].subset_of(opens[w]) && opens[w].subset_of(opens[v])) adjacent = false;
      if (adjacent) given.emplace(std::pair{opens[v], opens[u]}, restriction(opens[v], opens[u], objs[v], objs[u]));
    }
  return Presheaf(std::move(space), category, std::move(objs), given);
}

const ValueMorphism& Presheaf::restriction(PointSet larger, PointSet smaller) const {
  return table_->restriction(table_->slot(larger), table_->slot(smaller));
}

bool operator==(const Presheaf& a, const Presheaf& b) {
  if (!same_space(a.space_, b.space_)) return false;
  return a.table_ == b.table_ || tables_equal(*a.table_, *b.table_);
}

std::vector<FunctorialityViolation> functoriality_violations(const Presheaf& p) {
  std::vector<FunctorialityViolation> out;
  const auto& t = p.table();
  const std::size_t n = t.size();
  for (std::size_t u = 0; u < n; ++u)
    if (!(t.restriction(u, u) == ValueMorphism::identity(t.sections[u])))
      out.push_back({FunctorialityViolation::Kind::Identity, t.members[u], t.members[u], t.members[u]});
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t w = 0; w < n; ++w) {
      if (w == u || !t.members[u].subset_of(t.members[w])) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == w || !t.members[w].subset_of(t.members[v])) continue;
        if (!(compose(t.restriction(w, u), t.restriction(v, w)) == t.restriction(v, u)))
          out.push_back({FunctorialityViolation::Kind::Composite, t.members[u], t.members[w], t.members[v]});
      }
    }
  return out;
}

bool validate_presheaf(const Presheaf& p) { return table_functorial(p.table()); }

// ---------------------------------------------------------------------------
// Morphisms

PresheafMorphism::PresheafMorphism(Presheaf source, Presheaf target, std::vector<ValueMorphism> components)
    : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
  if (!same_space(source_.space(), target_.space()))
    throw Error(ErrorKind::ValueMismatch, "presheaf morphism between different spaces");
  if (source_.category() != target_.category())
    throw Error(ErrorKind::MixedCategories, "presheaf morphism between different categories");
  if (components_.size() != source_.space()->open_count())
    throw Error(ErrorKind::ValueMismatch, "one component is needed per open");
  for (std::size_t i = 0; i < components_.size(); ++i)
    if (!(components_[i].source() == source_.sections_at(i)) || !(components_[i].target() == target_.sections_at(i)))
      throw Error(ErrorKind::ValueMismatch,
                  "component at " + source_.space()->key_of(source_.space()->opens()[i]) + " has the wrong objects");
}

PresheafMorphism PresheafMorphism::from_function(Presheaf source, Presheaf target,
                                                 const std::function<ValueMorphism(PointSet)>& component) {
  std::vector<ValueMorphism> comps;
  for (auto u : source.space()->opens()) comps.push_back(component(u));
  return PresheafMorphism(std::move(source), std::move(target), std::move(comps));
}

PresheafMorphism PresheafMorphism::identity(const Presheaf& p) {
  std::vector<ValueMorphism> comps;
  for (std::size_t i = 0; i < p.space()->open_count(); ++i) comps.push_back(ValueMorphism::identity(p.sections_at(i)));
  return PresheafMorphism(p, p, std::move(comps));
}

const ValueMorphism& PresheafMorphism::component(PointSet u) const {
  return components_.at(source_.space()->open_index(u));
}

namespace {

std::optional<std::pair<std::size_t, std::size_t>> first_unnatural(const PresheafMorphism& m) {
  const auto& s = m.source().table();
  const auto& t = m.target().table();
  const std::size_t n = s.size();
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v || !s.members[u].subset_of(s.members[v])) continue;
      const auto& rs = s.restriction(v, u);
      const auto& rt = t.restriction(v, u);
      const auto& cv = m.component_at(v);
      const auto& cu = m.component_at(u);
      for (std::size_t x = 0; x < s.sections[v].size(); ++x)
        if (cu(rs(x)) != rt(cv(x))) return std::pair{v, u};
    }
  return std::nullopt;
}

}  // namespace

bool PresheafMorphism::is_natural() const { return !first_unnatural(*this); }

void PresheafMorphism::require_natural() const {
  if (auto bad = first_unnatural(*this)) {
    const auto& sp = *source_.space();
    throw Error(ErrorKind::IncompatibleFamily, "naturality fails for " + sp.key_of(sp.opens()[bad->second]) +
                                                   " in " + sp.key_of(sp.opens()[bad->first]));
  }
}

bool PresheafMorphism::is_isomorphism() const {
  return std::all_of(components_.begin(), components_.end(), [](const auto& c) { return c.is_bijective(); });
}

PresheafMorphism PresheafMorphism::inverse() const {
  std::vector<ValueMorphism> inv;
  for (const auto& c : components_) inv.push_back(c.inverse());
  return PresheafMorphism(target_, source_, std::move(inv));
}

PresheafMorphism compose(const PresheafMorphism& after, const PresheafMorphism& before) {
  if (!(after.source() == before.target()))
    throw Error(ErrorKind::ValueMismatch, "presheaf morphisms do not compose");
  std::vector<ValueMorphism> comps;
  for (std::size_t i = 0; i < before.components().size(); ++i)
    comps.push_back(compose(after.component_at(i), before.component_at(i)));
  return PresheafMorphism(before.source(), after.target(), std::move(comps));
}

std::vector<PresheafMorphism> enumerate_presheaf_morphisms(const Presheaf& source, const Presheaf& target,
                                                           std::size_t cap) {
  if (!same_space(source.space(), target.space()))
    throw Error(ErrorKind::ValueMismatch, "presheaves live on different spaces");
  if (source.category() != target.category())
    throw Error(ErrorKind::MixedCategories, "presheaves have different categories");
  const auto& s = source.table();
  const auto& t = target.table();
  const std::size_t n = s.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.members[a].size() > s.members[b].size(); });

  const bool groups = source.category() == Category::FinAb;
  std::vector<std::vector<ValueMorphism>> hom_cache(n);
  if (groups)
    for (std::size_t i = 0; i < n; ++i) hom_cache[i] = enumerate_morphisms(s.sections[i], t.sections[i], cap);

  std::size_t examined = 0;
  auto bump = [&] {
    if (++examined > cap) throw Error(ErrorKind::CapExceeded, "presheaf morphism enumeration exceeded the cap");
  };

  std::vector<std::optional<ValueMorphism>> chosen(n);
  std::vector<PresheafMorphism> out;
  std::function<void(std::size_t)> dfs = [&](std::size_t pos) {
    if (pos == n) {
      std::vector<ValueMorphism> comps;
      for (auto& c : chosen) comps.push_back(*c);
      out.emplace_back(source, target, std::move(comps));
      return;
    }
    const std::size_t u = order[pos];
    const auto& fu = s.sections[u];
    const auto& gu = t.sections[u];
    // Entries forced by naturality with every already chosen strict superset.
    std::vector<std::optional<std::size_t>> forced(fu.size());
    bool consistent = true;
    for (std::size_t q = 0; q < pos && consistent; ++q) {
      const std::size_t v = order[q];
      if (!s.members[u].subset_of(s.members[v]) || u == v) continue;
      const auto& rs = s.restriction(v, u);
      const auto& rt = t.restriction(v, u);
      for (std::size_t x = 0; x < s.sections[v].size(); ++x) {
        const std::size_t want = rt((*chosen[v])(x));
        auto& f = forced[rs(x)];
        if (f && *f != want) {
          consistent = false;
          break;
        }
        f = want;
      }
    }
    if (!consistent) return;
    auto fits = [&](const std::vector<std::size_t>& table) {
      for (std::size_t x = 0; x < fu.size(); ++x)
        if (forced[x] && *forced[x] != table[x]) return false;
      return true;
    };
    if (groups) {
      for (const auto& h : hom_cache[u]) {
        bump();
        if (!fits(h.table())) continue;
        chosen[u] = h;
        dfs(pos + 1);
      }
    } else {
      std::vector<std::size_t> free;
      std::vector<std::size_t> table(fu.size(), 0);
      for (std::size_t x = 0; x < fu.size(); ++x) {
        if (forced[x]) table[x] = *forced[x];
        else free.push_back(x);
      }
      if (!free.empty() && gu.size() == 0) return;
      while (true) {
        bump();
        chosen[u] = ValueMorphism(fu, gu, table);
        dfs(pos + 1);
        std::size_t k = free.size();
        while (k > 0) {
          auto& e = table[free[k - 1]];
          if (++e < gu.size()) break;
          e = 0;
          --k;
        }
        if (k == 0) break;
      }
    }
    chosen[u].reset();
  };
  dfs(0);
  return out;
}

// ---------------------------------------------------------------------------
// Sheaf checks

std::string_view to_string(SheafFailureKind kind) noexcept {
  switch (kind) {
    case SheafFailureKind::G1: return "G1";
    case SheafFailureKind::G2: return "G2";
    case SheafFailureKind::EmptyNotTerminal: return "EmptyNotTerminal";
  }
  return "?";
}

void check_covering(const Presheaf& p, const Covering& covering, SheafReport& report) {
  const auto& t = p.table();
  check_cover_in_table(t, covering, [&](PointSet o) { return std::vector<std::size_t>{t.slot(o)}; },
                       report);
}

SheafReport check_sheaf(const Presheaf& p, const SheafCheckOptions& options) {
  SheafReport report;
  std::size_t budget = options.max_coverings;
  for (auto u : p.space()->opens()) {
    auto coverings = enumerate_antichain_coverings(*p.space(), u, budget);
    if (budget != kUnlimited) budget -= std::min(budget, coverings.size());
    for (const auto& c : coverings) check_covering(p, c, report);
  }
  return report;
}

bool is_sheaf(const Presheaf& p) { return check_sheaf(p).verdict; }

std::optional<std::size_t> glue_sections(const Presheaf& p, PointSet u, std::span<const PointSet> parts,
                                         std::span<const std::size_t> family) {
  return glue_in_table(p.table(), u, parts, family);
}

Presheaf hom_presheaf(const ValueObject& probe, const Presheaf& p) {
  if (probe.category() != p.category()) throw Error(ErrorKind::MixedCategories, "probe in the wrong category");
  const auto& opens = p.space()->opens();
  std::vector<std::vector<ValueMorphism>> homs(opens.size());
  auto label_of = [](const ValueMorphism& h) {
    std::vector<std::string> parts;
    for (auto y : h.table()) parts.push_back(h.target().element(y));
    return tuple_label(parts);
  };
  return Presheaf::from_functions(
      p.space(), Category::FinSet,
      [&](PointSet u) {
        const std::size_t i = p.space()->open_index(u);
        homs[i] = enumerate_morphisms(probe, p.sections_at(i));
        std::vector<std::string> labels;
        for (const auto& h : homs[i]) labels.push_back(label_of(h));
        return ValueObject::set(labels);
      },
      [&](PointSet v, PointSet u, const ValueObject& from, const ValueObject& to) {
        const std::size_t vi = p.space()->open_index(v);
        const auto& r = p.restriction(v, u);
        std::vector<std::size_t> map(from.size());
        for (const auto& h : homs[vi]) map[from.index_of(label_of(h))] = to.index_of(label_of(compose(r, h)));
        return ValueMorphism(from, to, std::move(map));
      });
}

std::vector<ValueObject> default_probes(const Presheaf& p) {
  if (p.category() == Category::FinSet) return {ValueObject::terminal(Category::FinSet)};
  std::size_t e = 1;
  for (const auto& s : p.table().sections) e = std::lcm(e, s.exponent());
  std::vector<ValueObject> out;
  for (std::size_t n = 1; n <= e; ++n) out.push_back(ValueObject::cyclic(n));
  return out;
}

bool check_sheaf_by_representables(const Presheaf& p, std::span<const ValueObject> probes) {
  for (const auto& probe : probes)
    if (probe.category() != p.category()) throw Error(ErrorKind::MixedCategories, "probe in the wrong category");
  return std::all_of(probes.begin(), probes.end(), [&](const auto& probe) { return is_sheaf(hom_presheaf(probe, p)); });
}

Presheaf restrict_to_open(const Presheaf& p, PointSet u) {
  const auto& space = *p.space();
  space.open_index(u);
  auto sub = space.subspace(u);
  const auto& sub_opens = sub->opens();
  std::vector<PointSet> ambient;
  std::vector<ValueObject> objs;
  for (auto w : sub_opens) {
    ambient.push_back(transfer(w, *sub, space));
    objs.push_back(p.sections(ambient.back()));
  }
  RestrictionMap given;
  for (std::size_t v = 0; v < sub_opens.size(); ++v)
    for (std::size_t w = 0; w < sub_opens.size(); ++w)
      if (sub_opens[w].subset_of(sub_opens[v]))
        given.emplace(std::pair{sub_opens[v], sub_opens[w]}, p.restriction(ambient[v], ambient[w]));
  return Presheaf(sub, p.category(), std::move(objs), given);
}

PresheafMorphism restrict_to_open(const PresheafMorphism& m, PointSet u) {
  auto src = restrict_to_open(m.source(), u);
  auto tgt = restrict_to_open(m.target(), u);
  const auto& space = *m.source().space();
  return PresheafMorphism::from_function(src, tgt, [&](PointSet w) {
    return m.component(transfer(w, *src.space(), space));
  });
}

// ---------------------------------------------------------------------------
// Basis presheaves

BasisPresheaf::BasisPresheaf(Basis basis, Category category, std::vector<ValueObject> sections,
                             const RestrictionMap& given)
    : basis_(std::move(basis)), table_(detail::make_table(category, basis_.members(), std::move(sections), given)) {}

const ValueMorphism& BasisPresheaf::restriction(PointSet larger, PointSet smaller) const {
  return table_->restriction(table_->slot(larger), table_->slot(smaller));
}

bool BasisPresheaf::is_functorial() const { return table_functorial(*table_); }

BasisPresheaf restrict_to_basis(const Presheaf& p, const Basis& basis) {
  if (!same_space(p.space(), basis.space())) throw Error(ErrorKind::ValueMismatch, "basis of a different space");
  const auto& ms = basis.members();
  std::vector<ValueObject> objs;
  for (auto m : ms) objs.push_back(p.sections(m));
  RestrictionMap given;
  for (auto v : ms)
    for (auto u : ms)
      if (u.subset_of(v)) given.emplace(std::pair{v, u}, p.restriction(v, u));
  return BasisPresheaf(basis, p.category(), std::move(objs), given);
}

BasisPresheaf restrict_to_subbasis(const BasisPresheaf& bp, const Basis& sub) {
  if (!same_space(bp.space(), sub.space())) throw Error(ErrorKind::ValueMismatch, "basis of a different space");
  const auto& ms = sub.members();
  std::vector<ValueObject> objs;
  for (auto m : ms) {
    if (!bp.basis().contains(m)) throw Error(ErrorKind::NotAnOpen, "sub-basis member outside the basis");
    objs.push_back(bp.sections(m));
  }
  RestrictionMap given;
  for (auto v : ms)
    for (auto u : ms)
      if (u.subset_of(v)) given.emplace(std::pair{v, u}, bp.restriction(v, u));
  return BasisPresheaf(sub, bp.category(), std::move(objs), given);
}

SheafReport check_F0(const BasisPresheaf& bp) {
  SheafReport report;
  const auto& t = bp.table();
  const auto& members = bp.basis().members();
  auto overlaps = [&](PointSet o) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members.size(); ++i)
      if (members[i].subset_of(o)) out.push_back(i);
    return out;
  };
  for (auto v : members)
    for (const auto& c : antichain_coverings_from(*bp.space(), v, members))
      check_cover_in_table(t, c, overlaps, report);
  return report;
}

std::optional<std::size_t> glue_basis_sections(const BasisPresheaf& bp, PointSet v, std::span<const PointSet> parts,
                                               std::span<const std::size_t> family) {
  return glue_in_table(bp.table(), v, parts, family);
}

ValueMorphism BasisExtension::can(PointSet u, PointSet v) const {
  const std::size_t i = sheaf.space()->open_index(u);
  const auto& within = members_within[i];
  auto it = std::find(within.begin(), within.end(), v);
  if (it == within.end()) throw Error(ErrorKind::NotAnOpen, "not a basis member inside the open");
  return limits[i].projections[static_cast<std::size_t>(it - within.begin())];
}

BasisExtension extend_from_basis(const BasisPresheaf& bp) {
  const auto& space = bp.space();
  const auto& opens = space->opens();
  std::vector<std::vector<PointSet>> within;
  std::vector<LimitResult> limits;
  for (auto u : opens) {
    auto ms = bp.basis().members_within(u);
    Diagram d;
    d.category = bp.category();
    d.orientation = Diagram::Orientation::Contravariant;
    const std::size_t n = ms.size();
    d.leq.assign(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a) {
      d.names.push_back(space->key_of(ms[a]));
      d.objects.push_back(bp.sections(ms[a]));
      for (std::size_t b = 0; b < n; ++b) {
        d.leq[a][b] = ms[a].subset_of(ms[b]);
        if (a != b && d.leq[a][b]) d.arrows.emplace(std::pair{a, b}, bp.restriction(ms[b], ms[a]));
      }
    }
    limits.push_back(limit(d));
    within.push_back(std::move(ms));
  }

  std::vector<ValueObject> objs;
  for (const auto& l : limits) objs.push_back(l.object);
  RestrictionMap given;
  for (std::size_t v = 0; v < opens.size(); ++v)
    for (std::size_t u = 0; u < opens.size(); ++u) {
      if (u == v || !opens[u].subset_of(opens[v])) continue;
      std::vector<ValueMorphism> cone;
      for (auto w : within[u]) {
        auto pos = static_cast<std::size_t>(std::find(within[v].begin(), within[v].end(), w) - within[v].begin());
        cone.push_back(limits[v].projections[pos]);
      }
      given.emplace(std::pair{opens[v], opens[u]}, mediating_morphism(objs[v], cone, limits[u]));
    }
  Presheaf sheaf(space, bp.category(), std::move(objs), given);
  return BasisExtension{bp, std::move(sheaf), std::move(within), std::move(limits)};
}

PresheafMorphism extend_morphism_from_basis(const BasisExtension& source, const BasisExtension& target,
                                            std::span<const ValueMorphism> family) {
  const auto& members = source.source.basis().members();
  if (members != target.source.basis().members() || !same_space(source.sheaf.space(), target.sheaf.space()))
    throw Error(ErrorKind::IncompatibleFamily, "extensions over different bases");
  if (family.size() != members.size()) throw Error(ErrorKind::IncompatibleFamily, "one map is needed per basis member");
  for (std::size_t i = 0; i < members.size(); ++i)
    if (!(family[i].source() == source.source.sections(members[i])) ||
        !(family[i].target() == target.source.sections(members[i])))
      throw Error(ErrorKind::IncompatibleFamily, "map at " + source.sheaf.space()->key_of(members[i]) +
                                                     " has the wrong objects");
  for (std::size_t v = 0; v < members.size(); ++v)
    for (std::size_t u = 0; u < members.size(); ++u) {
      if (u == v || !members[u].subset_of(members[v])) continue;
      const auto& rs = source.source.restriction(members[v], members[u]);
      const auto& rt = target.source.restriction(members[v], members[u]);
      for (std::size_t x = 0; x < family[v].source().size(); ++x)
        if (family[u](rs(x)) != rt(family[v](x)))
          throw Error(ErrorKind::IncompatibleFamily, "family is not natural on the basis");
    }
  const auto& opens = source.sheaf.space()->opens();
  std::vector<ValueMorphism> comps;
  for (std::size_t i = 0; i < opens.size(); ++i) {
    std::vector<ValueMorphism> cone;
    for (std::size_t k = 0; k < source.members_within[i].size(); ++k) {
      const std::size_t m = source.source.basis().member_index(source.members_within[i][k]);
      cone.push_back(compose(family[m], source.limits[i].projections[k]));
    }
    comps.push_back(mediating_morphism(source.sheaf.sections_at(i), cone, target.limits[i]));
  }
  return PresheafMorphism(source.sheaf, target.sheaf, std::move(comps));
}

CanonicalPair compare_with_extension(const Presheaf& sheaf, const BasisExtension& extension) {
  const auto& opens = sheaf.space()->opens();
  std::vector<ValueMorphism> forward;
  std::vector<ValueMorphism> backward;
  for (std::size_t i = 0; i < opens.size(); ++i) {
    const auto& within = extension.members_within[i];
    std::vector<ValueMorphism> cone;
    for (auto w : within) cone.push_back(sheaf.restriction(opens[i], w));
    forward.push_back(mediating_morphism(sheaf.sections_at(i), cone, extension.limits[i]));

    const auto& lim = extension.limits[i];
    std::vector<std::size_t> map;
    for (const auto& fam : lim.families) {
      auto s = glue_sections(sheaf, opens[i], within, fam);
      if (!s) throw Error(ErrorKind::NotASheaf, "family over " + sheaf.space()->key_of(opens[i]) + " does not glue");
      map.push_back(*s);
    }
    backward.emplace_back(lim.object, sheaf.sections_at(i), std::move(map));
  }
  return {PresheafMorphism(sheaf, extension.sheaf, std::move(forward)),
          PresheafMorphism(extension.sheaf, sheaf, std::move(backward))};
}

CanonicalPair compare_basis_extensions(const BasisExtension& coarse, const BasisExtension& fine_subbasis) {
  const auto& space = coarse.sheaf.space();
  const auto& opens = space->opens();
  std::vector<ValueMorphism> forward;
  std::vector<ValueMorphism> backward;
  for (std::size_t i = 0; i < opens.size(); ++i) {
    const auto& fine_within = fine_subbasis.members_within[i];
    std::vector<ValueMorphism> cone;
    for (auto w : fine_within) cone.push_back(coarse.can(opens[i], w));
    forward.push_back(mediating_morphism(coarse.sheaf.sections_at(i), cone, fine_subbasis.limits[i]));

    const auto& fine_lim = fine_subbasis.limits[i];
    std::vector<ValueMorphism> back_cone;
    for (auto v : coarse.members_within[i]) {
      auto parts = fine_subbasis.source.basis().members_within(v);
      const auto& target = coarse.source.sections(v);
      std::vector<std::size_t> map;
      for (const auto& fam : fine_lim.families) {
        std::vector<std::size_t> sub;
        for (auto w : parts) {
          auto pos = static_cast<std::size_t>(std::find(fine_within.begin(), fine_within.end(), w) - fine_within.begin());
          sub.push_back(fam[pos]);
        }
        auto s = glue_basis_sections(coarse.source, v, parts, sub);
        if (!s) throw Error(ErrorKind::NotASheaf, "family over " + space->key_of(v) + " does not glue");
        map.push_back(*s);
      }
      back_cone.emplace_back(fine_lim.object, target, std::move(map));
    }
    backward.push_back(mediating_morphism(fine_lim.object, back_cone, coarse.limits[i]));
  }
  return {PresheafMorphism(coarse.sheaf, fine_subbasis.sheaf, std::move(forward)),
          PresheafMorphism(fine_subbasis.sheaf, coarse.sheaf, std::move(backward))};
}

BasisAgreement morphism_determined_by_basis(const PresheafMorphism& u, const PresheafMorphism& v,
                                            const Basis& basis) {
  BasisAgreement out;
  out.on_basis = std::all_of(basis.members().begin(), basis.members().end(),
                             [&](PointSet m) { return u.component(m) == v.component(m); });
  out.everywhere = u.components() == v.components();
  return out;
}

// ---------------------------------------------------------------------------
// Limits of sheaves

void SheafDiagram::validate() const {
  const std::size_t n = sheaves.size();
  if (names.size() != n || leq.size() != n) throw Error(ErrorKind::MalformedDiagram, "index size mismatch");
  for (const auto& row : leq)
    if (row.size() != n) throw Error(ErrorKind::MalformedDiagram, "order relation is not square");
  for (std::size_t a = 0; a < n; ++a) {
    if (!leq[a][a]) throw Error(ErrorKind::MalformedDiagram, "order is not reflexive at " + names[a]);
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && leq[a][b] && leq[b][a]) throw Error(ErrorKind::MalformedDiagram, "order is not antisymmetric");
      for (std::size_t c = 0; c < n; ++c)
        if (leq[a][b] && leq[b][c] && !leq[a][c]) throw Error(ErrorKind::MalformedDiagram, "order is not transitive");
    }
  }
  for (std::size_t a = 1; a < n; ++a) {
    if (sheaves[a].category() != sheaves[0].category())
      throw Error(ErrorKind::MixedCategories, "diagram mixes value categories");
    if (!same_space(sheaves[a].space(), sheaves[0].space()))
      throw Error(ErrorKind::MalformedDiagram, "diagram mixes spaces");
  }
  for (const auto& [key, m] : arrows) {
    auto [a, b] = key;
    if (a >= n || b >= n || a == b || !leq[a][b]) throw Error(ErrorKind::MalformedDiagram, "arrow outside the order");
    if (!(m.source() == sheaves[b]) || !(m.target() == sheaves[a]))
      throw Error(ErrorKind::MalformedDiagram, "arrow " + names[a] + " <= " + names[b] + " has the wrong ends");
    if (!m.is_natural()) throw Error(ErrorKind::MalformedDiagram, "arrow is not a presheaf morphism");
  }
  auto arrow = [&](std::size_t a, std::size_t b) -> const PresheafMorphism& {
    auto it = arrows.find({a, b});
    if (it == arrows.end()) throw Error(ErrorKind::MalformedDiagram, "missing arrow " + names[a] + " <= " + names[b]);
    return it->second;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && leq[a][b]) arrow(a, b);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (a != b && b != c && leq[a][b] && leq[b][c] && !(compose(arrow(a, b), arrow(b, c)) == arrow(a, c)))
          throw Error(ErrorKind::MalformedDiagram, "arrows do not compose");
  for (std::size_t a = 0; a < n; ++a)
    if (!is_sheaf(sheaves[a])) throw Error(ErrorKind::NotASheaf, "diagram node " + names[a] + " is not a sheaf");
}

SheafLimit limit_of_sheaves(const SheafDiagram& diagram) {
  diagram.validate();
  if (diagram.size() == 0) throw Error(ErrorKind::MalformedDiagram, "empty sheaf diagram has no space");
  const auto& space = diagram.sheaves[0].space();
  const auto& opens = space->opens();
  const std::size_t n = diagram.size();
  const auto category = diagram.sheaves[0].category();
  std::vector<LimitResult> limits;
  for (std::size_t i = 0; i < opens.size(); ++i) {
    Diagram d;
    d.category = category;
    d.orientation = Diagram::Orientation::Contravariant;
    d.names = diagram.names;
    d.leq = diagram.leq;
    for (const auto& f : diagram.sheaves) d.objects.push_back(f.sections_at(i));
    for (const auto& [key, m] : diagram.arrows) d.arrows.emplace(key, m.component_at(i));
    limits.push_back(limit(d));
  }
  std::vector<ValueObject> objs;
  for (const auto& l : limits) objs.push_back(l.object);
  RestrictionMap given;
  for (std::size_t v = 0; v < opens.size(); ++v)
    for (std::size_t u = 0; u < opens.size(); ++u) {
      if (u == v || !opens[u].subset_of(opens[v])) continue;
      std::vector<ValueMorphism> cone;
      for (std::size_t a = 0; a < n; ++a)
        cone.push_back(compose(diagram.sheaves[a].restriction_at(v, u), limits[v].projections[a]));
      given.emplace(std::pair{opens[v], opens[u]}, mediating_morphism(objs[v], cone, limits[u]));
    }
  Presheaf sheaf(space, category, std::move(objs), given);
  std::vector<PresheafMorphism> projections;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<ValueMorphism> comps;
    for (std::size_t i = 0; i < opens.size(); ++i) comps.push_back(limits[i].projections[a]);
    projections.emplace_back(sheaf, diagram.sheaves[a], std::move(comps));
  }
  return SheafLimit{std::move(sheaf), std::move(projections), std::move(limits)};
}

PresheafMorphism mediating_sheaf_morphism(const SheafLimit& limit, const Presheaf& apex,
                                          std::span<const PresheafMorphism> cone) {
  if (cone.size() != limit.projections.size()) throw Error(ErrorKind::IncompatibleCone, "one leg is needed per node");
  std::vector<ValueMorphism> comps;
  for (std::size_t i = 0; i < limit.limits.size(); ++i) {
    std::vector<ValueMorphism> legs;
    for (const auto& leg : cone) {
      if (!(leg.source() == apex)) throw Error(ErrorKind::IncompatibleCone, "cone leg from a different apex");
      legs.push_back(leg.component_at(i));
    }
    comps.push_back(mediating_morphism(apex.sections_at(i), legs, limit.limits[i]));
  }
  return PresheafMorphism(apex, limit.sheaf, std::move(comps));
}

bool is_constant_presheaf(const Presheaf& p) {
  const auto& space = *p.space();
  for (auto u : space.opens())
    if (!u.empty() && !p.restriction(space.all(), u).is_bijective()) return false;
  return true;
}

}  // namespace finsheaf
