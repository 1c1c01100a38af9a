#include "finsheaf/gluing.hpp"

#include <algorithm>
#include <numeric>

#include "finsheaf/error.hpp"

namespace finsheaf {

namespace {

PointSet whole_in(const Presheaf& p, const FiniteSpace& ambient) {
  return transfer(p.space()->all(), *p.space(), ambient);
}

PresheafMorphism restrict_morphism(const PresheafMorphism& m, PointSet w, const FiniteSpace& ambient) {
  return restrict_to_open(m, transfer(w, ambient, *m.source().space()));
}

std::string triple_name(const GluingDatum& d, std::size_t l, std::size_t m, std::size_t n) {
  return "(" + d.labels[l] + ", " + d.labels[m] + ", " + d.labels[n] + ")";
}

std::vector<CocycleViolation> violations_of(const GluingDatum& cd) {
  const auto& x = *cd.space;
  const std::size_t n = cd.size();
  std::vector<CocycleViolation> out;
  for (std::size_t l = 0; l < n; ++l)
    if (!(cd.cocycle.at({l, l}) == PresheafMorphism::identity(cd.cocycle.at({l, l}).source())))
      out.push_back({l, l, l, true});
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t k = 0; k < n; ++k) {
        const auto w = cd.covering[l] & cd.covering[m] & cd.covering[k];
        auto direct = restrict_morphism(cd.cocycle.at({l, k}), w, x);
        auto via = compose(restrict_morphism(cd.cocycle.at({l, m}), w, x), restrict_morphism(cd.cocycle.at({m, k}), w, x));
        if (!(direct == via)) out.push_back({l, m, k, false});
      }
  return out;
}

std::vector<std::size_t> choice_order(const GluingDatum& d, std::vector<std::size_t> preference) {
  if (preference.empty()) {
    preference.resize(d.size());
    std::iota(preference.begin(), preference.end(), std::size_t{0});
    std::sort(preference.begin(), preference.end(),
              [&](std::size_t a, std::size_t b) { return d.labels[a] < d.labels[b]; });
    return preference;
  }
  auto sorted = preference;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != i || sorted.size() != d.size())
      throw Error(ErrorKind::MalformedDiagram, "choice preference is not a permutation of the covering");
  return preference;
}

// Glues, open by open, the images of local morphisms source|_{U_λ} → target|_{U_λ}.
PresheafMorphism glue_local(const Presheaf& source, const Presheaf& target, std::span<const PointSet> covering,
                            const std::vector<PresheafMorphism>& local, ErrorKind failure) {
  const auto& x = *source.space();
  std::vector<ValueMorphism> comps;
  for (auto w : x.opens()) {
    std::vector<PointSet> parts;
    std::vector<const ValueMorphism*> res;
    std::vector<const ValueMorphism*> maps;
    for (std::size_t l = 0; l < covering.size(); ++l) {
      const auto part = w & covering[l];
      parts.push_back(part);
      res.push_back(&source.restriction(w, part));
      maps.push_back(&local[l].component(transfer(part, x, *local[l].source().space())));
    }
    std::vector<std::size_t> map;
    for (std::size_t s = 0; s < source.sections(w).size(); ++s) {
      std::vector<std::size_t> family;
      for (std::size_t l = 0; l < parts.size(); ++l) family.push_back((*maps[l])((*res[l])(s)));
      auto glued = glue_sections(target, w, parts, family);
      if (!glued) throw Error(failure, "local images over " + x.key_of(w) + " do not glue");
      map.push_back(*glued);
    }
    comps.emplace_back(source.sections(w), target.sections(w), std::move(map));
  }
  return PresheafMorphism(source, target, std::move(comps));
}

}  // namespace

Presheaf GluingDatum::part_on(std::size_t lambda, PointSet w) const {
  const auto& p = parts.at(lambda);
  return restrict_to_open(p, transfer(w, *space, *p.space()));
}

GluingDatum complete_cocycle(const GluingDatum& d) {
  const auto& x = *d.space;
  const std::size_t n = d.size();
  if (d.covering.size() != n || d.parts.size() != n)
    throw Error(ErrorKind::MalformedDiagram, "one open and one part are needed per label");
  auto sorted = d.labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::MalformedDiagram, "covering labels must be distinct");
  PointSet covered;
  for (std::size_t l = 0; l < n; ++l) {
    if (!x.is_open(d.covering[l]))
      throw Error(ErrorKind::NotAnOpen, "covering member " + d.labels[l] + " is not open");
    covered = covered | d.covering[l];
    if (!same_space(d.parts[l].space(), x.subspace(d.covering[l])))
      throw Error(ErrorKind::MalformedDiagram, "part " + d.labels[l] + " does not live on its covering member");
    if (d.parts[l].category() != d.parts[0].category())
      throw Error(ErrorKind::MixedCategories, "parts have different categories");
    if (!is_sheaf(d.parts[l])) throw Error(ErrorKind::NotASheaf, "part " + d.labels[l] + " is not a sheaf");
  }
  if (covered != x.all()) throw Error(ErrorKind::MalformedDiagram, "the parts do not cover the space");
  for (const auto& [key, m] : d.cocycle)
    if (key.first >= n || key.second >= n) throw Error(ErrorKind::MalformedDiagram, "cocycle index out of range");

  GluingDatum out = d;
  out.cocycle.clear();
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t m = 0; m < n; ++m) {
      const auto ov = d.covering[l] & d.covering[m];
      auto source = d.part_on(m, ov);
      auto target = d.part_on(l, ov);
      const std::string name = "(" + d.labels[l] + ", " + d.labels[m] + ")";
      std::optional<PresheafMorphism> theta;
      if (auto it = d.cocycle.find({l, m}); it != d.cocycle.end()) {
        theta = it->second;
      } else if (l == m) {
        theta = PresheafMorphism::identity(source);
      } else if (auto back = d.cocycle.find({m, l}); back != d.cocycle.end()) {
        if (!back->second.is_isomorphism())
          throw Error(ErrorKind::CocycleViolation, "cocycle entry " + name + " is not an isomorphism");
        theta = back->second.inverse();
      } else if (ov.empty()) {
        theta = PresheafMorphism::from_function(source, target, [&](PointSet u) {
          return ValueMorphism(source.sections(u), target.sections(u),
                               std::vector<std::size_t>(source.sections(u).size(), 0));
        });
      } else {
        throw Error(ErrorKind::MalformedDiagram, "missing cocycle entry " + name);
      }
      if (!(theta->source() == source) || !(theta->target() == target))
        throw Error(ErrorKind::MalformedDiagram, "cocycle entry " + name + " does not connect the restricted parts");
      theta->require_natural();
      if (!theta->is_isomorphism())
        throw Error(ErrorKind::CocycleViolation, "cocycle entry " + name + " is not an isomorphism");
      out.cocycle.emplace(std::pair{l, m}, *theta);
    }
  return out;
}

GluingDatum gluing_datum_of(const Presheaf& f, std::vector<std::string> labels, std::vector<PointSet> covering) {
  GluingDatum d{f.space(), std::move(labels), std::move(covering), {}, {}};
  for (auto u : d.covering) d.parts.push_back(restrict_to_open(f, u));
  for (std::size_t l = 0; l < d.size(); ++l)
    for (std::size_t m = 0; m < d.size(); ++m) {
      const auto ov = d.covering[l] & d.covering[m];
      auto source = d.part_on(m, ov);
      d.cocycle.emplace(std::pair{l, m},
                        PresheafMorphism(source, d.part_on(l, ov), PresheafMorphism::identity(source).components()));
    }
  return complete_cocycle(d);
}

CocycleReport check_cocycle(const GluingDatum& d) {
  CocycleReport r;
  r.violations = violations_of(complete_cocycle(d));
  r.verdict = r.violations.empty();
  return r;
}

GluedSheaf glue(const GluingDatum& d, std::vector<std::size_t> preference) {
  const auto cd = complete_cocycle(d);
  if (auto bad = violations_of(cd); !bad.empty())
    throw Error(ErrorKind::CocycleViolation, "cocycle fails on " + triple_name(cd, bad[0].lambda, bad[0].mu, bad[0].nu));
  const auto order = choice_order(cd, std::move(preference));
  const auto& x = *cd.space;

  std::vector<PointSet> members;
  for (auto v : x.opens())
    if (std::any_of(cd.covering.begin(), cd.covering.end(), [&](PointSet u) { return v.subset_of(u); }))
      members.push_back(v);
  Basis basis(cd.space, members);
  auto tau = [&](PointSet v) {
    for (auto l : order)
      if (v.subset_of(cd.covering[l])) return l;
    throw Error(ErrorKind::NotAnOpen, "open is not inside any covering member");
  };
  auto local = [&](std::size_t l, PointSet v) { return transfer(v, x, *cd.parts[l].space()); };

  std::vector<ValueObject> sections;
  for (auto v : basis.members()) sections.push_back(cd.parts[tau(v)].sections(local(tau(v), v)));
  RestrictionMap given;
  for (auto v : basis.members())
    for (auto w : basis.members()) {
      if (!w.subset_of(v)) continue;
      const auto tv = tau(v);
      const auto tw = tau(w);
      const auto& theta = cd.cocycle.at({tw, tv});
      auto transport = theta.component(transfer(w, x, *theta.source().space()));
      given.emplace(std::pair{v, w}, compose(transport, cd.parts[tv].restriction(local(tv, v), local(tv, w))));
    }
  auto ext = extend_from_basis(BasisPresheaf(basis, cd.parts[0].category(), std::move(sections), given));

  std::vector<PresheafMorphism> isos;
  for (std::size_t l = 0; l < cd.size(); ++l) {
    auto restricted = restrict_to_open(ext.sheaf, cd.covering[l]);
    const auto& sub = *restricted.space();
    isos.push_back(PresheafMorphism::from_function(restricted, cd.parts[l], [&](PointSet w) {
      const auto v = transfer(w, sub, x);
      const auto& theta = cd.cocycle.at({l, tau(v)});
      return compose(theta.component(transfer(v, x, *theta.source().space())), ext.can(v));
    }));
  }
  return GluedSheaf{ext.sheaf, std::move(isos)};
}

bool satisfies_gluing(const GluingDatum& d, const GluedSheaf& g) {
  const auto cd = complete_cocycle(d);
  const auto& x = *cd.space;
  if (!same_space(g.sheaf.space(), cd.space) || g.isos.size() != cd.size()) return false;
  for (std::size_t l = 0; l < cd.size(); ++l) {
    const auto& eta = g.isos[l];
    if (!(eta.source() == restrict_to_open(g.sheaf, cd.covering[l])) || !(eta.target() == cd.parts[l]) ||
        !eta.is_natural() || !eta.is_isomorphism())
      return false;
  }
  for (std::size_t l = 0; l < cd.size(); ++l)
    for (std::size_t m = 0; m < cd.size(); ++m) {
      const auto ov = cd.covering[l] & cd.covering[m];
      auto composite = compose(restrict_morphism(g.isos[l], ov, x), restrict_morphism(g.isos[m], ov, x).inverse());
      if (!(composite == cd.cocycle.at({l, m}))) return false;
    }
  return true;
}

PresheafMorphism glued_uniqueness(const GluingDatum& d, const GluedSheaf& candidate) {
  if (!satisfies_gluing(d, candidate)) throw Error(ErrorKind::NotAGluing, "candidate does not satisfy the gluing condition");
  const auto reference = glue(d);
  std::vector<PresheafMorphism> local;
  for (std::size_t l = 0; l < d.size(); ++l)
    local.push_back(compose(reference.isos[l].inverse(), candidate.isos[l]));
  auto phi = glue_local(candidate.sheaf, reference.sheaf, d.covering, local, ErrorKind::NotAGluing);
  if (!phi.is_natural() || !phi.is_isomorphism()) throw Error(ErrorKind::NotAGluing, "comparison is not an isomorphism");
  return phi;
}

PresheafMorphism glue_morphisms(const GluingDatum& d, const GluedSheaf& gd, const GluingDatum& e,
                                const GluedSheaf& ge, const std::vector<PresheafMorphism>& family) {
  const auto cd = complete_cocycle(d);
  const auto ce = complete_cocycle(e);
  if (cd.covering != ce.covering || !same_space(cd.space, ce.space))
    throw Error(ErrorKind::IncompatibleFamily, "gluing data over different coverings");
  if (family.size() != cd.size()) throw Error(ErrorKind::IncompatibleFamily, "one morphism is needed per part");
  const auto& x = *cd.space;
  for (std::size_t l = 0; l < cd.size(); ++l)
    if (!(family[l].source() == cd.parts[l]) || !(family[l].target() == ce.parts[l]))
      throw Error(ErrorKind::IncompatibleFamily, "morphism for " + cd.labels[l] + " does not connect the parts");
  for (std::size_t l = 0; l < cd.size(); ++l)
    for (std::size_t m = 0; m < cd.size(); ++m) {
      const auto ov = cd.covering[l] & cd.covering[m];
      auto left = compose(restrict_morphism(family[l], ov, x), cd.cocycle.at({l, m}));
      auto right = compose(ce.cocycle.at({l, m}), restrict_morphism(family[m], ov, x));
      if (!(left == right))
        throw Error(ErrorKind::IncompatibleFamily,
                    "square fails on the overlap of " + cd.labels[l] + " and " + cd.labels[m]);
    }
  std::vector<PresheafMorphism> local;
  for (std::size_t l = 0; l < cd.size(); ++l)
    local.push_back(compose(ge.isos[l].inverse(), compose(family[l], gd.isos[l])));
  return glue_local(gd.sheaf, ge.sheaf, cd.covering, local, ErrorKind::IncompatibleFamily);
}

PresheafMorphism glue_morphisms(const GluingDatum& d, const GluingDatum& e, const std::vector<PresheafMorphism>& family) {
  return glue_morphisms(d, glue(d), e, glue(e), family);
}

std::vector<PresheafMorphism> local_family(const GluedSheaf& gd, const GluedSheaf& ge, const PresheafMorphism& u) {
  const auto& x = *gd.sheaf.space();
  std::vector<PresheafMorphism> out;
  for (std::size_t l = 0; l < gd.isos.size(); ++l) {
    const auto part = whole_in(gd.isos[l].source(), x);
    out.push_back(compose(ge.isos[l], compose(restrict_to_open(u, part), gd.isos[l].inverse())));
  }
  return out;
}

GluingDatum restrict_gluing(const GluingDatum& d, PointSet v) {
  const auto& x = *d.space;
  x.open_index(v);
  const auto cd = complete_cocycle(d);
  auto sub = x.subspace(v);
  GluingDatum out{sub, cd.labels, {}, {}, {}};
  for (std::size_t l = 0; l < cd.size(); ++l) {
    out.covering.push_back(transfer(v & cd.covering[l], x, *sub));
    out.parts.push_back(cd.part_on(l, v & cd.covering[l]));
  }
  for (const auto& [key, theta] : cd.cocycle)
    out.cocycle.emplace(key, restrict_morphism(theta, v & cd.covering[key.first] & cd.covering[key.second], x));
  return out;
}

GluedSheaf restrict_glued(const GluingDatum& d, const GluedSheaf& g, PointSet v) {
  const auto& x = *d.space;
  x.open_index(v);
  GluedSheaf out{restrict_to_open(g.sheaf, v), {}};
  for (std::size_t l = 0; l < g.isos.size(); ++l)
    out.isos.push_back(restrict_morphism(g.isos[l], v & d.covering[l], x));
  return out;
}

}  // namespace finsheaf
