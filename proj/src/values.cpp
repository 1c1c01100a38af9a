#include "finsheaf/values.hpp"

#include <algorithm>
#include <numeric>

#include "finsheaf/error.hpp"
#include "finsheaf/labels.hpp"

namespace finsheaf {

std::string_view to_string(Category c) noexcept { return c == Category::FinSet ? "FinSet" : "FinAb"; }

Category parse_category(std::string_view s) {
  if (s == "FinSet") return Category::FinSet;
  if (s == "FinAb") return Category::FinAb;
  throw Error(ErrorKind::ParseError, "unknown category " + std::string(s));
}

std::shared_ptr<ValueObject::Repr> ValueObject::make_repr(Category c, std::vector<std::string> sorted_elements) {
  auto repr = std::make_shared<Repr>();
  repr->category = c;
  repr->elements = std::move(sorted_elements);
  for (std::size_t i = 0; i < repr->elements.size(); ++i)
    if (!repr->index.emplace(repr->elements[i], i).second)
      throw Error(ErrorKind::ValueMismatch, "duplicate element label " + repr->elements[i]);
  return repr;
}

ValueObject::ValueObject() : repr_(make_repr(Category::FinSet, {})) {}

ValueObject ValueObject::set(std::vector<std::string> elements) {
  std::sort(elements.begin(), elements.end());
  return ValueObject(make_repr(Category::FinSet, std::move(elements)));
}

namespace {

void check_group_axioms(const std::vector<std::size_t>& add, std::size_t n, std::size_t zero) {
  auto op = [&](std::size_t a, std::size_t b) { return add[a * n + b]; };
  for (std::size_t a = 0; a < n; ++a) {
    if (op(zero, a) != a) throw Error(ErrorKind::ValueMismatch, "zero is not an identity");
    bool has_inverse = false;
    for (std::size_t b = 0; b < n; ++b) {
      if (op(a, b) != op(b, a)) throw Error(ErrorKind::ValueMismatch, "addition is not commutative");
      has_inverse |= op(a, b) == zero;
      for (std::size_t c = 0; c < n; ++c)
        if (op(op(a, b), c) != op(a, op(b, c)))
          throw Error(ErrorKind::ValueMismatch, "addition is not associative");
    }
    if (!has_inverse) throw Error(ErrorKind::ValueMismatch, "element without inverse");
  }
}

}  // namespace

ValueObject ValueObject::group(std::vector<std::string> elements,
                               const std::vector<std::array<std::string, 3>>& table, std::string_view zero) {
  std::sort(elements.begin(), elements.end());
  auto repr = make_repr(Category::FinAb, std::move(elements));
  const std::size_t n = repr->elements.size();
  if (n == 0) throw Error(ErrorKind::ValueMismatch, "a group needs a zero element");
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  repr->add.assign(n * n, kUnset);
  auto idx = [&](const std::string& l) {
    auto it = repr->index.find(l);
    if (it == repr->index.end()) throw Error(ErrorKind::ValueMismatch, "unknown group element " + l);
    return it->second;
  };
  for (const auto& [x, y, z] : table) {
    std::size_t& slot = repr->add[idx(x) * n + idx(y)];
    if (slot != kUnset && slot != idx(z)) throw Error(ErrorKind::ValueMismatch, "conflicting table entry");
    slot = idx(z);
  }
  for (auto v : repr->add)
    if (v == kUnset) throw Error(ErrorKind::ValueMismatch, "addition table is not total");
  repr->zero = idx(std::string(zero));
  check_group_axioms(repr->add, n, repr->zero);
  repr->neg.resize(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (repr->add[a * n + b] == repr->zero) repr->neg[a] = b;
  return ValueObject(std::move(repr));
}

ValueObject ValueObject::group(std::vector<std::string> elements,
                               const std::function<std::size_t(std::size_t, std::size_t)>& add) {
  const std::size_t n = elements.size();
  if (n == 0) throw Error(ErrorKind::ValueMismatch, "a group needs a zero element");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return elements[a] < elements[b]; });
  std::vector<std::size_t> position(n);
  std::vector<std::string> sorted(n);
  for (std::size_t k = 0; k < n; ++k) {
    position[order[k]] = k;
    sorted[k] = elements[order[k]];
  }
  auto repr = make_repr(Category::FinAb, std::move(sorted));
  repr->add.resize(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) repr->add[position[a] * n + position[b]] = position.at(add(a, b));
  repr->zero = n;
  for (std::size_t a = 0; a < n && repr->zero == n; ++a) {
    bool is_zero = true;
    for (std::size_t b = 0; b < n && is_zero; ++b) is_zero = repr->add[a * n + b] == b;
    if (is_zero) repr->zero = a;
  }
  if (repr->zero == n) throw Error(ErrorKind::ValueMismatch, "addition has no identity");
  check_group_axioms(repr->add, n, repr->zero);
  repr->neg.resize(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (repr->add[a * n + b] == repr->zero) repr->neg[a] = b;
  return ValueObject(std::move(repr));
}

ValueObject ValueObject::cyclic(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::ValueMismatch, "Z/0 is not finite");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return group(std::move(labels), [n](std::size_t a, std::size_t b) { return (a + b) % n; });
}

ValueObject ValueObject::terminal(Category category) {
  if (category == Category::FinSet) return set({"()"});
  return group({"()"}, [](std::size_t, std::size_t) { return std::size_t{0}; });
}

std::optional<std::size_t> ValueObject::find(std::string_view label) const {
  auto it = repr_->index.find(std::string(label));
  if (it == repr_->index.end()) return std::nullopt;
  return it->second;
}

std::size_t ValueObject::index_of(std::string_view label) const {
  auto found = find(label);
  if (!found) throw Error(ErrorKind::NotASection, "no element " + std::string(label));
  return *found;
}

std::size_t ValueObject::exponent() const {
  if (!is_group()) return 1;
  std::size_t e = 1;
  for (std::size_t a = 0; a < size(); ++a) {
    std::size_t order = 1;
    for (std::size_t acc = a; acc != zero(); acc = add(acc, a)) ++order;
    e = std::lcm(e, order);
  }
  return e;
}

bool operator==(const ValueObject& a, const ValueObject& b) {
  if (a.repr_ == b.repr_) return true;
  return a.repr_->category == b.repr_->category && a.repr_->elements == b.repr_->elements &&
         a.repr_->add == b.repr_->add && a.repr_->zero == b.repr_->zero;
}

ValueMorphism::ValueMorphism(ValueObject source, ValueObject target, std::vector<std::size_t> map)
    : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {
  if (source_.category() != target_.category())
    throw Error(ErrorKind::MixedCategories, "morphism between different categories");
  if (map_.size() != source_.size()) throw Error(ErrorKind::ValueMismatch, "map is not total on its source");
  for (auto v : map_)
    if (v >= target_.size()) throw Error(ErrorKind::ValueMismatch, "map image outside its target");
  if (source_.is_group()) {
    if (map_[source_.zero()] != target_.zero())
      throw Error(ErrorKind::ValueMismatch, "homomorphism must preserve zero");
    for (std::size_t a = 0; a < source_.size(); ++a)
      for (std::size_t b = a; b < source_.size(); ++b)
        if (map_[source_.add(a, b)] != target_.add(map_[a], map_[b]))
          throw Error(ErrorKind::ValueMismatch, "map does not preserve addition");
  }
}

ValueMorphism ValueMorphism::identity(const ValueObject& object) {
  std::vector<std::size_t> map(object.size());
  std::iota(map.begin(), map.end(), 0);
  return ValueMorphism(object, object, std::move(map));
}

ValueMorphism ValueMorphism::from_labels(ValueObject source, ValueObject target,
                                         const std::map<std::string, std::string>& map) {
  std::vector<std::size_t> table(source.size(), target.size());
  for (const auto& [from, to] : map) table[source.index_of(from)] = target.index_of(to);
  for (std::size_t i = 0; i < table.size(); ++i)
    if (table[i] == target.size()) throw Error(ErrorKind::ValueMismatch, "no image for element " + source.element(i));
  return ValueMorphism(std::move(source), std::move(target), std::move(table));
}

bool ValueMorphism::is_injective() const {
  std::vector<bool> hit(target_.size(), false);
  for (auto v : map_) {
    if (hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

bool ValueMorphism::is_surjective() const {
  std::vector<bool> hit(target_.size(), false);
  for (auto v : map_) hit[v] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool h) { return h; });
}

ValueMorphism ValueMorphism::inverse() const {
  if (!is_bijective()) throw Error(ErrorKind::ValueMismatch, "morphism is not invertible");
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t a = 0; a < map_.size(); ++a) inv[map_[a]] = a;
  return ValueMorphism(target_, source_, std::move(inv));
}

std::map<std::string, std::string> ValueMorphism::label_map() const {
  std::map<std::string, std::string> out;
  for (std::size_t a = 0; a < map_.size(); ++a) out.emplace(source_.element(a), target_.element(map_[a]));
  return out;
}

ValueMorphism compose(const ValueMorphism& after, const ValueMorphism& before) {
  if (!(before.target() == after.source()))
    throw Error(ErrorKind::ValueMismatch, "composite of morphisms whose objects do not match");
  std::vector<std::size_t> map(before.source().size());
  for (std::size_t a = 0; a < map.size(); ++a) map[a] = after(before(a));
  return ValueMorphism(before.source(), after.target(), std::move(map));
}

ValueMorphism Diagram::arrow(std::size_t i, std::size_t j) const {
  if (i == j) return ValueMorphism::identity(objects.at(i));
  auto it = arrows.find({i, j});
  if (it == arrows.end())
    throw Error(ErrorKind::MalformedDiagram, "missing arrow " + names.at(i) + " <= " + names.at(j));
  return it->second;
}

void Diagram::validate() const {
  const std::size_t n = objects.size();
  if (names.size() != n || leq.size() != n) throw Error(ErrorKind::MalformedDiagram, "index size mismatch");
  for (const auto& row : leq)
    if (row.size() != n) throw Error(ErrorKind::MalformedDiagram, "order relation is not square");
  for (const auto& o : objects)
    if (o.category() != category) throw Error(ErrorKind::MixedCategories, "diagram object in another category");
  for (std::size_t i = 0; i < n; ++i) {
    if (!leq[i][i]) throw Error(ErrorKind::MalformedDiagram, "order relation is not reflexive");
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && leq[i][j] && leq[j][i]) throw Error(ErrorKind::MalformedDiagram, "order is not antisymmetric");
      for (std::size_t k = 0; k < n; ++k)
        if (leq[i][j] && leq[j][k] && !leq[i][k]) throw Error(ErrorKind::MalformedDiagram, "order is not transitive");
    }
  }
  for (const auto& [key, arrow] : arrows) {
    auto [i, j] = key;
    if (i >= n || j >= n || i == j || !leq[i][j])
      throw Error(ErrorKind::MalformedDiagram, "arrow between incomparable indices");
    const bool contra = orientation == Orientation::Contravariant;
    const ValueObject& src = objects[contra ? j : i];
    const ValueObject& dst = objects[contra ? i : j];
    if (!(arrow.source() == src) || !(arrow.target() == dst))
      throw Error(ErrorKind::MalformedDiagram, "arrow objects disagree with the diagram");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && leq[i][j] && !arrows.contains({i, j}))
        throw Error(ErrorKind::MalformedDiagram, "missing arrow " + names[i] + " <= " + names[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || !leq[i][j] || !leq[j][k]) continue;
        ValueMorphism composite = orientation == Orientation::Contravariant
                                      ? compose(arrow(i, j), arrow(j, k))
                                      : compose(arrow(j, k), arrow(i, j));
        if (!(composite == arrow(i, k)))
          throw Error(ErrorKind::MalformedDiagram,
                      "arrows do not compose at " + names[i] + " <= " + names[j] + " <= " + names[k]);
      }
}

LimitResult limit(const Diagram& diagram) {
  if (diagram.orientation != Diagram::Orientation::Contravariant)
    throw Error(ErrorKind::MalformedDiagram, "limits take contravariant diagrams");
  for (const auto& o : diagram.objects)
    if (o.category() != diagram.category) throw Error(ErrorKind::MixedCategories, "diagram object in another category");
  const std::size_t n = diagram.size();

  // Process indices so that every strict upper bound comes first.
  std::vector<std::size_t> upper_count(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && diagram.leq[i][j]) ++upper_count[i];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return upper_count[a] < upper_count[b]; });
  std::vector<std::vector<std::pair<std::size_t, ValueMorphism>>> above(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && diagram.leq[i][j]) above[i].emplace_back(j, diagram.arrow(i, j));

  std::vector<std::vector<std::size_t>> families;
  std::vector<std::size_t> current(n, 0);
  auto recurse = [&](auto&& self, std::size_t step) -> void {
    if (step == n) {
      families.push_back(current);
      return;
    }
    const std::size_t i = order[step];
    if (!above[i].empty()) {
      const auto& [j0, a0] = above[i].front();
      std::size_t forced = a0(current[j0]);
      for (const auto& [j, a] : above[i])
        if (a(current[j]) != forced) return;
      current[i] = forced;
      self(self, step + 1);
      return;
    }
    for (std::size_t e = 0; e < diagram.objects[i].size(); ++e) {
      current[i] = e;
      self(self, step + 1);
    }
  };
  recurse(recurse, 0);

  std::vector<std::string> labels;
  labels.reserve(families.size());
  for (const auto& f : families) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < n; ++i) parts.push_back(diagram.objects[i].element(f[i]));
    labels.push_back(tuple_label(parts));
  }

  LimitResult result;
  if (diagram.category == Category::FinSet) {
    result.object = ValueObject::set(labels);
  } else {
    std::map<std::vector<std::size_t>, std::size_t> by_family;
    for (std::size_t k = 0; k < families.size(); ++k) by_family.emplace(families[k], k);
    result.object = ValueObject::group(labels, [&](std::size_t a, std::size_t b) {
      std::vector<std::size_t> sum(n);
      for (std::size_t i = 0; i < n; ++i) sum[i] = diagram.objects[i].add(families[a][i], families[b][i]);
      return by_family.at(sum);
    });
  }
  result.families.resize(families.size());
  for (std::size_t k = 0; k < families.size(); ++k) {
    std::size_t idx = result.object.index_of(labels[k]);
    result.families[idx] = families[k];
  }
  for (std::size_t k = 0; k < result.families.size(); ++k) result.lookup.emplace(result.families[k], k);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> proj(result.families.size());
    for (std::size_t k = 0; k < proj.size(); ++k) proj[k] = result.families[k][i];
    result.projections.emplace_back(result.object, diagram.objects[i], std::move(proj));
  }
  return result;
}

ColimitResult filtered_colimit(const Diagram& diagram) {
  if (diagram.orientation != Diagram::Orientation::Covariant)
    throw Error(ErrorKind::MalformedDiagram, "colimits take covariant diagrams");
  for (const auto& o : diagram.objects)
    if (o.category() != diagram.category) throw Error(ErrorKind::MixedCategories, "diagram object in another category");
  const std::size_t n = diagram.size();
  auto upper_bound = [&](std::size_t i, std::size_t j) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < n; ++k)
      if (diagram.leq[i][k] && diagram.leq[j][k]) return k;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!upper_bound(i, j))
        throw Error(ErrorKind::NotFiltered, diagram.names[i] + " and " + diagram.names[j] + " have no upper bound");

  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + diagram.objects[i].size();
  std::vector<std::size_t> parent(offset[n]);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k || !diagram.leq[i][k]) continue;
      ValueMorphism a = diagram.arrow(i, k);
      for (std::size_t e = 0; e < diagram.objects[i].size(); ++e)
        parent[find(offset[i] + e)] = find(offset[k] + a(e));
    }

  // Least representative label per class.
  std::map<std::size_t, std::pair<std::string, std::pair<std::size_t, std::size_t>>> best;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = 0; e < diagram.objects[i].size(); ++e) {
      std::vector<std::string> parts{diagram.names[i], diagram.objects[i].element(e)};
      std::string label = tuple_label(parts);
      std::size_t root = find(offset[i] + e);
      auto it = best.find(root);
      if (it == best.end() || label < it->second.first) best[root] = {label, {i, e}};
    }
  std::vector<std::string> labels;
  std::vector<std::size_t> roots;
  for (const auto& [root, entry] : best) {
    roots.push_back(root);
    labels.push_back(entry.first);
  }
  std::map<std::size_t, std::size_t> root_slot;
  for (std::size_t c = 0; c < roots.size(); ++c) root_slot.emplace(roots[c], c);

  ColimitResult result;
  if (diagram.category == Category::FinSet) {
    result.object = ValueObject::set(labels);
  } else {
    if (n == 0) {
      result.object = ValueObject::terminal(Category::FinAb);
      return result;
    }
    result.object = ValueObject::group(labels, [&](std::size_t c, std::size_t d) {
      auto [i, a] = best.at(roots[c]).second;
      auto [j, b] = best.at(roots[d]).second;
      std::size_t k = *upper_bound(i, j);
      std::size_t sum = diagram.objects[k].add(diagram.arrow(i, k)(a), diagram.arrow(j, k)(b));
      return root_slot.at(find(offset[k] + sum));
    });
  }
  result.representatives.resize(roots.size());
  std::vector<std::size_t> class_index(roots.size());
  for (std::size_t c = 0; c < roots.size(); ++c) {
    class_index[c] = result.object.index_of(labels[c]);
    result.representatives[class_index[c]] = best.at(roots[c]).second;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> inj(diagram.objects[i].size());
    for (std::size_t e = 0; e < inj.size(); ++e) inj[e] = class_index[root_slot.at(find(offset[i] + e))];
    result.injections.emplace_back(diagram.objects[i], result.object, std::move(inj));
  }
  return result;
}

std::vector<ValueMorphism> enumerate_morphisms(const ValueObject& source, const ValueObject& target,
                                               std::size_t cap) {
  if (source.category() != target.category())
    throw Error(ErrorKind::MixedCategories, "hom-set between different categories");
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  std::vector<ValueMorphism> out;
  std::size_t examined = 0;
  std::vector<std::size_t> image(n, 0);
  if (!source.is_group()) {
    // m^n candidates, checked up front.
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) {
      if (m != 0 && total > cap / m) throw Error(ErrorKind::CapExceeded, "hom-set exceeds the enumeration cap");
      total *= m;
    }
    if (total > cap) throw Error(ErrorKind::CapExceeded, "hom-set exceeds the enumeration cap");
  }
  auto recurse = [&](auto&& self, std::size_t a) -> void {
    if (++examined > cap) throw Error(ErrorKind::CapExceeded, "hom-set exceeds the enumeration cap");
    if (a == n) {
      out.emplace_back(source, target, image);
      return;
    }
    for (std::size_t v = 0; v < m; ++v) {
      image[a] = v;
      if (source.is_group()) {
        // Every additive relation among indices ≤ a that involves a.
        bool ok = a != source.zero() || v == target.zero();
        for (std::size_t p = 0; p <= a && ok; ++p)
          for (std::size_t q = 0; q <= p && ok; ++q) {
            std::size_t s = source.add(p, q);
            if (s > a || (p != a && q != a && s != a)) continue;
            ok = image[s] == target.add(image[p], image[q]);
          }
        if (!ok) continue;
      }
      self(self, a + 1);
    }
  };
  recurse(recurse, 0);
  return out;
}

ValueMorphism mediating_morphism(const ValueObject& apex, std::span<const ValueMorphism> cone,
                                 const LimitResult& limit) {
  if (cone.size() != limit.projections.size())
    throw Error(ErrorKind::IncompatibleCone, "cone has the wrong number of legs");
  for (std::size_t i = 0; i < cone.size(); ++i)
    if (!(cone[i].source() == apex) || !(cone[i].target() == limit.projections[i].target()))
      throw Error(ErrorKind::IncompatibleCone, "cone leg objects disagree with the diagram");
  std::vector<std::size_t> map(apex.size());
  std::vector<std::size_t> family(cone.size());
  for (std::size_t t = 0; t < apex.size(); ++t) {
    for (std::size_t i = 0; i < cone.size(); ++i) family[i] = cone[i](t);
    auto it = limit.lookup.find(family);
    if (it == limit.lookup.end())
      throw Error(ErrorKind::IncompatibleCone, "cone does not commute at element " + apex.element(t));
    map[t] = it->second;
  }
  return ValueMorphism(apex, limit.object, std::move(map));
}

ValueMorphism comediating_morphism(const ColimitResult& colimit, const ValueObject& apex,
                                   std::span<const ValueMorphism> cocone) {
  if (cocone.size() != colimit.injections.size())
    throw Error(ErrorKind::IncompatibleCone, "cocone has the wrong number of legs");
  for (std::size_t i = 0; i < cocone.size(); ++i)
    if (!(cocone[i].target() == apex) || !(cocone[i].source() == colimit.injections[i].source()))
      throw Error(ErrorKind::IncompatibleCone, "cocone leg objects disagree with the diagram");
  std::vector<std::size_t> map(colimit.object.size());
  for (std::size_t c = 0; c < map.size(); ++c) {
    auto [i, e] = colimit.representatives[c];
    map[c] = cocone[i](e);
  }
  for (std::size_t i = 0; i < cocone.size(); ++i)
    for (std::size_t e = 0; e < cocone[i].source().size(); ++e)
      if (map[colimit.injections[i](e)] != cocone[i](e))
        throw Error(ErrorKind::IncompatibleCone, "cocone does not commute");
  return ValueMorphism(colimit.object, apex, std::move(map));
}

}  // namespace finsheaf
