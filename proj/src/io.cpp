#include "finsheaf/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "finsheaf/error.hpp"

namespace finsheaf::io {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

const json& field(const json& j, const char* name) {
  if (!j.is_object()) malformed(std::string("expected an object holding `") + name + "`");
  auto it = j.find(name);
  if (it == j.end()) malformed(std::string("missing field `") + name + "`");
  return *it;
}

std::string as_string(const json& j, const char* what) {
  if (!j.is_string()) malformed(std::string(what) + " must be a string");
  return j.get<std::string>();
}

std::vector<std::string> as_strings(const json& j, const char* what) {
  if (!j.is_array()) malformed(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(as_string(e, what));
  return out;
}

void require_schema(const json& j, const char* expected) {
  if (schema_of(j) != expected)
    malformed("expected schema " + std::string(expected) + ", found " + schema_of(j));
}

// An inline document or a path to one.
json resolve(const json& j, const Context& ctx, std::filesystem::path* dir) {
  if (!j.is_string()) {
    if (dir) *dir = ctx.base_dir;
    return j;
  }
  auto path = ctx.base_dir / j.get<std::string>();
  if (!std::filesystem::exists(path))
    throw Error(ErrorKind::CrossReferenceError, "referenced file " + path.string() + " does not exist");
  if (dir) *dir = path.parent_path();
  return read_json_file(path);
}

SpacePtr space_field(const json& j, const Context& ctx) {
  std::filesystem::path dir;
  auto doc = resolve(field(j, "space"), ctx, &dir);
  return space_from_json(doc, Context{dir});
}

PointSet open_of(const FiniteSpace& space, const std::string& key) {
  PointSet s;
  try {
    s = space.parse_key(key);
  } catch (const Error&) {
    throw Error(ErrorKind::CrossReferenceError, "open key " + key + " does not name a set of points");
  }
  if (!space.is_open(s)) throw Error(ErrorKind::CrossReferenceError, "open key " + key + " is not an open set");
  return s;
}

json map_table(const ValueMorphism& m) {
  json out = json::object();
  for (std::size_t i = 0; i < m.source().size(); ++i) out[m.source().element(i)] = m.target().element(m(i));
  return out;
}

ValueMorphism map_from_table(const json& j, const ValueObject& source, const ValueObject& target) {
  if (!j.is_object()) malformed("a map must be an object from element to element");
  std::vector<std::size_t> table(source.size(), 0);
  std::vector<bool> seen(source.size(), false);
  for (const auto& [from, to] : j.items()) {
    auto a = source.find(from);
    auto b = target.find(as_string(to, "map value"));
    if (!a || !b) throw Error(ErrorKind::CrossReferenceError, "map mentions unknown element " + (a ? to.get<std::string>() : from));
    table[*a] = *b;
    seen[*a] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Error(ErrorKind::ValueMismatch, "map is not total on its source");
  return ValueMorphism(source, target, std::move(table));
}

json sections_to_json(const detail::SectionTable& t, const FiniteSpace& space) {
  json out = json::object();
  for (std::size_t i = 0; i < t.size(); ++i) out[space.key_of(t.members[i])] = value_object_to_json(t.sections[i]);
  return out;
}

json restrictions_to_json(const detail::SectionTable& t, const FiniteSpace& space) {
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<json> entries;
  for (std::size_t v = 0; v < t.size(); ++v)
    for (std::size_t u = 0; u < t.size(); ++u) {
      if (u == v || !t.members[u].subset_of(t.members[v])) continue;
      entries.push_back(json{{"from", space.key_of(t.members[v])},
                             {"to", space.key_of(t.members[u])},
                             {"map", map_table(t.restriction(v, u))}});
    }
  std::sort(entries.begin(), entries.end(), [](const json& a, const json& b) {
    return std::pair{a["from"].get<std::string>(), a["to"].get<std::string>()} <
           std::pair{b["from"].get<std::string>(), b["to"].get<std::string>()};
  });
  return json(entries);
}

// Sections keyed by member; members must be exactly `members`.
std::vector<ValueObject> sections_from_json(const json& j, const FiniteSpace& space, const std::vector<PointSet>& members,
                                            Category category) {
  if (!j.is_object()) malformed("`sections` must be an object keyed by open");
  std::vector<std::optional<ValueObject>> objs(members.size());
  for (const auto& [key, value] : j.items()) {
    auto s = open_of(space, key);
    auto it = std::find(members.begin(), members.end(), s);
    if (it == members.end()) throw Error(ErrorKind::CrossReferenceError, "sections given over " + key + " which is not a member");
    objs[static_cast<std::size_t>(it - members.begin())] = value_object_from_json(value, category);
  }
  std::vector<ValueObject> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!objs[i]) throw Error(ErrorKind::CrossReferenceError, "no sections given over " + space.key_of(members[i]));
    out.push_back(*objs[i]);
  }
  return out;
}

RestrictionMap restrictions_from_json(const json& j, const FiniteSpace& space, const std::vector<PointSet>& members,
                                      const std::vector<ValueObject>& objs) {
  RestrictionMap given;
  if (j.is_null()) return given;
  if (!j.is_array()) malformed("`restrictions` must be an array");
  auto slot = [&](const std::string& key) {
    auto s = open_of(space, key);
    auto it = std::find(members.begin(), members.end(), s);
    if (it == members.end()) throw Error(ErrorKind::CrossReferenceError, "restriction mentions non-member " + key);
    return static_cast<std::size_t>(it - members.begin());
  };
  for (const auto& r : j) {
    const auto v = slot(as_string(field(r, "from"), "`from`"));
    const auto u = slot(as_string(field(r, "to"), "`to`"));
    given.emplace(std::pair{members[v], members[u]}, map_from_table(field(r, "map"), objs[v], objs[u]));
  }
  return given;
}

Category category_field(const json& j) {
  try {
    return parse_category(as_string(field(j, "category"), "`category`"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    malformed("unknown category");
  }
}

Presheaf presheaf_field(const json& j, const Context& ctx, const SpacePtr& default_space) {
  std::filesystem::path dir;
  auto doc = resolve(j, ctx, &dir);
  return presheaf_from_json(doc, Context{dir}, default_space);
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::CrossReferenceError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::CrossReferenceError, "cannot write " + path.string());
  out << canonical_dump(j);
}

std::string schema_of(const json& j) { return as_string(field(j, "schema"), "`schema`"); }

// ---------------------------------------------------------------------------

json space_to_json(const FiniteSpace& space) {
  auto sets = [&](const std::vector<PointSet>& v) {
    json arr = json::array();
    for (auto s : v) arr.push_back(space.labels_of(s));
    return arr;
  };
  json j{{"schema", kSpaceSchema}, {"points", space.points()}};
  if (const auto& gens = space.generators()) {
    auto sorted = *gens;
    std::sort(sorted.begin(), sorted.end(), canonical_less);
    j["basis"] = sets(sorted);
  } else {
    j["opens"] = sets(space.opens());
  }
  return j;
}

SpacePtr space_from_json(const json& j, const Context& ctx) {
  if (j.is_string()) {
    std::filesystem::path dir;
    auto doc = resolve(j, ctx, &dir);
    return space_from_json(doc, Context{dir});
  }
  require_schema(j, kSpaceSchema);
  auto points = as_strings(field(j, "points"), "`points`");
  const bool has_opens = j.contains("opens");
  const bool has_basis = j.contains("basis");
  if (has_opens == has_basis) malformed("a space needs exactly one of `opens` and `basis`");
  std::vector<std::vector<std::string>> sets;
  const auto& arr = j.at(has_opens ? "opens" : "basis");
  if (!arr.is_array()) malformed("open families must be arrays");
  for (const auto& s : arr) sets.push_back(as_strings(s, "open set"));
  return has_opens ? FiniteSpace::from_opens(std::move(points), sets) : FiniteSpace::from_basis(std::move(points), sets);
}

json value_object_to_json(const ValueObject& v) {
  if (!v.is_group()) return json(v.elements());
  json table = json::array();
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = 0; b < v.size(); ++b)
      table.push_back(json::array({v.element(a), v.element(b), v.element(v.add(a, b))}));
  return json{{"elements", v.elements()}, {"zero", v.element(v.zero())}, {"table", table}};
}

ValueObject value_object_from_json(const json& j, Category category) {
  if (category == Category::FinSet) {
    auto elements = as_strings(j, "a set");
    auto sorted = elements;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) malformed("set elements must be distinct");
    return ValueObject::set(std::move(elements));
  }
  if (j.is_object() && j.contains("cyclic")) {
    const auto& n = j.at("cyclic");
    if (!n.is_number_unsigned() || n.get<std::size_t>() == 0) malformed("`cyclic` must be a positive integer");
    return ValueObject::cyclic(n.get<std::size_t>());
  }
  auto elements = as_strings(field(j, "elements"), "`elements`");
  const auto& table = field(j, "table");
  if (!table.is_array()) malformed("`table` must be an array of triples");
  std::vector<std::array<std::string, 3>> triples;
  for (const auto& t : table) {
    auto parts = as_strings(t, "a table row");
    if (parts.size() != 3) malformed("table rows are triples [x, y, x+y]");
    triples.push_back({parts[0], parts[1], parts[2]});
  }
  return ValueObject::group(std::move(elements), triples, as_string(field(j, "zero"), "`zero`"));
}

json presheaf_to_json(const Presheaf& p) {
  const auto& space = *p.space();
  return json{{"schema", kPresheafSchema},
              {"space", space_to_json(space)},
              {"category", std::string(to_string(p.category()))},
              {"sections", sections_to_json(p.table(), space)},
              {"restrictions", restrictions_to_json(p.table(), space)}};
}

Presheaf presheaf_from_json(const json& j, const Context& ctx, const SpacePtr& default_space) {
  require_schema(j, kPresheafSchema);
  SpacePtr space = default_space;
  if (j.contains("space")) {
    auto given = space_field(j, ctx);
    if (space && !same_space(space, given))
      throw Error(ErrorKind::CrossReferenceError, "presheaf space does not match the enclosing document");
    if (!space) space = given;
  }
  if (!space) malformed("missing field `space`");
  const auto category = category_field(j);
  auto objs = sections_from_json(field(j, "sections"), *space, space->opens(), category);
  auto given = restrictions_from_json(j.value("restrictions", json()), *space, space->opens(), objs);
  return Presheaf(space, category, std::move(objs), given);
}

json morphism_to_json(const PresheafMorphism& m) {
  const auto& space = *m.source().space();
  json out = json::object();
  for (std::size_t i = 0; i < space.open_count(); ++i) out[space.key_of(space.opens()[i])] = map_table(m.component_at(i));
  return out;
}

PresheafMorphism morphism_from_json(const json& components, const Presheaf& source, const Presheaf& target) {
  const auto& space = *source.space();
  if (!components.is_object()) malformed("morphism components must be an object keyed by open");
  std::vector<std::optional<ValueMorphism>> comps(space.open_count());
  for (const auto& [key, table] : components.items()) {
    const auto i = space.open_index(open_of(space, key));
    comps[i] = map_from_table(table, source.sections_at(i), target.sections_at(i));
  }
  std::vector<ValueMorphism> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (!comps[i]) throw Error(ErrorKind::CrossReferenceError, "no component given over " + space.key_of(space.opens()[i]));
    out.push_back(*comps[i]);
  }
  return PresheafMorphism(source, target, std::move(out));
}

json map_to_json(const ContinuousMap& m) {
  json assignment = json::object();
  for (std::size_t x = 0; x < m.source()->size(); ++x) assignment[m.source()->label(x)] = m.target()->label(m(x));
  return json{{"schema", kMapSchema},
              {"source", space_to_json(*m.source())},
              {"target", space_to_json(*m.target())},
              {"assignment", assignment}};
}

ContinuousMap map_from_json(const json& j, const Context& ctx) {
  require_schema(j, kMapSchema);
  auto source = space_from_json(field(j, "source"), ctx);
  auto target = space_from_json(field(j, "target"), ctx);
  const auto& a = field(j, "assignment");
  if (!a.is_object()) malformed("`assignment` must map source points to target points");
  std::map<std::string, std::string> labels;
  for (const auto& [from, to] : a.items()) labels.emplace(from, as_string(to, "an assigned point"));
  for (const auto& pt : source->points())
    if (!labels.contains(pt)) throw Error(ErrorKind::CrossReferenceError, "no image given for point " + pt);
  try {
    return ContinuousMap::from_labels(source, target, labels);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnknownPoint) throw Error(ErrorKind::CrossReferenceError, e.what());
    throw;
  }
}

json basis_presheaf_to_json(const BasisPresheaf& bp) {
  const auto& space = *bp.space();
  json basis = json::array();
  for (auto m : bp.basis().members()) basis.push_back(space.labels_of(m));
  return json{{"schema", kBasisPresheafSchema},
              {"space", space_to_json(space)},
              {"basis", basis},
              {"category", std::string(to_string(bp.category()))},
              {"sections", sections_to_json(bp.table(), space)},
              {"restrictions", restrictions_to_json(bp.table(), space)}};
}

BasisPresheaf basis_presheaf_from_json(const json& j, const Context& ctx) {
  require_schema(j, kBasisPresheafSchema);
  auto space = space_field(j, ctx);
  const auto& arr = field(j, "basis");
  if (!arr.is_array()) malformed("`basis` must be an array of open sets");
  std::vector<PointSet> members;
  for (const auto& m : arr) {
    auto labels = as_strings(m, "basis member");
    PointSet s;
    try {
      s = space->set_of(labels);
    } catch (const Error& e) {
      throw Error(ErrorKind::CrossReferenceError, e.what());
    }
    members.push_back(s);
  }
  Basis basis(space, members);
  const auto category = category_field(j);
  auto objs = sections_from_json(field(j, "sections"), *space, basis.members(), category);
  auto given = restrictions_from_json(j.value("restrictions", json()), *space, basis.members(), objs);
  return BasisPresheaf(basis, category, std::move(objs), given);
}

json gluing_to_json(const GluingDatum& d) {
  const auto& space = *d.space;
  json covering = json::object();
  json parts = json::object();
  for (std::size_t l = 0; l < d.size(); ++l) {
    covering[d.labels[l]] = space.labels_of(d.covering[l]);
    parts[d.labels[l]] = presheaf_to_json(d.parts[l]);
  }
  json cocycle = json::array();
  std::vector<std::pair<std::pair<std::string, std::string>, json>> entries;
  for (const auto& [key, theta] : d.cocycle)
    entries.emplace_back(std::pair{d.labels[key.first], d.labels[key.second]}, morphism_to_json(theta));
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, comps] : entries)
    cocycle.push_back(json{{"pair", json::array({key.first, key.second})}, {"components", comps}});
  return json{{"schema", kGluingSchema},
              {"space", space_to_json(space)},
              {"covering", covering},
              {"parts", parts},
              {"cocycle", cocycle}};
}

GluingDatum gluing_from_json(const json& j, const Context& ctx) {
  require_schema(j, kGluingSchema);
  GluingDatum d;
  d.space = space_field(j, ctx);
  const auto& covering = field(j, "covering");
  const auto& parts = field(j, "parts");
  if (!covering.is_object() || !parts.is_object()) malformed("`covering` and `parts` must be objects keyed by label");
  for (const auto& [label, members] : covering.items()) {
    d.labels.push_back(label);
    PointSet u;
    try {
      u = d.space->set_of(as_strings(members, "covering member"));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError) throw;
      throw Error(ErrorKind::CrossReferenceError, e.what());
    }
    d.covering.push_back(u);
    if (!parts.contains(label)) throw Error(ErrorKind::CrossReferenceError, "no part given for " + label);
    d.parts.push_back(presheaf_field(parts.at(label), ctx, d.space->subspace(u)));
  }
  for (const auto& [label, part] : parts.items())
    if (!covering.contains(label)) throw Error(ErrorKind::CrossReferenceError, "part " + label + " has no covering member");
  auto index = [&](const json& label) {
    auto name = as_string(label, "a covering label");
    auto it = std::find(d.labels.begin(), d.labels.end(), name);
    if (it == d.labels.end()) throw Error(ErrorKind::CrossReferenceError, "unknown covering label " + name);
    return static_cast<std::size_t>(it - d.labels.begin());
  };
  const auto& cocycle = j.value("cocycle", json::array());
  if (!cocycle.is_array()) malformed("`cocycle` must be an array");
  for (const auto& entry : cocycle) {
    const auto& pair = field(entry, "pair");
    if (!pair.is_array() || pair.size() != 2) malformed("`pair` must name two covering labels");
    const auto l = index(pair[0]);
    const auto m = index(pair[1]);
    const auto ov = d.covering[l] & d.covering[m];
    auto theta = morphism_from_json(field(entry, "components"), d.part_on(m, ov), d.part_on(l, ov));
    if (!d.cocycle.emplace(std::pair{l, m}, theta).second) malformed("cocycle pair listed twice");
  }
  return d;
}

json sheaf_diagram_to_json(const SheafDiagram& d, const SpacePtr& space) {
  json nodes = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) nodes.push_back(json{{"name", d.names[i]}, {"sheaf", presheaf_to_json(d.sheaves[i])}});
  json order = json::array();
  for (std::size_t a = 0; a < d.size(); ++a)
    for (std::size_t b = 0; b < d.size(); ++b)
      if (a != b && d.leq[a][b]) order.push_back(json::array({d.names[a], d.names[b]}));
  json arrows = json::array();
  for (const auto& [key, m] : d.arrows)
    arrows.push_back(json{{"from", d.names[key.second]}, {"to", d.names[key.first]}, {"components", morphism_to_json(m)}});
  return json{{"schema", kSheafDiagramSchema},
              {"space", space_to_json(*space)},
              {"nodes", nodes},
              {"order", order},
              {"arrows", arrows}};
}

SheafDiagram sheaf_diagram_from_json(const json& j, const Context& ctx) {
  require_schema(j, kSheafDiagramSchema);
  auto space = space_field(j, ctx);
  SheafDiagram d;
  const auto& nodes = field(j, "nodes");
  if (!nodes.is_array()) malformed("`nodes` must be an array");
  for (const auto& node : nodes) {
    auto name = as_string(field(node, "name"), "a node name");
    if (std::find(d.names.begin(), d.names.end(), name) != d.names.end()) malformed("node " + name + " listed twice");
    d.names.push_back(name);
    d.sheaves.push_back(presheaf_field(field(node, "sheaf"), ctx, space));
  }
  auto index = [&](const json& label) {
    auto name = as_string(label, "a node name");
    auto it = std::find(d.names.begin(), d.names.end(), name);
    if (it == d.names.end()) throw Error(ErrorKind::CrossReferenceError, "unknown node " + name);
    return static_cast<std::size_t>(it - d.names.begin());
  };
  d.leq.assign(d.size(), std::vector<bool>(d.size(), false));
  for (std::size_t i = 0; i < d.size(); ++i) d.leq[i][i] = true;
  const auto& order = j.value("order", json::array());
  if (!order.is_array()) malformed("`order` must be an array of pairs");
  for (const auto& pair : order) {
    if (!pair.is_array() || pair.size() != 2) malformed("order entries are pairs [smaller, larger]");
    d.leq[index(pair[0])][index(pair[1])] = true;
  }
  const auto& arrows = j.value("arrows", json::array());
  if (!arrows.is_array()) malformed("`arrows` must be an array");
  for (const auto& a : arrows) {
    const auto from = index(field(a, "from"));
    const auto to = index(field(a, "to"));
    auto m = morphism_from_json(field(a, "components"), d.sheaves[from], d.sheaves[to]);
    if (!d.arrows.emplace(std::pair{to, from}, m).second) malformed("arrow listed twice");
  }
  return d;
}

}  // namespace finsheaf::io
