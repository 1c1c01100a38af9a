// finsheaf: command-line front end over the finsheaf library.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "finsheaf/error.hpp"
#include "finsheaf/functors.hpp"
#include "finsheaf/gluing.hpp"
#include "finsheaf/io.hpp"
#include "finsheaf/simple.hpp"
#include "finsheaf/stalks.hpp"

using namespace finsheaf;
using io::json;

namespace {

struct Options {
  std::string format = "json";
  std::string out;
  std::size_t max_coverings = kUnlimited;
  std::size_t max_homs = kDefaultHomCap;
  bool timing = false;
};

// What a verb hands back: an optional verdict, a payload, witnesses, and the
// constructed document written by --out.
struct Outcome {
  std::optional<bool> verdict;
  json payload = json::object();
  json witnesses = json::array();
  std::optional<json> artifact;
};

std::size_t env_cap(const char* name, std::size_t fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  try {
    std::size_t used = 0;
    auto v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(name);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, std::string(name) + " must be a non-negative integer");
  }
}

json keys_of(const FiniteSpace& space, const std::vector<PointSet>& sets) {
  json out = json::array();
  for (auto s : sets) out.push_back(space.key_of(s));
  return out;
}

json table_of(const ValueMorphism& m) {
  json out = json::object();
  for (std::size_t i = 0; i < m.source().size(); ++i) out[m.source().element(i)] = m.target().element(m(i));
  return out;
}

json section_counts(const Presheaf& p) {
  json out = json::object();
  for (std::size_t i = 0; i < p.space()->open_count(); ++i)
    out[p.space()->key_of(p.space()->opens()[i])] = p.sections_at(i).size();
  return out;
}

json failure_json(const FiniteSpace& space, const SheafFailure& f) {
  return json{{"open", space.key_of(f.open)},
              {"covering", keys_of(space, f.covering.parts)},
              {"kind", std::string(to_string(f.kind))},
              {"family", f.witness}};
}

json sheaf_summary(const Presheaf& p) {
  return json{{"global_sections", p.sections(p.space()->all()).size()},
              {"section_counts", section_counts(p)},
              {"is_sheaf", is_sheaf(p)}};
}

Presheaf load_presheaf(const std::string& path) { return io::load<Presheaf>(path, [](const json& j, const io::Context& c) { return io::presheaf_from_json(j, c); }); }
ContinuousMap load_map(const std::string& path) { return io::load<ContinuousMap>(path, [](const json& j, const io::Context& c) { return io::map_from_json(j, c); }); }

// ---------------------------------------------------------------------------

Outcome validate(const std::string& path) {
  auto doc = io::read_json_file(path);
  io::Context ctx{std::filesystem::path(path).parent_path().empty() ? "." : std::filesystem::path(path).parent_path()};
  const auto schema = io::schema_of(doc);
  Outcome o;
  o.payload["schema"] = schema;
  if (schema == io::kSpaceSchema) {
    auto s = io::space_from_json(doc, ctx);
    o.payload["points"] = s->points();
    o.payload["opens"] = keys_of(*s, s->opens());
    o.payload["irreducible"] = s->is_irreducible();
    o.verdict = true;
  } else if (schema == io::kPresheafSchema) {
    auto p = io::presheaf_from_json(doc, ctx);
    const auto& space = *p.space();
    for (const auto& v : functoriality_violations(p))
      o.witnesses.push_back(json{{"kind", v.kind == FunctorialityViolation::Kind::Identity ? "identity" : "composite"},
                                 {"larger", space.key_of(v.larger)},
                                 {"middle", space.key_of(v.middle)},
                                 {"smaller", space.key_of(v.smaller)}});
    o.payload["category"] = std::string(to_string(p.category()));
    o.payload["section_counts"] = section_counts(p);
    o.verdict = o.witnesses.empty();
  } else if (schema == io::kMapSchema) {
    auto m = io::map_from_json(doc, ctx);
    for (auto v : m.target()->opens())
      if (!m.source()->is_open(m.preimage(v)))
        o.witnesses.push_back(json{{"open", m.target()->key_of(v)}, {"preimage", m.source()->key_of(m.preimage(v))}});
    o.verdict = o.witnesses.empty();
  } else if (schema == io::kBasisPresheafSchema) {
    auto bp = io::basis_presheaf_from_json(doc, ctx);
    o.payload["basis"] = keys_of(*bp.space(), bp.basis().members());
    o.verdict = bp.is_functorial();
  } else if (schema == io::kGluingSchema) {
    auto d = io::gluing_from_json(doc, ctx);
    auto report = check_cocycle(d);
    for (const auto& v : report.violations)
      o.witnesses.push_back(json{{"diagonal", v.diagonal},
                                 {"labels", json::array({d.labels[v.lambda], d.labels[v.mu], d.labels[v.nu]})}});
    o.payload["labels"] = d.labels;
    o.verdict = report.verdict;
  } else if (schema == io::kSheafDiagramSchema) {
    auto d = io::sheaf_diagram_from_json(doc, ctx);
    d.validate();
    o.payload["nodes"] = d.names;
    o.verdict = true;
  } else {
    throw Error(ErrorKind::ParseError, "unknown schema " + schema);
  }
  return o;
}

Outcome check_sheaf_verb(const std::string& path, const Options& opt) {
  auto p = load_presheaf(path);
  auto report = check_sheaf(p, SheafCheckOptions{opt.max_coverings});
  Outcome o;
  o.verdict = report.verdict;
  for (const auto& f : report.failures) o.witnesses.push_back(failure_json(*p.space(), f));
  return o;
}

Outcome check_f0_verb(const std::string& path) {
  auto bp = io::load<BasisPresheaf>(path, [](const json& j, const io::Context& c) { return io::basis_presheaf_from_json(j, c); });
  auto report = check_F0(bp);
  Outcome o;
  o.verdict = report.verdict;
  for (const auto& f : report.failures) o.witnesses.push_back(failure_json(*bp.space(), f));
  return o;
}

Outcome extend_basis_verb(const std::string& path) {
  auto bp = io::load<BasisPresheaf>(path, [](const json& j, const io::Context& c) { return io::basis_presheaf_from_json(j, c); });
  auto ext = extend_from_basis(bp);
  Outcome o;
  json can = json::object();
  bool bijective = true;
  for (auto v : bp.basis().members()) {
    auto m = ext.can(v);
    bijective = bijective && m.is_bijective();
    can[bp.space()->key_of(v)] = table_of(m);
  }
  o.payload["f0"] = check_F0(bp).verdict;
  o.payload["can"] = can;
  o.payload["can_bijective"] = bijective;
  o.payload["sheaf"] = sheaf_summary(ext.sheaf);
  o.artifact = io::presheaf_to_json(ext.sheaf);
  return o;
}

Outcome stalk_verb(const std::string& path, const std::string& point) {
  auto p = load_presheaf(path);
  auto st = stalk(p, point);
  Outcome o;
  json canonical = json::object();
  for (std::size_t i = 0; i < st.neighborhoods.size(); ++i)
    canonical[p.space()->key_of(st.neighborhoods[i])] = table_of(st.canonical[i]);
  o.payload["point"] = point;
  o.payload["minimal_open"] = p.space()->key_of(p.space()->minimal_open(st.point));
  o.payload["stalk"] = io::value_object_to_json(st.object);
  o.payload["canonical"] = canonical;
  return o;
}

Outcome support_verb(const std::string& path) {
  auto p = load_presheaf(path);
  auto s = support(p);
  Outcome o;
  o.payload["support"] = p.space()->labels_of(s);
  o.payload["closed"] = p.space()->closure(s) == s;
  return o;
}

Outcome pushforward_verb(const std::string& map_path, const std::string& path) {
  auto psi = load_map(map_path);
  auto f = load_presheaf(path);
  if (!same_space(psi.source(), f.space()))
    throw Error(ErrorKind::CrossReferenceError, "the presheaf does not live on the source of the map");
  auto pushed = pushforward(psi, f);
  Outcome o;
  o.payload["sheaf"] = sheaf_summary(pushed);
  o.artifact = io::presheaf_to_json(pushed);
  return o;
}

Outcome pullback_verb(const std::string& map_path, const std::string& path) {
  auto psi = load_map(map_path);
  auto g = load_presheaf(path);
  if (!same_space(psi.target(), g.space()))
    throw Error(ErrorKind::CrossReferenceError, "the presheaf does not live on the target of the map");
  auto inv = pullback(psi, g);
  Outcome o;
  o.payload["sheaf"] = sheaf_summary(inv.sheaf);
  o.payload["unit"] = io::morphism_to_json(inv.unit);
  o.artifact = io::presheaf_to_json(inv.sheaf);
  return o;
}

Outcome sheafify_verb(const std::string& path) {
  auto g = load_presheaf(path);
  auto inv = sheafify(g);
  Outcome o;
  o.payload["sheaf"] = sheaf_summary(inv.sheaf);
  o.payload["unit"] = io::morphism_to_json(inv.unit);
  o.payload["unit_iso"] = inv.unit.is_isomorphism();
  json stalks = json::object();
  for (std::size_t x = 0; x < g.space()->size(); ++x)
    stalks[g.space()->label(x)] = stalk_of_morphism(inv.unit, x).is_bijective();
  o.payload["stalk_bijective"] = stalks;
  o.artifact = io::presheaf_to_json(inv.sheaf);
  return o;
}

Outcome adjunction_verb(const std::string& map_path, const std::string& g_path, const std::string& f_path,
                        const Options& opt) {
  auto psi = load_map(map_path);
  auto g = load_presheaf(g_path);
  auto f = load_presheaf(f_path);
  if (!same_space(psi.target(), g.space()) || !same_space(psi.source(), f.space()))
    throw Error(ErrorKind::CrossReferenceError, "G must live on the target and F on the source of the map");
  auto inv = pullback(psi, g);
  auto w = check_adjunction(inv, f, opt.max_homs);
  Outcome o;
  json sheaf_side = json::array();
  for (const auto& m : w.sheaf_side) sheaf_side.push_back(io::morphism_to_json(m));
  json psi_side = json::array();
  for (const auto& m : w.psi_side) psi_side.push_back(io::morphism_to_json(m.body));
  o.payload["sheaf_side"] = sheaf_side;
  o.payload["psi_side"] = psi_side;
  o.payload["flat"] = w.forward;
  o.payload["sharp"] = w.backward;
  o.payload["sizes"] = json::array({w.sheaf_side.size(), w.psi_side.size()});
  o.verdict = w.bijective;
  if (!w.bijective) {
    for (std::size_t i = 0; i < w.forward.size(); ++i)
      if (w.forward[i] >= w.backward.size() || w.backward[w.forward[i]] != i)
        o.witnesses.push_back(json{{"side", "sheaf"}, {"index", i}});
    for (std::size_t i = 0; i < w.backward.size(); ++i)
      if (w.backward[i] >= w.forward.size() || w.forward[w.backward[i]] != i)
        o.witnesses.push_back(json{{"side", "psi"}, {"index", i}});
  }
  return o;
}

Outcome glue_verb(const std::string& path) {
  auto d = io::load<GluingDatum>(path, [](const json& j, const io::Context& c) { return io::gluing_from_json(j, c); });
  Outcome o;
  auto report = check_cocycle(d);
  if (!report.verdict) {
    o.verdict = false;
    for (const auto& v : report.violations)
      o.witnesses.push_back(json{{"diagonal", v.diagonal},
                                 {"labels", json::array({d.labels[v.lambda], d.labels[v.mu], d.labels[v.nu]})}});
    return o;
  }
  auto g = glue(d);
  json isos = json::object();
  for (std::size_t l = 0; l < d.size(); ++l) isos[d.labels[l]] = io::morphism_to_json(g.isos[l]);
  o.payload["sheaf"] = sheaf_summary(g.sheaf);
  o.payload["isos"] = isos;
  o.payload["satisfies_gluing"] = satisfies_gluing(d, g);
  o.artifact = io::presheaf_to_json(g.sheaf);
  return o;
}

Outcome limit_verb(const std::string& path) {
  auto d = io::load<SheafDiagram>(path, [](const json& j, const io::Context& c) { return io::sheaf_diagram_from_json(j, c); });
  auto lim = limit_of_sheaves(d);
  Outcome o;
  json projections = json::object();
  for (std::size_t i = 0; i < d.size(); ++i) projections[d.names[i]] = io::morphism_to_json(lim.projections[i]);
  o.payload["sheaf"] = sheaf_summary(lim.sheaf);
  o.payload["projections"] = projections;
  o.artifact = io::presheaf_to_json(lim.sheaf);
  return o;
}

Outcome simple_verb(const std::string& path, const Options& opt) {
  auto p = load_presheaf(path);
  auto r = check_simple_equivalence(p, opt.max_homs);
  Outcome o;
  o.payload["constant"] = r.constant;
  o.payload["simple"] = r.simple;
  o.payload["locally_simple"] = r.locally_simple;
  o.payload["sheaf"] = r.sheaf;
  o.payload["unit_iso"] = r.unit_iso;
  o.payload["a_implies_b"] = r.a_implies_b();
  o.payload["c_implies_a"] = r.c_implies_a();
  json nb = json::object();
  for (std::size_t x = 0; x < r.simple_neighborhoods.size(); ++x)
    nb[p.space()->label(x)] = r.simple_neighborhoods[x] ? json(p.space()->key_of(*r.simple_neighborhoods[x])) : json();
  o.payload["simple_neighborhoods"] = nb;
  o.verdict = r.equivalent();
  if (!r.a_implies_b())
    for (const auto& f : check_sheaf(p).failures) o.witnesses.push_back(failure_json(*p.space(), f));
  return o;
}

// ---------------------------------------------------------------------------

void render_text(const json& j, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_structured() && !v.empty()) {
        out << pad << k << ":\n";
        render_text(v, out, indent + 1);
      } else {
        out << pad << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (v.is_structured() && !v.empty()) {
        out << pad << "-\n";
        render_text(v, out, indent + 1);
      } else {
        out << pad << "- " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
      }
    }
  } else {
    out << pad << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

void emit(const json& report, const Options& opt) {
  if (opt.format == "text")
    render_text(report, std::cout, 0);
  else
    std::cout << io::canonical_dump(report);
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  std::string verb;
  CLI::App app{"Finite sheaf toolkit: check, construct and compare sheaves on finite spaces."};
  app.set_version_flag("--version", "finsheaf 1.0");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--out", opt.out, "Write the constructed sheaf (or the report) to this path");
  auto* cov = app.add_option("--max-coverings", opt.max_coverings, "Covering enumeration cap");
  auto* homs = app.add_option("--max-homs", opt.max_homs, "Hom-set enumeration cap");
  app.add_flag("--timing", opt.timing, "Include elapsed time in the report");

  std::string a, b, c, point;
  std::function<Outcome()> run;
  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&verb, name] { verb = name; });
    return s;
  };
  auto one = [&](const char* name, const char* help, const char* what, auto fn) {
    auto* s = sub(name, help);
    s->add_option(what, a)->required();
    s->parse_complete_callback([&, fn] { run = [&, fn] { return fn(); }; });
    return s;
  };

  one("validate", "Parse a file of any schema and check its structure", "file", [&] { return validate(a); });
  one("check-sheaf", "Check the sheaf axioms, reporting failing coverings", "presheaf",
      [&] { return check_sheaf_verb(a, opt); });
  one("check-f0", "Check condition (F0) on a basis presheaf", "basis-presheaf", [&] { return check_f0_verb(a); });
  one("extend-basis", "Extend a basis presheaf to a sheaf by limits", "basis-presheaf",
      [&] { return extend_basis_verb(a); });
  one("support", "Support of an abelian-group-valued presheaf", "presheaf", [&] { return support_verb(a); });
  one("sheafify", "Associated sheaf with its unit", "presheaf", [&] { return sheafify_verb(a); });
  one("glue", "Glue sheaves along a cocycle", "gluing", [&] { return glue_verb(a); });
  one("limit", "Projective limit of a diagram of sheaves", "sheaf-diagram", [&] { return limit_verb(a); });
  one("simple-check", "Constant, simple and locally simple on an irreducible space", "presheaf",
      [&] { return simple_verb(a, opt); });

  auto* st = one("stalk", "Stalk at a point with its canonical maps", "presheaf", [&] { return stalk_verb(a, point); });
  st->add_option("--point", point, "Point label")->required();

  for (const char* name : {"pushforward", "pullback"}) {
    auto* s = sub(name, name == std::string("pushforward") ? "Direct image along a map" : "Inverse image along a map");
    s->add_option("map", a)->required();
    s->add_option("presheaf", b)->required();
    const bool push = name == std::string("pushforward");
    s->parse_complete_callback([&, push] {
      run = [&, push] { return push ? pushforward_verb(a, b) : pullback_verb(a, b); };
    });
  }
  auto* adj = sub("adjunction-test", "Enumerate both Hom-sets of the adjunction and compare");
  adj->add_option("map", a)->required();
  adj->add_option("G", b, "Presheaf on the target")->required();
  adj->add_option("F", c, "Sheaf on the source")->required();
  adj->parse_complete_callback([&] { run = [&] { return adjunction_verb(a, b, c, opt); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  json report{{"verb", verb}};
  int code = 0;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (cov->count() == 0) opt.max_coverings = env_cap("FINSHEAF_MAX_COVERINGS", kUnlimited);
    if (homs->count() == 0) opt.max_homs = env_cap("FINSHEAF_MAX_HOMS", kDefaultHomCap);
    auto o = run();
    if (o.verdict) report["verdict"] = *o.verdict;
    report["payload"] = o.payload;
    report["witnesses"] = o.witnesses;
    code = o.verdict.value_or(true) ? 0 : 1;
    if (!opt.out.empty()) io::write_json_file(opt.out, o.artifact ? *o.artifact : report);
  } catch (const Error& e) {
    report["error"] = json{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
    std::cerr << "finsheaf: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    report["error"] = json{{"kind", "ParseError"}, {"message", e.what()}};
    std::cerr << "finsheaf: " << e.what() << "\n";
    code = 2;
  }
  if (opt.timing) {
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    report["timing"] = json{{"elapsed_ms", elapsed.count()}};
  }
  emit(report, opt);
  return code;
}
