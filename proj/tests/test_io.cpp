#include <fstream>

#include "doctest.h"
#include "finsheaf/error.hpp"
#include "finsheaf/io.hpp"
#include "shipped.hpp"

using namespace finsheaf;
using io::json;

namespace {

const std::filesystem::path kDir = FINSHEAF_FIXTURE_DIR;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ParseError;
}

json inline_space(json doc) {
  if (doc.contains("space") && doc["space"].is_string()) doc["space"] = io::read_json_file(kDir / doc["space"].get<std::string>());
  return doc;
}

// Parse, re-serialize.
json reparse(const json& doc) {
  io::Context ctx{kDir};
  const auto schema = io::schema_of(doc);
  if (schema == io::kSpaceSchema) return io::space_to_json(*io::space_from_json(doc, ctx));
  if (schema == io::kPresheafSchema) return io::presheaf_to_json(io::presheaf_from_json(doc, ctx));
  if (schema == io::kMapSchema) return io::map_to_json(io::map_from_json(doc, ctx));
  if (schema == io::kBasisPresheafSchema) return io::basis_presheaf_to_json(io::basis_presheaf_from_json(doc, ctx));
  if (schema == io::kGluingSchema) return io::gluing_to_json(io::gluing_from_json(doc, ctx));
  return io::sheaf_diagram_to_json(io::sheaf_diagram_from_json(doc, ctx), io::space_from_json(doc["space"], ctx));
}

json disc2_doc() { return io::read_json_file(kDir / "disc2_g2_failure.presheaf.json"); }

}  // namespace

TEST_CASE("shipped fixtures match their generator") {
  for (const auto& [name, doc] : fixtures::shipped_documents()) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(kDir / name));
    std::ifstream in(kDir / name, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text == io::canonical_dump(doc));
  }
}

TEST_CASE("every shipped document survives a round trip") {
  for (const auto& [name, doc] : fixtures::shipped_documents()) {
    CAPTURE(name);
    auto again = reparse(doc);
    CHECK(again == inline_space(doc));
    CHECK(reparse(again) == again);
  }
}

TEST_CASE("round trips preserve the objects") {
  auto p = fixtures::pc4();
  std::vector<Presheaf> pool{fixtures::disc2_g2_failure(), fixtures::sierp_two_to_one(), fixtures::sierp_skyscraper(),
                             fixtures::function_sheaf(p, ValueObject::cyclic(3), true),
                             fixtures::constant_presheaf(fixtures::disc2(), ValueObject::set({"p", "q"}),
                                                         ValueObject::set({"e", "f"}))};
  for (const auto& f : pool) {
    auto back = io::presheaf_from_json(io::presheaf_to_json(f));
    CHECK(back == f);
    CHECK(same_space(back.space(), f.space()));
    auto id = PresheafMorphism::identity(f);
    CHECK(io::morphism_from_json(io::morphism_to_json(id), back, f) == PresheafMorphism(back, f, id.components()));
  }
  auto m = fixtures::pc4_to_sierp();
  auto mb = io::map_from_json(io::map_to_json(m));
  CHECK(mb.assignment() == m.assignment());
  CHECK(same_space(mb.source(), m.source()));

  // Spaces without recorded generators are written by their opens.
  for (const auto& s : fixtures::all_topologies(3)) {
    auto j = io::space_to_json(*s);
    CHECK(j.contains("opens") != j.contains("basis"));
    CHECK(*io::space_from_json(j) == *s);
  }

  auto d = fixtures::pc4_gluing(true);
  auto db = io::gluing_from_json(io::gluing_to_json(d));
  CHECK(db.labels == d.labels);
  CHECK(db.covering == d.covering);
  CHECK(db.cocycle.size() == d.cocycle.size());
  for (std::size_t l = 0; l < d.size(); ++l) CHECK(db.parts[l] == d.parts[l]);
}

TEST_CASE("only adjacent restrictions need to be given") {
  auto doc = disc2_doc();
  json kept = json::array();
  for (const auto& r : doc["restrictions"])
    if (!(r["from"] == "{1,2}" && r["to"] == "{}")) kept.push_back(r);
  REQUIRE(kept.size() + 1 == doc["restrictions"].size());
  doc["restrictions"] = kept;
  CHECK(io::presheaf_from_json(doc, io::Context{kDir}) == fixtures::disc2_g2_failure());
}

TEST_CASE("malformed and dangling input") {
  io::Context ctx{kDir};
  auto doc = disc2_doc();

  auto bad_key = doc;
  bad_key["sections"]["{3}"] = json::array({"z"});
  CHECK(kind_of([&] { io::presheaf_from_json(bad_key, ctx); }) == ErrorKind::CrossReferenceError);

  auto not_open = io::read_json_file(kDir / "sierp_two_to_one.presheaf.json");
  not_open["sections"]["{0}"] = json::array({"z"});
  CHECK(kind_of([&] { io::presheaf_from_json(not_open, ctx); }) == ErrorKind::CrossReferenceError);

  auto missing_open = doc;
  missing_open["sections"].erase("{2}");
  CHECK(kind_of([&] { io::presheaf_from_json(missing_open, ctx); }) == ErrorKind::CrossReferenceError);

  auto unknown_element = doc;
  unknown_element["restrictions"][0]["map"]["nope"] = "a";
  CHECK(kind_of([&] { io::presheaf_from_json(unknown_element, ctx); }) == ErrorKind::CrossReferenceError);

  auto dangling = doc;
  dangling["space"] = "no-such-space.json";
  CHECK(kind_of([&] { io::presheaf_from_json(dangling, ctx); }) == ErrorKind::CrossReferenceError);

  auto no_category = doc;
  no_category.erase("category");
  CHECK(kind_of([&] { io::presheaf_from_json(no_category, ctx); }) == ErrorKind::ParseError);

  auto wrong_schema = doc;
  wrong_schema["schema"] = io::kMapSchema;
  CHECK(kind_of([&] { io::presheaf_from_json(wrong_schema, ctx); }) == ErrorKind::ParseError);

  CHECK(kind_of([&] { io::presheaf_from_json(doc, ctx, fixtures::sierp()); }) == ErrorKind::CrossReferenceError);

  json not_topology{{"schema", io::kSpaceSchema}, {"points", {"a", "b"}}, {"opens", {json::array(), {"a"}, {"b"}, {"a", "b"}, {"a"}}}};
  CHECK_NOTHROW(io::space_from_json(not_topology));
  not_topology["opens"] = {json::array(), {"a"}, {"b"}};
  CHECK(kind_of([&] { io::space_from_json(not_topology); }) == ErrorKind::ParseError);

  auto map = io::read_json_file(kDir / "pc4_to_sierp.map.json");
  map["assignment"]["a"] = "7";
  CHECK(kind_of([&] { io::map_from_json(map, ctx); }) == ErrorKind::CrossReferenceError);
  map["assignment"].erase("a");
  CHECK(kind_of([&] { io::map_from_json(map, ctx); }) == ErrorKind::CrossReferenceError);

  auto glue = io::read_json_file(kDir / "pc4_twisted.gluing.json");
  glue["cocycle"][0]["pair"][0] = "Z";
  CHECK(kind_of([&] { io::gluing_from_json(glue, ctx); }) == ErrorKind::CrossReferenceError);

  auto garbage = std::filesystem::temp_directory_path() / "finsheaf_garbage.json";
  {
    std::ofstream out(garbage);
    out << "{ not json";
  }
  CHECK(kind_of([&] { io::read_json_file(garbage); }) == ErrorKind::ParseError);
  std::filesystem::remove(garbage);
}

TEST_CASE("gluing parts given by path take the subspace") {
  auto dir = std::filesystem::temp_directory_path() / "finsheaf_parts";
  std::filesystem::create_directories(dir);
  auto doc = io::gluing_to_json(fixtures::pc4_gluing(true));
  for (auto& [label, part] : doc["parts"].items()) {
    part.erase("space");
    io::write_json_file(dir / (label + ".json"), part);
    part = label + ".json";
  }
  auto d = io::gluing_from_json(doc, io::Context{dir});
  auto original = fixtures::pc4_gluing(true);
  for (std::size_t l = 0; l < d.size(); ++l) CHECK(d.parts[l] == original.parts[l]);
  CHECK(glue(d).sheaf.sections(d.space->all()).size() == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("canonical dumps are stable") {
  auto j = io::presheaf_to_json(fixtures::function_sheaf(fixtures::pc4(), ValueObject::cyclic(2), true));
  CHECK(io::canonical_dump(j) == io::canonical_dump(json::parse(io::canonical_dump(j))));
  CHECK(io::canonical_dump(j).back() == '\n');
}
