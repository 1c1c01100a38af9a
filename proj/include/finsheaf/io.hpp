#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "finsheaf/gluing.hpp"
#include "finsheaf/presheaf.hpp"
#include "json.hpp"

namespace finsheaf::io {

using json = nlohmann::json;

inline constexpr const char* kSpaceSchema = "finsheaf.space/1";
inline constexpr const char* kPresheafSchema = "finsheaf.presheaf/1";
inline constexpr const char* kMapSchema = "finsheaf.map/1";
inline constexpr const char* kBasisPresheafSchema = "finsheaf.basis-presheaf/1";
inline constexpr const char* kGluingSchema = "finsheaf.gluing/1";
inline constexpr const char* kSheafDiagramSchema = "finsheaf.sheaf-diagram/1";

/// Resolves "space"/"sheaf"/part references given as file paths, relative to
/// the directory of the referencing document.
struct Context {
  std::filesystem::path base_dir = ".";
};

/// Throws ParseError (unreadable or malformed) or CrossReferenceError (missing file).
json read_json_file(const std::filesystem::path& path);
/// Sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const json& j);
void write_json_file(const std::filesystem::path& path, const json& j);
/// The `schema` field. Throws ParseError when absent.
std::string schema_of(const json& j);

json space_to_json(const FiniteSpace& space);
SpacePtr space_from_json(const json& j, const Context& ctx = {});

json value_object_to_json(const ValueObject& v);
ValueObject value_object_from_json(const json& j, Category category);

json presheaf_to_json(const Presheaf& p);
/// `default_space` is used when the document has no `space`; when both are
/// present they must agree (CrossReferenceError).
Presheaf presheaf_from_json(const json& j, const Context& ctx = {}, const SpacePtr& default_space = nullptr);

/// {open-key: {element: element}} over every open.
json morphism_to_json(const PresheafMorphism& m);
PresheafMorphism morphism_from_json(const json& components, const Presheaf& source, const Presheaf& target);

json map_to_json(const ContinuousMap& m);
ContinuousMap map_from_json(const json& j, const Context& ctx = {});

json basis_presheaf_to_json(const BasisPresheaf& bp);
BasisPresheaf basis_presheaf_from_json(const json& j, const Context& ctx = {});

json gluing_to_json(const GluingDatum& d);
GluingDatum gluing_from_json(const json& j, const Context& ctx = {});

json sheaf_diagram_to_json(const SheafDiagram& d, const SpacePtr& space);
SheafDiagram sheaf_diagram_from_json(const json& j, const Context& ctx = {});

/// Loads a document from disk with references resolved next to it.
template <class T, class F>
T load(const std::filesystem::path& path, F&& parse) {
  return parse(read_json_file(path), Context{path.parent_path().empty() ? "." : path.parent_path()});
}

}  // namespace finsheaf::io
