#include "finsheaf/labels.hpp"

#include "finsheaf/error.hpp"

namespace finsheaf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::GeneratorsDoNotCover: return "GeneratorsDoNotCover";
    case ErrorKind::UnknownPoint: return "UnknownPoint";
    case ErrorKind::NotAnOpen: return "NotAnOpen";
    case ErrorKind::MixedCategories: return "MixedCategories";
    case ErrorKind::MalformedDiagram: return "MalformedDiagram";
    case ErrorKind::NotFiltered: return "NotFiltered";
    case ErrorKind::IncompatibleCone: return "IncompatibleCone";
    case ErrorKind::ValueMismatch: return "ValueMismatch";
    case ErrorKind::IncompatibleFamily: return "IncompatibleFamily";
    case ErrorKind::WrongCategory: return "WrongCategory";
    case ErrorKind::NotASection: return "NotASection";
    case ErrorKind::NotContinuous: return "NotContinuous";
    case ErrorKind::NotASheaf: return "NotASheaf";
    case ErrorKind::NotInverseImagePair: return "NotInverseImagePair";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::CocycleViolation: return "CocycleViolation";
    case ErrorKind::NotAGluing: return "NotAGluing";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::CrossReferenceError: return "CrossReferenceError";
  }
  return "Unknown";
}

std::string escape_label(std::string_view raw, std::string_view specials) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == '\\' || specials.find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

namespace {

std::string join_escaped(std::span<const std::string> parts, std::string_view specials, char open,
                         char close) {
  std::string out(1, open);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += escape_label(parts[i], specials);
  }
  out.push_back(close);
  return out;
}

}  // namespace

std::string tuple_label(std::span<const std::string> parts) {
  return join_escaped(parts, ",()", '(', ')');
}

std::string set_key(std::span<const std::string> sorted_members) {
  return join_escaped(sorted_members, ",{}", '{', '}');
}

std::vector<std::string> parse_set_key(std::string_view key) {
  if (key.size() < 2 || key.front() != '{' || key.back() != '}')
    throw Error(ErrorKind::ParseError, "open key must be of the form {a,b,...}: " + std::string(key));
  std::vector<std::string> members;
  std::string_view body = key.substr(1, key.size() - 2);
  if (body.empty()) return members;
  std::string current;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '\\') {
      if (i + 1 == body.size())
        throw Error(ErrorKind::ParseError, "dangling escape in open key " + std::string(key));
      current.push_back(body[++i]);
    } else if (c == ',') {
      members.push_back(std::move(current));
      current.clear();
    } else if (c == '{' || c == '}') {
      throw Error(ErrorKind::ParseError, "unescaped brace in open key " + std::string(key));
    } else {
      current.push_back(c);
    }
  }
  members.push_back(std::move(current));
  return members;
}

}  // namespace finsheaf
