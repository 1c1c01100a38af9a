#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace finsheaf {

/// Composite labels used for tuples (limits, germ families) and open-set keys.
/// Components are backslash-escaped so that distinct component lists always
/// give distinct labels.
std::string escape_label(std::string_view raw, std::string_view specials);

/// "(a,b,c)"; the empty tuple is "()".
std::string tuple_label(std::span<const std::string> parts);

/// "{a,b}"; the empty set is "{}".
std::string set_key(std::span<const std::string> sorted_members);

/// Inverse of set_key. Throws Error(ParseError) on malformed input.
std::vector<std::string> parse_set_key(std::string_view key);

}  // namespace finsheaf
