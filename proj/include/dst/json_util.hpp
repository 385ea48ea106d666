#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace dst {

using Json = nlohmann::ordered_json;

// Parses JSON text, rejecting duplicate object keys anywhere in the document.
// `source` labels error messages (usually the file path).
Json parse_json_strict(std::string_view text, const std::string& source);

}  // namespace dst
