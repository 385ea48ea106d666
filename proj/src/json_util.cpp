#include "dst/json_util.hpp"

#include <set>
#include <vector>

#include "dst/error.hpp"

namespace dst {

Json parse_json_strict(std::string_view text, const std::string& source) {
  std::vector<std::set<std::string>> seen;
  std::string duplicate;
  auto callback = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        if (!seen.empty()) seen.pop_back();
        break;
      case Json::parse_event_t::key: {
        auto key = parsed.get<std::string>();
        if (!seen.empty() && !seen.back().insert(key).second && duplicate.empty()) duplicate = key;
        break;
      }
      default:
        break;
    }
    return true;
  };
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end(), callback);
  } catch (const Json::parse_error& e) {
    throw DataError(source + ": malformed JSON: " + e.what());
  }
  if (!duplicate.empty()) throw DataError(source + ": duplicate key \"" + duplicate + "\"");
  return doc;
}

}  // namespace dst
