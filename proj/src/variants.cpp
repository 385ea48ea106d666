#include "dst/variants.hpp"

#include <algorithm>
#include <set>

#include "dst/error.hpp"
#include "dst/json_util.hpp"
#include "dst/text.hpp"

namespace dst {

void VariantMap::add_class(std::string_view slot, const std::vector<std::string>& values) {
  std::string key = slot == kAnySlot ? std::string(kAnySlot) : text::to_lower(slot);
  auto& index = classes_[key];
  std::set<int> touched;
  std::set<std::string> lowered;
  for (const auto& v : values) {
    auto l = text::to_lower(text::trim(v));
    lowered.insert(l);
    if (auto it = index.find(l); it != index.end()) touched.insert(it->second);
  }
  int id = next_id_++;
  auto& merged = members_[id];
  for (int old : touched) {
    for (const auto& m : members_[old]) lowered.insert(m);
    members_.erase(old);
  }
  for (const auto& l : lowered) {
    index[l] = id;
    merged.push_back(l);
  }
}

int VariantMap::class_id(const std::string& slot_key, const std::string& lowered) const {
  auto slot_it = classes_.find(slot_key);
  if (slot_it == classes_.end()) return -1;
  auto it = slot_it->second.find(lowered);
  return it == slot_it->second.end() ? -1 : it->second;
}

bool VariantMap::equivalent(std::string_view slot, std::string_view a, std::string_view b) const {
  auto la = text::to_lower(text::trim(a));
  auto lb = text::to_lower(text::trim(b));
  if (la == lb) return true;
  for (const std::string& key : {text::to_lower(slot), std::string(kAnySlot)}) {
    int ia = class_id(key, la);
    if (ia >= 0 && ia == class_id(key, lb)) return true;
  }
  return false;
}

std::vector<std::string> VariantMap::variants_of(std::string_view slot, std::string_view value) const {
  auto l = text::to_lower(text::trim(value));
  std::set<std::string> out{l};
  for (const std::string& key : {text::to_lower(slot), std::string(kAnySlot)}) {
    int id = class_id(key, l);
    if (id < 0) continue;
    const auto& m = members_.at(id);
    out.insert(m.begin(), m.end());
  }
  return {out.begin(), out.end()};
}

VariantMap parse_variant_map(std::string_view json_text, const std::string& source) {
  Json doc = parse_json_strict(json_text, source);
  if (!doc.is_object()) throw DataError(source + ": expected an object mapping slot to variant classes");
  VariantMap map;
  for (const auto& [slot, classes] : doc.items()) {
    if (!classes.is_array()) throw DataError(source + ": \"" + slot + "\" must be a list of classes");
    for (const auto& cls : classes) {
      if (!cls.is_array()) throw DataError(source + ": \"" + slot + "\" classes must be lists of strings");
      std::vector<std::string> values;
      for (const auto& v : cls) {
        if (!v.is_string()) throw DataError(source + ": \"" + slot + "\" classes must be lists of strings");
        values.push_back(v.get<std::string>());
      }
      map.add_class(slot, values);
    }
  }
  return map;
}

VariantMap load_variant_map(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("variant map not found: " + path.string());
  return parse_variant_map(text::read_file(path), path.string());
}

}  // namespace dst
