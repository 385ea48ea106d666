#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dst {

/// Per-slot equivalence classes of value strings used for lenient matching
/// during evaluation ("the gonville hotel" == "gonville hotel"). Classes under
/// the "*" key apply to every slot. Values are compared lowercased.
class VariantMap {
 public:
  static constexpr std::string_view kAnySlot = "*";

  VariantMap() = default;

  /// Adds an equivalence class. Classes that share a value are merged.
  void add_class(std::string_view slot, const std::vector<std::string>& values);

  bool equivalent(std::string_view slot, std::string_view a, std::string_view b) const;

  /// Every member of the value's class for `slot` (the value itself included).
  std::vector<std::string> variants_of(std::string_view slot, std::string_view value) const;

  bool empty() const { return classes_.empty(); }

 private:
  int class_id(const std::string& slot_key, const std::string& lowered) const;

  // slot key (lowercased, or "*") -> member -> class id
  std::map<std::string, std::map<std::string, int>> classes_;
  std::map<int, std::vector<std::string>> members_;
  int next_id_ = 0;
};

/// File format: {"slot-name" | "*": [["variant", "variant", ...], ...]}.
VariantMap parse_variant_map(std::string_view json_text, const std::string& source = "<variants>");
VariantMap load_variant_map(const std::filesystem::path& path);

}  // namespace dst
