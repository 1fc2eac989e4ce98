#pragma once

// Access to the preset configurations embedded at build time. Only targets
// that depend on the generated header (via the gen_presets target) may
// include this file.

#include <map>
#include <string>
#include <vector>

#include "diraclab/common.hpp"
#include "diraclab/presets_data.hpp"

namespace diraclab {

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::preset_texts()) names.push_back(name);
  return names;
}

inline std::string preset_text(const std::string& name) {
  const auto& table = detail::preset_texts();
  auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& [n, t] : table) known += (known.empty() ? "" : ", ") + n;
    throw validation_error("unknown preset '" + name + "' (available: " +
                           known + ")");
  }
  return it->second;
}

}  // namespace diraclab
