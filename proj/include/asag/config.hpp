#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

namespace asag {

// TOML subset: [table], [a.b], [[array.of.tables]], dotted keys, basic and
// literal strings, integers, floats, booleans, arrays and inline tables.
// No dates, no multi-line strings.
nlohmann::json parse_toml(std::string_view text, const std::string& source_name = "<memory>");

// ".toml" goes through parse_toml, ".json" through nlohmann. Anything else is
// rejected.
nlohmann::json load_config(const std::filesystem::path& path);

// Recursive merge; objects merge key by key, everything else in `overrides` wins.
void merge_config(nlohmann::json& base, const nlohmann::json& overrides);

}  // namespace asag
