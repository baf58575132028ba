#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "gossipmon/scenario.hpp"

namespace gossipmon {

/// Builds a validated Scenario from its JSON form. Absent optional fields
/// take their documented defaults; unknown keys and ill-typed values are
/// rejected with a ConfigError naming the dotted field path.
Scenario parse_scenario(const nlohmann::json& doc);

// Reads and parses a scenario file. Missing or unparsable files raise
// ConfigError with field "scenario".
nlohmann::json read_scenario_json(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

// Sets the value at a dotted key ("population", "protocol.beta") in a
// scenario document. The value text is parsed as JSON when possible and
// kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view dotted_key, std::string_view value);

}  // namespace gossipmon
