#pragma once

#include <filesystem>
#include <string>

#include "walltopo/driver.hpp"

namespace walltopo {

/// Parses and validates a JSON run configuration. Unknown keys anywhere in
/// the document are rejected with their full key path; all validation
/// errors name the offending key.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& source_name = "<config>");

/// Inverse of parse_config: a JSON document that parse_config accepts and
/// that reproduces the same RunConfig.
std::string config_to_json(const RunConfig& config);

}  // namespace walltopo
