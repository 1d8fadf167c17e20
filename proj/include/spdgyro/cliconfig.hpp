#pragma once

#include <map>
#include <string>

#include "spdgyro/pipeline.hpp"

namespace spdgyro {

// Flat `key = value` configuration file, '#' starts a comment, blank lines
// ignored. Every TrainConfig field is reachable by key; unknown keys are
// rejected with the offending key named. Command-line flags override file
// values.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies file values onto cfg. Throws UsageError on unknown keys or
// unparsable values.
void apply_config(const std::map<std::string, std::string>& kv, TrainConfig& cfg);

}  // namespace spdgyro
