#pragma once

#include <string>

#include "tracker.hpp"

namespace mshr {

/// Parses a tracker configuration from JSON text. Missing keys keep their
/// defaults; unknown keys are rejected. The result is validated.
TrackerConfig parse_config(const std::string& json_text);

/// Reads and parses a configuration file.
TrackerConfig load_config(const std::string& path);

/// Applies a single "dotted.key=value" override, e.g. "stability.delta=3"
/// or "tree.norm=l1". The result is not revalidated; call validate_config()
/// after the last override.
void apply_override(TrackerConfig& config, const std::string& assignment);

/// Serializes a configuration to pretty-printed JSON.
std::string config_to_json(const TrackerConfig& config);

}  // namespace mshr
