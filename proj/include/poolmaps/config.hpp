#ifndef POOLMAPS_CONFIG_HPP
#define POOLMAPS_CONFIG_HPP

#include <string>

#include "poolmaps/training.hpp"

namespace poolmaps {

// Plain-text configuration: one `key = value` per line, `#` starts a comment,
// blank lines ignored. Unknown keys are errors so typos cannot silently fall
// back to defaults. Keys mirror the TrainConfig fields.

// Applies the file's assignments on top of `base` (so presets compose with
// config files). Throws FormatError naming the offending 1-based line.
TrainConfig parse_config_text(const std::string& text, TrainConfig base = TrainConfig());

TrainConfig load_config_file(const std::string& path, TrainConfig base = TrainConfig());

// Every key in a fixed order; parse_config_text(config_to_text(c)) == c.
std::string config_to_text(const TrainConfig& cfg);

// "paper" = TrainConfig defaults; "desk" = small synthetic-data setup.
TrainConfig preset_config(const std::string& name);

// Semantic checks (positive dimensions, w <= n, known activation, ...).
// Throws ArgumentError on the first violation.
void validate_config(const TrainConfig& cfg);

}  // namespace poolmaps

#endif
