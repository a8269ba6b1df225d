#pragma once

#include <filesystem>
#include <string>

#include "tsncbs/model.hpp"

namespace tsncbs {

/// Frame size assumed when a flow does not give one (bits).
inline const Rational kDefaultMaxFrameBits{12336};

/// Parses a JSON configuration. Throws ConfigError on malformed input.
NetworkConfiguration load_configuration(const std::string& json_text);
NetworkConfiguration load_configuration_file(const std::filesystem::path& file);

/// Serialises the configuration back to JSON, including CBS assignments.
std::string dump_configuration(const NetworkConfiguration& config);

/// Shortest device path from `source` to `destination` as output ports; ties go to smaller port ids.
std::vector<std::size_t> route(const NetworkConfiguration& config, std::size_t source,
                               std::size_t destination);

}  // namespace tsncbs
