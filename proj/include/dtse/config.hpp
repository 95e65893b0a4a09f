#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dtse/experiment.hpp"

namespace dtse {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grammar: one `key = value` per line, `#` starts a comment, blank lines are
// ignored, lists are comma separated. Omitted keys keep their defaults. See
// configs/default.cfg for the full key list.
experiment::RunConfig parse_config_text(std::string_view text);
experiment::RunConfig parse_config(const std::filesystem::path& path);

// Canonical text form; parse_config_text(to_config_text(c)) reproduces c.
std::string to_config_text(const experiment::RunConfig& cfg);

}  // namespace dtse
