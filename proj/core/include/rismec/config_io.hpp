#pragma once

#include "rismec/experiment.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace rismec {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double db_to_lin(double db);
double dbm_to_watt(double dbm);

/// YAML with top-level tables experiment, system, network, fading, driver,
/// penalty. Missing tables keep default_spec(id) values. Unknown keys and bad
/// values throw ConfigError naming the key path. `id` is used when the file
/// has no experiment.id and must agree with it otherwise.
ExperimentSpec parse_spec(const std::string& yaml_text,
                          std::optional<ExperimentId> id = std::nullopt);
ExperimentSpec load_spec(const std::string& path, std::optional<ExperimentId> id = std::nullopt);

/// Full dump of a spec in the same format; parse_spec(dump_spec(s)) == s.
std::string dump_spec(const ExperimentSpec& spec);

}  // namespace rismec
