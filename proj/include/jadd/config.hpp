#pragma once

#include <istream>
#include <map>
#include <string>

#include "jadd/model.hpp"

namespace jadd {

/// Reads `key = value` lines; `#` starts a comment. Keys: K, Ka, M, T,
/// snr_db, modulation (qpsk, qam16, qam64, ...), seed, noise_var.
Scenario parse_scenario(std::istream& in, Scenario base = {});
Scenario load_scenario(const std::string& path, Scenario base = {});

/// Applies one key to a scenario; unknown keys and malformed values raise ConfigError.
void apply_scenario_key(Scenario& scenario, const std::string& key, const std::string& value);

/// Key-value echo of a scenario, in the same vocabulary the loader reads.
std::map<std::string, std::string> scenario_keys(const Scenario& scenario);

Constellation parse_modulation(const std::string& name);

}  // namespace jadd
