#pragma once

#include <filesystem>

#include <json.hpp>

#include "dsub/sim.hpp"

namespace dsub::cli {

using Json = nlohmann::ordered_json;

/// Parse errors surface as sim::ConfigError with field "<file>".
Json load_json(const std::filesystem::path& path);

// Readers reject unknown keys and wrong types with a ConfigError naming the
// field, then run sim::validate. Missing keys keep their defaults.
sim::ExperimentConfig experiment_config(const Json& j);
sim::BootstrapConfig bootstrap_config(const Json& j);
sim::TimingConfig timing_config(const Json& j);

Json to_json(const sim::ExperimentConfig& c);
Json to_json(const sim::BootstrapConfig& c);
Json to_json(const sim::TimingConfig& c);

sim::Method method_from_name(const std::string& name, const std::string& field);

}  // namespace dsub::cli
