#pragma once

#include "twoscale/cstr.hpp"
#include "twoscale/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace twoscale {

using Json = nlohmann::ordered_json;

/// Resolved experiment configuration. The file format is JSON; the schema is
/// the tree returned by default_config() (docs in configs/README.md).
struct ExperimentConfig {
    SchemeKind scheme = SchemeKind::distributed;
    cstr::Scenario scenario;
    std::string output = "out";
    IndexOptions metrics;
    /// Full tree after defaults, file and overrides, echoed in summaries.
    Json resolved;
};

Json scenario_to_json(const cstr::Scenario& sc);
cstr::Scenario scenario_from_json(const Json& j);

/// Complete default tree for a named scenario.
Json default_config(const std::string& scenario = "nominal");

/// Merges `patch` into `tree`. Every key must already exist in `schema`
/// with a compatible type (integers are accepted for real fields, arrays
/// must keep their length). Throws ConfigError naming the dotted key.
void merge_checked(Json& tree, const Json& patch, const Json& schema, const std::string& where = "");

/// Applies one "dotted.key=value" override. The value is read as JSON when
/// it parses, otherwise as a string.
void apply_override(Json& tree, const Json& schema, const std::string& assignment);

ExperimentConfig config_from_json(const Json& tree);

/// Defaults for the scenario named by the overrides, the file, or `default_scenario`
/// (in that order of precedence), then the file, then each override, then
/// the seed. Validates the result.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::vector<std::string>& overrides = {},
                             std::optional<std::uint64_t> seed = std::nullopt,
                             const std::string& default_scenario = "nominal");

}  // namespace twoscale
