#pragma once

// Job configuration, check execution and report rendering for the acw tool.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acw/catalog.hpp"

namespace acw::job {

using json = nlohmann::json;

/// Malformed or inconsistent configuration (exit status 2).
class ConfigError : public Error {
  public:
    using Error::Error;
};

struct JobConfig {
    std::string command = "check";
    std::optional<std::string> fixture;
    Params params;
    json algebroid;   // inline algebroid block
    json adjustment;  // inline adjustment block
    json cover;       // inline cover and transition block
    std::vector<std::string> checks;  // empty: derived from the command
    std::optional<Tier> require_tier;
    std::optional<long> expected_chern;
    int patch_dim = 3;
    double residual_tol = 1e-9;
    double fd_tol = 1e-6;
    int zero_samples = 20;
    int cocycle_samples = 1000;
    std::uint64_t seed = 1;
    std::string format = "json";
    std::optional<std::string> output;
    bool timings = true;

    void validate() const;
    /// Canonical JSON of every input that influences the verdicts.
    json canonical() const;
};

/// Reads JSON, or TOML when the file does not parse as JSON.
JobConfig load_config(const std::string& path);
JobConfig config_from_json(const json& j);
json toml_to_json(const std::string& text);

/// 64-bit FNV-1a of the canonical configuration, as hex.
std::string input_digest(const JobConfig& cfg);

/// The checks run by a subcommand, in execution order.
std::vector<std::string> checks_for(const std::string& command);

struct Outcome {
    json report;
    int exit_status = 0;
};

Outcome run(const JobConfig& cfg);

std::string render_markdown(const json& report);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace acw::job
