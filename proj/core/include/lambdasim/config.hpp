#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lambdasim/observables.hpp"

namespace lambdasim {

/// Parse failure with the offending line recorded; the CLI exits 1 on these.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& where, int line, const std::string& what)
        : std::runtime_error(where + ":" + std::to_string(line) + ": " + what), line_no(line) {}
    int line_no;
};

struct SweepConfig {
    bool enabled = false;
    SweepParameter parameter = SweepParameter::Nu;
    double min = 0.0;
    double max = 0.0;
    int points = 0;
    bool log_spacing = false;

    std::vector<double> grid() const;
};

struct OracleConfig {
    bool enabled = false;
    long trajectories = 10000;
    std::uint64_t seed = 1;
};

struct OutputConfig {
    std::string directory = ".";
    std::string prefix = "run";
};

struct RatesConfig {
    std::vector<double> targets;
    std::vector<double> gammas;  // empty: use the model gamma only
};

/// Flat key = value configuration grouped by [section] headers. Sections and
/// keys form the complete schema; unknown ones are rejected with a
/// line-referenced error. Environment variables SIM_<SECTION>_<KEY> override
/// file values.
struct ExperimentConfig {
    LambdaParams params;     // [model]: mode + physical parameters
    SweepConfig sweep;       // [sweep]
    OdeControl integrator;   // [integrator]
    OracleConfig oracle;     // [oracle]
    OutputConfig output;     // [output]
    RatesConfig rates;       // [rates]

    static ExperimentConfig parse_file(const std::filesystem::path& path);
    static ExperimentConfig parse_string(const std::string& text,
                                         const std::string& name = "<config>");

    /// Canonical round-trippable form: parse(serialize(c)) == c.
    std::string serialize() const;
};

}  // namespace lambdasim
