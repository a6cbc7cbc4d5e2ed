#pragma once

#include <string>
#include <vector>

#include "echosim/atom.hpp"
#include "echosim/ensemble.hpp"
#include "echosim/errors.hpp"
#include "echosim/protocol.hpp"

namespace echosim {

/// One error at a precise location in a config document.
struct ConfigIssue {
    std::string path;  // e.g. "$.sequence.pulses[2].duration"
    std::string message;
};

/// Thrown by parse_config; carries every issue found, not just the first.
class ConfigParseError : public ConfigError {
public:
    explicit ConfigParseError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

struct OutputSpec {
    std::string kind;    // "timeseries" | "echoes" | "scan"
    std::string path;
    std::string format;  // "csv" | "json"
};

/// A fully validated simulation job.
struct SimJob {
    int version = 1;
    std::string preset;  // name the job was seeded from, if any

    AtomParams atom;
    double grid_fwhm_khz = 60.0;
    double grid_span_khz = 100.0;
    int grid_n = 201;

    PulseSequence sequence;
    IntegratorConfig integrator;
    double t0_us = 0.0;
    double t1_us = 80.0;

    std::vector<EchoWindow> windows;  // empty: built from timing predictions
    double threshold_frac = 0.05;
    std::vector<OutputSpec> outputs;

    Findings warnings;  // non-fatal findings collected while validating

    DetuningGrid make_grid() const { return build_grid(grid_fwhm_khz, grid_span_khz, grid_n); }
    /// Echo windows to use: explicit ones, else +-3 us around predictions.
    std::vector<EchoWindow> effective_windows() const;
};

/// Parses and validates a JSON config document. Unknown keys, missing
/// required fields and out-of-range values raise ConfigParseError with
/// path-precise messages.
SimJob parse_config(const std::string& json_text);

/// Built-in parameter sets: "fig2", "fig3-blue", "fig3-red".
SimJob preset_job(const std::string& name);
std::vector<std::string> preset_names();

/// Canonical serialized form (sorted keys, explicit pulse list, 17 significant
/// digits). parse_config(canonical_json(job)) reproduces the job exactly.
std::string canonical_json(const SimJob& job);

/// FNV-1a 64-bit hash of canonical_json, as fixed-width hex.
std::string job_hash(const SimJob& job);

}  // namespace echosim
