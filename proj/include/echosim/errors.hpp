#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace echosim {

/// Base class for everything a user can fix by changing their inputs.
/// The CLI maps these to exit code 1; other exceptions map to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration: bad sequence, grid, window or integrator settings.
class ConfigError : public ValidationError {
public:
    explicit ConfigError(const std::string& msg) : ValidationError(msg) {}
};

/// Invalid runtime input, e.g. a non-Hermitian initial state.
class InputError : public ValidationError {
public:
    explicit InputError(const std::string& msg) : ValidationError(msg) {}
};

/// A single validation finding. Errors make the object unusable; warnings
/// flag suspicious but runnable setups ("non-ideal rephasing" and friends).
struct Finding {
    enum class Severity { warning, error };
    Severity severity = Severity::warning;
    std::string code;     // stable machine-readable tag, e.g. "overlap"
    std::string message;  // human-readable description

    bool is_error() const { return severity == Severity::error; }
};

using Findings = std::vector<Finding>;

inline bool has_errors(const Findings& findings) {
    for (const auto& f : findings)
        if (f.is_error()) return true;
    return false;
}

/// Throws ConfigError with all error messages joined if any finding is an error.
void throw_if_errors(const Findings& findings, const std::string& context);

}  // namespace echosim
