#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "echosim/errors.hpp"
#include "echosim/pulse.hpp"

namespace echosim {

enum class ProtocolTag { two_pulse_echo, apc_double_rephase, custom };

const char* to_string(ProtocolTag t);

/// An ordered pulse train. Invariants (checked by validate_sequence): sorted
/// by start time, no same-channel overlap; for apc_double_rephase the labels
/// run D(+), R1, R2, C1, C2 in time with D weak (< pi/2) on channel A, R1/R2
/// of area pi on channel A and C1/C2 of area pi on channel B.
struct PulseSequence {
    std::vector<Pulse> pulses;
    ProtocolTag tag = ProtocolTag::custom;

    /// First pulse with the given label, or nullptr.
    const Pulse* find(PulseLabel label) const;
    /// All data (D) pulses in time order.
    std::vector<const Pulse*> data_pulses() const;
    double t_min_us() const;
    double t_max_us() const;
};

struct TwoPulseOptions {
    double area_d_rad = units::pi / 10.0;
    double area_r1_rad = units::pi;
    double duration_d_us = 1.0;
    double duration_r1_us = 0.1;
};

/// Data pulse at t_d, rephasing pulse at t_r1 (start times, channel A).
/// Throws ConfigError when D does not end before R1 starts.
PulseSequence make_two_pulse_sequence(double t_d_us, double t_r1_us,
                                      const TwoPulseOptions& opt = {});

struct ApcOptions {
    double area_d_rad = units::pi / 10.0;
    double area_r_rad = units::pi;
    double area_c_rad = units::pi;
    double duration_d_us = 1.0;
    double duration_rc_us = 0.1;
};

/// Full protocol D, R1, R2 (channel A) + C1, C2 (channel B), start times.
/// Throws ConfigError on any ordering violation (including C1 before R2).
PulseSequence make_apc_sequence(double t_d_us, double t_r1_us, double t_r2_us,
                                double t_c1_us, double t_c2_us, const ApcOptions& opt = {});

/// Conventional two-pulse echo time 2*t_r1 - t_d (pulse centers).
/// Throws ConfigError if t_r1 < t_d; equal times are allowed with a warning.
double predict_e1_time(double t_d_center_us, double t_r1_center_us,
                       Findings* findings = nullptr);

struct E2Prediction {
    double t_us = 0.0;
    bool no_echo = false;  // rephasing halt: C1 arrived too late
};

/// Second echo time t_c2 + (t_r2 - t_e1) - delta_t, evaluated verbatim.
/// delta_t is the C1 delay measured from R2 (see README on the timing
/// bookkeeping). The no_echo flag is raised when delta_t exceeds
/// halt_bound_us, which defaults to t_r2 - t_e1: past that point the
/// stored phase can no longer rephase after C2.
E2Prediction predict_e2_time(double t_c2_us, double t_r2_us, double t_e1_us, double delta_t_us,
                             std::optional<double> halt_bound_us = std::nullopt);

/// Echo-time forecast for a sequence, one entry per data pulse (time order).
struct TimingPrediction {
    std::vector<double> t_e1_us;
    std::vector<double> t_e2_us;
    double delta_t_us = 0.0;  // C1 center - R2 center
    bool no_echo = false;
    // pulse centers echoed back (first data pulse for t_d_us)
    double t_d_us = 0.0, t_r1_us = 0.0, t_r2_us = 0.0, t_c1_us = 0.0, t_c2_us = 0.0;

    double e1() const { return t_e1_us.front(); }
    double e2() const { return t_e2_us.front(); }
};

/// Works for two_pulse (E1 only; t_e2_us empty) and apc sequences.
/// delta_t_override replaces the value extracted from the pulse times.
TimingPrediction predict_timing(const PulseSequence& seq,
                                std::optional<double> delta_t_override = std::nullopt,
                                std::optional<double> halt_bound_us = std::nullopt);

struct PhaseMatchResult {
    Eigen::Vector3d k_out = Eigen::Vector3d::Zero();  // rad/m
    double omega_out = 0.0;                           // rad/s
    double mismatch = 0.0;                            // | |k_out| - omega_out/c |
    Eigen::Vector3d direction = Eigen::Vector3d::Zero();
    bool backward = false;  // direction . k_d < 0
};

/// First echo, degenerate four-wave mixing: k_E1 = 2 k_D - k_R1 at
/// omega_E1 = omega_D = c |k_D|. Throws ConfigError on zero-length inputs.
PhaseMatchResult phase_match_e1(const Eigen::Vector3d& k_d, const Eigen::Vector3d& k_r1);

/// Second echo: k_E2 = k_D - k_C1 + k_C2, omega_E2 = omega_D - omega_C1 +
/// omega_C2. Throws ConfigError when omega_E2 <= 0 or an input is zero-length.
PhaseMatchResult phase_match_e2(const Eigen::Vector3d& k_d, const Eigen::Vector3d& k_c1,
                                const Eigen::Vector3d& k_c2, double omega_d_rad_per_s,
                                double omega_c1_rad_per_s, double omega_c2_rad_per_s);

struct ValidateOptions {
    std::optional<double> halt_bound_us;  // default: t_r2 - t_e1 of the sequence
    double area_tol_rad = 1e-9;
};

/// Deterministic list of findings; empty means valid.
Findings validate_sequence(const PulseSequence& seq, const ValidateOptions& opt = {});

}  // namespace echosim
