#pragma once

#include <string>

#include <Eigen/Dense>

#include "echosim/errors.hpp"
#include "echosim/units.hpp"

namespace echosim {

/// Drive channel: A couples |1>-|3>, B couples |2>-|3>.
enum class Channel { A, B };

/// Role of a pulse in the echo protocol. D: data, R1/R2: rephasing,
/// C1/C2: control (deshelving).
enum class PulseLabel { D, R1, R2, C1, C2, Custom };

const char* to_string(Channel c);
const char* to_string(PulseLabel l);

// Default optical carrier, 606 nm (used by phase matching only).
inline constexpr double default_carrier_omega_rad_per_s =
    2.0 * units::pi * units::speed_of_light_m_per_s / 606e-9;

/// One square drive segment. The Rabi amplitude is area/duration; the complex
/// drive seen by the Hamiltonian is rabi * exp(i * carrier_phase).
struct Pulse {
    Channel channel = Channel::A;
    PulseLabel label = PulseLabel::Custom;
    std::string name;  // display name; defaults to the label text

    double t_start_us = 0.0;
    double duration_us = 0.1;
    double area_rad = units::pi;
    double carrier_phase_rad = 0.0;

    Eigen::Vector3d k_dir = Eigen::Vector3d::UnitX();   // propagation direction
    double omega_rad_per_s = default_carrier_omega_rad_per_s;

    double t_end_us() const { return t_start_us + duration_us; }
    double t_center_us() const { return t_start_us + 0.5 * duration_us; }
    double rabi_rad_per_us() const { return area_rad / duration_us; }
    bool active_at(double t_us) const { return t_us >= t_start_us && t_us < t_end_us(); }

    /// Wave vector in rad/m: (omega/c) * k_dir.
    Eigen::Vector3d k_vector() const {
        return (omega_rad_per_s / units::speed_of_light_m_per_s) * k_dir;
    }

    std::string display_name() const { return name.empty() ? to_string(label) : name; }

    /// duration > 0, area >= 0, |k_dir| = 1.
    Findings validate() const;
};

}  // namespace echosim
