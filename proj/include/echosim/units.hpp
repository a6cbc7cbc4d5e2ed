#pragma once

#include <numbers>

// Unit conventions, kept in one place:
//   - times are microseconds (us)
//   - detunings in user-facing structs are ordinary frequencies in kHz and
//     become angular frequencies (rad/us) via 2*pi
//   - decay constants in kHz are direct exponential rates: 1 kHz = 1e3 s^-1,
//     i.e. exp(-1000 * t[s]) = exp(-1e-3 * t[us])
//   - Rabi amplitudes and Hamiltonian entries are rad/us
namespace echosim::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light_m_per_s = 299792458.0;

constexpr double rad_per_us_from_khz(double khz) { return 2.0 * pi * khz * 1e-3; }
constexpr double khz_from_rad_per_us(double w) { return w / (2.0 * pi) * 1e3; }
constexpr double per_us_from_khz(double khz) { return khz * 1e-3; }

}  // namespace echosim::units
