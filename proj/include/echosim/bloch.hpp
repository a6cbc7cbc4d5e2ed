#pragma once

#include <functional>
#include <span>
#include <vector>

#include "echosim/atom.hpp"
#include "echosim/density_matrix.hpp"
#include "echosim/pulse.hpp"

namespace echosim {

/// Rotating-frame Hamiltonian (units of rad/us):
///
///   H = delta_opt |3><3| + delta_spin |2><2|
///       + 1/2 (rabi_a |3><1| + rabi_b |3><2| + h.c.)
///
/// where rabi_a/rabi_b are the complex drive amplitudes Omega * exp(i*phi).
/// The sign is fixed so that free evolution gives rho13 ~ exp(+i*delta_opt*t).
Matrix3c build_hamiltonian(Complex rabi_a, Complex rabi_b, const AtomParams& atom);

/// Right-hand side of the master equation: -i[H, rho] plus relaxation.
/// Population flows 3->1 (decay_31), 3->2 (decay_32) and 2->1 (decay_21);
/// each coherence decays at its dephasing rate. The result is Hermitian and
/// traceless by construction, also in floating point.
Matrix3c master_rhs(const DensityMatrix& rho, const Matrix3c& h, const AtomParams& atom);

/// Exact drive-free update over dt_us: coherences rotate at their detuning
/// and decay; populations relax along 3->1, 3->2, 2->1. Trace-preserving to
/// machine precision.
DensityMatrix free_propagate(const DensityMatrix& rho, const AtomParams& atom, double dt_us);

/// Instantaneous rotation U rho U^dag with U = exp(-i (area/2) sigma_phi) on
/// the driven two-level subspace (sigma_phi = cos(phase) sx + sin(phase) sy),
/// identity elsewhere. Matches the resonant limit of the numeric integrator.
DensityMatrix hard_pulse_rotation(const DensityMatrix& rho, Channel channel,
                                  double area_rad, double phase_rad = 0.0);

struct IntegratorConfig {
    double dt_us = 0.002;    // RK4 step inside pulses; must be <= duration/20
    int sample_stride = 25;  // record every stride-th step (spacing dt*stride)
};

struct Trajectory {
    std::vector<double> times_us;
    std::vector<DensityMatrix> states;
    int sample_stride = 1;
};

/// Sample instants for an evolution: a uniform grid of spacing dt*stride from
/// t0, plus every pulse edge in (t0, t1), plus t1. Strictly increasing.
std::vector<double> sample_times(std::span<const Pulse> pulses, double t0_us, double t1_us,
                                 const IntegratorConfig& cfg);

/// Integrates the master equation from t0 to t1 and hands the state to `sink`
/// at every time in sample_times(...): fixed-step RK4 while a pulse is on,
/// exact free-evolution updates in the gaps.
///
/// Throws ConfigError when dt exceeds duration/20 for a pulse overlapping
/// [t0, t1] (naming the pulse), InputError for a non-Hermitian rho0.
void integrate(const DensityMatrix& rho0, const AtomParams& atom, std::span<const Pulse> pulses,
               double t0_us, double t1_us, const IntegratorConfig& cfg,
               const std::function<void(double, const DensityMatrix&)>& sink);

/// integrate(), collecting the full per-sample states.
Trajectory evolve(const DensityMatrix& rho0, const AtomParams& atom, std::span<const Pulse> pulses,
                  double t0_us, double t1_us, const IntegratorConfig& cfg = {});

}  // namespace echosim
