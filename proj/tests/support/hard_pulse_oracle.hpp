#pragma once

// Test-only analytic reference: pulses act as instantaneous rotations at
// their center times and the gaps evolve with the exact detuning/decay
// exponentials. Deliberately independent of the RK4 integration path it is
// used to cross-check; only shared vocabulary types are reused.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "echosim/atom.hpp"
#include "echosim/ensemble.hpp"
#include "echosim/protocol.hpp"

namespace echosim::oracle {

inline DensityMatrix rotate(const DensityMatrix& rho, Channel channel, double area,
                            double phase = 0.0) {
    const int lo = (channel == Channel::A) ? 0 : 1;
    const double c = std::cos(0.5 * area);
    const double s = std::sin(0.5 * area);
    Matrix3c u = Matrix3c::Identity();
    u(lo, lo) = c;
    u(2, 2) = c;
    u(lo, 2) = Complex(0.0, -s) * std::exp(Complex(0.0, -phase));
    u(2, lo) = Complex(0.0, -s) * std::exp(Complex(0.0, phase));
    return u * rho * u.adjoint();
}

inline DensityMatrix free_step(const DensityMatrix& rho, const AtomParams& atom, double dt) {
    const double d_opt = atom.delta_opt();
    const double d_spin = atom.delta_spin();
    const double g3 = atom.decay_31() + atom.decay_32();
    const double g21 = atom.decay_21();

    DensityMatrix out = rho;
    const double r33 = rho(2, 2).real();
    const double r22 = rho(1, 1).real();
    const double e3 = std::exp(-g3 * dt);
    const double e21 = std::exp(-g21 * dt);
    double fed;
    if (std::abs(g21 - g3) > 1e-14)
        fed = atom.decay_32() * (e3 - e21) / (g21 - g3);
    else
        fed = atom.decay_32() * dt * e3;
    out(2, 2) = r33 * e3;
    out(1, 1) = r22 * e21 + r33 * fed;
    out(0, 0) = 1.0 - out(2, 2).real() - out(1, 1).real();

    out(0, 2) = rho(0, 2) * std::exp(Complex(-atom.dephasing_31() * dt, d_opt * dt));
    out(2, 0) = std::conj(out(0, 2));
    out(1, 2) = rho(1, 2) * std::exp(Complex(-atom.dephasing_32() * dt, (d_opt - d_spin) * dt));
    out(2, 1) = std::conj(out(1, 2));
    out(0, 1) = rho(0, 1) * std::exp(Complex(-atom.dephasing_21() * dt, d_spin * dt));
    out(1, 0) = std::conj(out(0, 1));
    return out;
}

struct PulseEvent {
    double t;
    Channel channel;
    double area;
    double phase;
};

inline std::vector<PulseEvent> events_of(const PulseSequence& seq) {
    std::vector<PulseEvent> evs;
    for (const auto& p : seq.pulses)
        evs.push_back({p.t_center_us(), p.channel, p.area_rad, p.carrier_phase_rad});
    std::sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    return evs;
}

/// rho13(t) on the given time base for one atom.
inline std::vector<Complex> coherence_trace(const AtomParams& atom, const PulseSequence& seq,
                                            const std::vector<double>& times) {
    const auto evs = events_of(seq);
    std::vector<Complex> out;
    out.reserve(times.size());
    DensityMatrix rho = DensityMatrix::Zero();
    rho(0, 0) = 1.0;
    double t_cur = times.empty() ? 0.0 : times.front();
    std::size_t e = 0;
    while (e < evs.size() && evs[e].t <= t_cur) {  // pulses at/before the start
        rho = rotate(rho, evs[e].channel, evs[e].area, evs[e].phase);
        ++e;
    }
    for (double t : times) {
        while (e < evs.size() && evs[e].t <= t) {
            rho = free_step(rho, atom, evs[e].t - t_cur);
            t_cur = evs[e].t;
            rho = rotate(rho, evs[e].channel, evs[e].area, evs[e].phase);
            ++e;
        }
        rho = free_step(rho, atom, t - t_cur);
        t_cur = t;
        out.push_back(rho(0, 2));
    }
    return out;
}

/// Grid-weighted P(t) in fixed grid order, matching run_ensemble's reduction.
inline std::vector<Complex> polarization(const AtomParams& atom_template,
                                         const PulseSequence& seq, const DetuningGrid& grid,
                                         const std::vector<double>& times) {
    std::vector<Complex> p(times.size(), Complex(0.0, 0.0));
    for (int j = 0; j < grid.n; ++j) {
        const AtomParams atom = atom_template.with_delta_opt_khz(grid.points_khz[j]);
        const auto trace = coherence_trace(atom, seq, times);
        for (std::size_t i = 0; i < times.size(); ++i) p[i] += grid.weights[j] * trace[i];
    }
    return p;
}

}  // namespace echosim::oracle
