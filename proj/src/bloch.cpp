#include "echosim/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "echosim/errors.hpp"

namespace echosim {

namespace {
constexpr double kTimeEps = 1e-12;  // tolerance for merging time points
}

DensityMatrix ground_state() { return pure_state(1); }

DensityMatrix pure_state(int level) {
    if (level < 1 || level > 3) throw InputError("pure_state: level must be 1, 2 or 3");
    DensityMatrix rho = DensityMatrix::Zero();
    rho(level - 1, level - 1) = 1.0;
    return rho;
}

double hermiticity_error(const DensityMatrix& rho) {
    return (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
}

double trace_error(const DensityMatrix& rho) { return std::abs(rho.trace() - Complex(1.0)); }

double min_eigenvalue(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix3c> solver(rho, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void require_valid_state(const DensityMatrix& rho, double tol) {
    if (!rho.allFinite()) throw InputError("density matrix has non-finite entries");
    if (hermiticity_error(rho) > tol) throw InputError("density matrix is not Hermitian");
    if (trace_error(rho) > tol) throw InputError("density matrix trace differs from 1");
}

BlochVector bloch_vector(const DensityMatrix& rho) {
    return {2.0 * rho(0, 2).real(), 2.0 * rho(0, 2).imag(),
            rho(2, 2).real() - rho(0, 0).real()};
}

Findings AtomParams::validate() const {
    Findings out;
    auto check_rate = [&](double v, const char* name) {
        if (v < 0.0)
            out.push_back({Finding::Severity::error, "negative_rate",
                           std::string(name) + " must be >= 0"});
    };
    check_rate(decay_31_khz, "Gamma31");
    check_rate(decay_32_khz, "Gamma32");
    check_rate(decay_21_khz, "Gamma21");
    check_rate(dephasing_31_khz, "gamma31");
    check_rate(dephasing_32_khz, "gamma32");
    check_rate(dephasing_21_khz, "gamma21");
    // Coherence decay below the population-lifetime bound is unphysical but
    // sometimes useful in toy setups, so it only warns.
    const double tol = 1e-12;
    if (dephasing_31_khz + tol < 0.5 * (decay_31_khz + decay_32_khz))
        out.push_back({Finding::Severity::warning, "unphysical_dephasing",
                       "gamma31 < (Gamma31+Gamma32)/2 violates the lifetime bound"});
    if (dephasing_32_khz + tol < 0.5 * (decay_31_khz + decay_32_khz + decay_21_khz))
        out.push_back({Finding::Severity::warning, "unphysical_dephasing",
                       "gamma32 < (Gamma31+Gamma32+Gamma21)/2 violates the lifetime bound"});
    return out;
}

Matrix3c build_hamiltonian(Complex rabi_a, Complex rabi_b, const AtomParams& atom) {
    Matrix3c h = Matrix3c::Zero();
    h(1, 1) = atom.delta_spin();
    h(2, 2) = atom.delta_opt();
    h(2, 0) = 0.5 * rabi_a;
    h(0, 2) = 0.5 * std::conj(rabi_a);
    h(2, 1) = 0.5 * rabi_b;
    h(1, 2) = 0.5 * std::conj(rabi_b);
    return h;
}

Matrix3c master_rhs(const DensityMatrix& rho, const Matrix3c& h, const AtomParams& atom) {
    // -i[H, rho] from a single product: rho H = (H rho)^dag for Hermitian
    // inputs, which keeps the result exactly Hermitian in floating point.
    const Matrix3c hr = h * rho;
    Matrix3c d = Complex(0.0, -1.0) * (hr - hr.adjoint().eval());

    const double g31 = atom.decay_31(), g32 = atom.decay_32(), g21 = atom.decay_21();
    const double r33 = rho(2, 2).real(), r22 = rho(1, 1).real();
    d(2, 2) += Complex(-(g31 + g32) * r33, 0.0);
    d(1, 1) += Complex(g32 * r33 - g21 * r22, 0.0);
    d(0, 0) += Complex(g31 * r33 + g21 * r22, 0.0);

    d(0, 2) -= atom.dephasing_31() * rho(0, 2);
    d(2, 0) = std::conj(d(0, 2));
    d(1, 2) -= atom.dephasing_32() * rho(1, 2);
    d(2, 1) = std::conj(d(1, 2));
    d(0, 1) -= atom.dephasing_21() * rho(0, 1);
    d(1, 0) = std::conj(d(0, 1));
    return d;
}

DensityMatrix free_propagate(const DensityMatrix& rho, const AtomParams& atom, double dt_us) {
    const double g3 = atom.decay_31() + atom.decay_32();  // total |3> loss
    const double g21 = atom.decay_21();

    DensityMatrix out = rho;

    // populations: rho33 drains at g3; rho22 gains the 3->2 branch and drains
    // at g21; rho11 takes up the rest so the trace is conserved exactly
    const double r33 = rho(2, 2).real();
    const double r22 = rho(1, 1).real();
    const double e3 = std::exp(-g3 * dt_us);
    const double e21 = std::exp(-g21 * dt_us);
    double transfer32;  // integral of the 3->2 feed against the 2->1 drain
    if (std::abs(g21 - g3) > 1e-14) {
        transfer32 = atom.decay_32() * (e3 - e21) / (g21 - g3);
    } else {
        transfer32 = atom.decay_32() * dt_us * e3;
    }
    const double r33_new = r33 * e3;
    const double r22_new = r22 * e21 + r33 * transfer32;
    out(2, 2) = Complex(r33_new, 0.0);
    out(1, 1) = Complex(r22_new, 0.0);
    out(0, 0) = rho(0, 0).real() + (r33 - r33_new) + (r22 - r22_new);

    // coherences: phase at the detuning splitting of each pair, plus decay
    const double d_opt = atom.delta_opt();
    const double d_spin = atom.delta_spin();
    out(0, 2) = rho(0, 2) * std::polar(std::exp(-atom.dephasing_31() * dt_us), d_opt * dt_us);
    out(2, 0) = std::conj(out(0, 2));
    out(1, 2) =
        rho(1, 2) * std::polar(std::exp(-atom.dephasing_32() * dt_us), (d_opt - d_spin) * dt_us);
    out(2, 1) = std::conj(out(1, 2));
    out(0, 1) = rho(0, 1) * std::polar(std::exp(-atom.dephasing_21() * dt_us), d_spin * dt_us);
    out(1, 0) = std::conj(out(0, 1));
    return out;
}

DensityMatrix hard_pulse_rotation(const DensityMatrix& rho, Channel channel, double area_rad,
                                  double phase_rad) {
    const int lo = (channel == Channel::A) ? 0 : 1;  // |1> or |2>
    const double c = std::cos(0.5 * area_rad);
    const double s = std::sin(0.5 * area_rad);
    Matrix3c u = Matrix3c::Identity();
    u(lo, lo) = c;
    u(2, 2) = c;
    u(lo, 2) = Complex(0.0, -s) * std::polar(1.0, -phase_rad);
    u(2, lo) = Complex(0.0, -s) * std::polar(1.0, phase_rad);
    return u * rho * u.adjoint();
}

std::vector<double> sample_times(std::span<const Pulse> pulses, double t0_us, double t1_us,
                                 const IntegratorConfig& cfg) {
    if (!(t0_us < t1_us)) throw ConfigError("evolve: t0 must be earlier than t1");
    if (!(cfg.dt_us > 0.0)) throw ConfigError("evolve: integrator dt must be > 0");
    if (cfg.sample_stride < 1) throw ConfigError("evolve: sample stride must be >= 1");

    std::vector<double> marks;
    marks.push_back(t0_us);
    marks.push_back(t1_us);
    for (const auto& p : pulses) {
        for (double edge : {p.t_start_us, p.t_end_us()}) {
            if (edge > t0_us + kTimeEps && edge < t1_us - kTimeEps) marks.push_back(edge);
        }
    }

    const double sample_dt = cfg.dt_us * cfg.sample_stride;
    const auto n_samples = static_cast<long>((t1_us - t0_us) / sample_dt);
    for (long k = 1; k <= n_samples; ++k) {
        const double t = t0_us + k * sample_dt;
        if (t < t1_us - kTimeEps) marks.push_back(t);
    }

    std::sort(marks.begin(), marks.end());
    std::vector<double> out;
    out.reserve(marks.size());
    for (double t : marks) {
        if (out.empty() || t - out.back() > kTimeEps) out.push_back(t);
    }
    return out;
}

namespace {

// One classical RK4 step of the master equation with a constant Hamiltonian.
DensityMatrix rk4_step(const DensityMatrix& rho, const Matrix3c& h, const AtomParams& atom,
                       double dt) {
    const Matrix3c k1 = master_rhs(rho, h, atom);
    const Matrix3c k2 = master_rhs(rho + (0.5 * dt) * k1, h, atom);
    const Matrix3c k3 = master_rhs(rho + (0.5 * dt) * k2, h, atom);
    const Matrix3c k4 = master_rhs(rho + dt * k3, h, atom);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct SegmentDrive {
    bool driven = false;
    Complex rabi_a{0.0, 0.0};
    Complex rabi_b{0.0, 0.0};
};

SegmentDrive drive_at(std::span<const Pulse> pulses, double t_mid) {
    SegmentDrive d;
    for (const auto& p : pulses) {
        if (!p.active_at(t_mid)) continue;
        const Complex amp = std::polar(p.rabi_rad_per_us(), p.carrier_phase_rad);
        if (p.channel == Channel::A)
            d.rabi_a += amp;
        else
            d.rabi_b += amp;
        d.driven = true;
    }
    return d;
}

}  // namespace

void integrate(const DensityMatrix& rho0, const AtomParams& atom, std::span<const Pulse> pulses,
               double t0_us, double t1_us, const IntegratorConfig& cfg,
               const std::function<void(double, const DensityMatrix&)>& sink) {
    require_valid_state(rho0);
    for (const auto& p : pulses) {
        if (p.t_end_us() <= t0_us || p.t_start_us >= t1_us) continue;
        if (cfg.dt_us > p.duration_us / 20.0 + kTimeEps) {
            std::ostringstream msg;
            msg << "integrator dt " << cfg.dt_us << " us too coarse for pulse "
                << p.display_name() << " (duration " << p.duration_us
                << " us): need dt <= duration/20";
            throw ConfigError(msg.str());
        }
    }

    const std::vector<double> times = sample_times(pulses, t0_us, t1_us, cfg);

    DensityMatrix rho = rho0;
    sink(times.front(), rho);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double ta = times[i - 1];
        const double tb = times[i];
        const double span = tb - ta;
        const SegmentDrive drive = drive_at(pulses, 0.5 * (ta + tb));
        if (drive.driven) {
            const Matrix3c h = build_hamiltonian(drive.rabi_a, drive.rabi_b, atom);
            const int n = std::max(1, static_cast<int>(std::ceil(span / cfg.dt_us - 1e-9)));
            const double h_step = span / n;
            for (int k = 0; k < n; ++k) rho = rk4_step(rho, h, atom, h_step);
        } else {
            rho = free_propagate(rho, atom, span);
        }
        sink(tb, rho);
    }
}

Trajectory evolve(const DensityMatrix& rho0, const AtomParams& atom, std::span<const Pulse> pulses,
                  double t0_us, double t1_us, const IntegratorConfig& cfg) {
    Trajectory traj;
    traj.sample_stride = cfg.sample_stride;
    integrate(rho0, atom, pulses, t0_us, t1_us, cfg, [&](double t, const DensityMatrix& rho) {
        traj.times_us.push_back(t);
        traj.states.push_back(rho);
    });
    return traj;
}

void throw_if_errors(const Findings& findings, const std::string& context) {
    std::string msg;
    for (const auto& f : findings) {
        if (!f.is_error()) continue;
        if (!msg.empty()) msg += "; ";
        msg += f.message;
    }
    if (!msg.empty()) throw ConfigError(context + ": " + msg);
}

const char* to_string(Channel c) { return c == Channel::A ? "A" : "B"; }

const char* to_string(PulseLabel l) {
    switch (l) {
        case PulseLabel::D: return "D";
        case PulseLabel::R1: return "R1";
        case PulseLabel::R2: return "R2";
        case PulseLabel::C1: return "C1";
        case PulseLabel::C2: return "C2";
        case PulseLabel::Custom: return "custom";
    }
    return "?";
}

Findings Pulse::validate() const {
    Findings out;
    const std::string who = "pulse " + display_name();
    if (!(duration_us > 0.0))
        out.push_back({Finding::Severity::error, "duration", who + ": duration must be > 0"});
    if (area_rad < 0.0)
        out.push_back({Finding::Severity::error, "area", who + ": area must be >= 0"});
    if (std::abs(k_dir.norm() - 1.0) > 1e-9)
        out.push_back({Finding::Severity::error, "k_dir", who + ": k_dir must be a unit vector"});
    return out;
}

}  // namespace echosim
