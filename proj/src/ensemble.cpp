#include "echosim/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace echosim {

DetuningGrid build_grid(double fwhm_khz, double span_khz, int n) {
    if (!(fwhm_khz > 0.0)) throw ConfigError("grid: fwhm must be > 0");
    if (!(span_khz > 0.0)) throw ConfigError("grid: span must be > 0");
    if (n < 1) throw ConfigError("grid: n must be >= 1");

    DetuningGrid grid;
    grid.fwhm_khz = fwhm_khz;
    grid.span_khz = span_khz;
    grid.n = n;
    grid.points_khz.reserve(n);
    grid.weights.reserve(n);

    if (n == 1) {
        grid.points_khz.push_back(0.0);
        grid.weights.push_back(1.0);
        return grid;
    }

    const double coeff = 4.0 * std::log(2.0) / (fwhm_khz * fwhm_khz);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double delta = -span_khz + 2.0 * span_khz * i / (n - 1);
        grid.points_khz.push_back(delta);
        const double w = std::exp(-coeff * delta * delta);
        grid.weights.push_back(w);
        total += w;
    }
    for (double& w : grid.weights) w /= total;
    return grid;
}

std::vector<int> select_atoms_near(const DetuningGrid& grid, double center_khz,
                                   double half_width_khz) {
    std::vector<int> out;
    for (int i = 0; i < grid.n; ++i)
        if (std::abs(grid.points_khz[i] - center_khz) <= half_width_khz) out.push_back(i);
    return out;
}

namespace {

int resolve_thread_count(int requested, int n_atoms) {
    int count = requested;
    if (count <= 0) {
        if (const char* env = std::getenv("ECHO_SIM_THREADS")) {
            count = std::atoi(env);
        }
    }
    if (count <= 0) count = static_cast<int>(std::thread::hardware_concurrency());
    if (count <= 0) count = 1;
    return std::clamp(count, 1, std::max(1, n_atoms));
}

struct AtomOutcome {
    AtomTrace trace;
    InvariantAudit audit;
    std::string error;
};

void simulate_atom(const AtomParams& atom, std::span<const Pulse> pulses,
                   const std::vector<double>& times, const EnsembleConfig& cfg,
                   AtomOutcome& out) {
    out.trace.rho13.reserve(times.size());
    out.trace.rho11.reserve(times.size());
    out.trace.rho22.reserve(times.size());
    out.trace.rho33.reserve(times.size());
    out.audit.positivity_checked = cfg.audit_positivity;
    integrate(ground_state(), atom, pulses, cfg.t0_us, cfg.t1_us, cfg.integrator,
              [&](double, const DensityMatrix& rho) {
                  out.trace.rho13.push_back(rho(0, 2));
                  out.trace.rho11.push_back(rho(0, 0).real());
                  out.trace.rho22.push_back(rho(1, 1).real());
                  out.trace.rho33.push_back(rho(2, 2).real());
                  out.audit.max_trace_error =
                      std::max(out.audit.max_trace_error, trace_error(rho));
                  out.audit.max_hermiticity_error =
                      std::max(out.audit.max_hermiticity_error, hermiticity_error(rho));
                  if (cfg.audit_positivity)
                      out.audit.min_eigenvalue =
                          std::min(out.audit.min_eigenvalue, min_eigenvalue(rho));
              });
}

}  // namespace

EnsembleResult run_ensemble(const AtomParams& atom_template, const PulseSequence& seq,
                            const DetuningGrid& grid, const EnsembleConfig& cfg) {
    throw_if_errors(validate_sequence(seq), "sequence");
    throw_if_errors(atom_template.validate(), "atom");
    if (grid.points_khz.size() != grid.weights.size() || grid.points_khz.empty())
        throw ConfigError("grid: empty or inconsistent");

    EnsembleResult result;
    result.grid = grid;
    result.times_us = sample_times(seq.pulses, cfg.t0_us, cfg.t1_us, cfg.integrator);

    const int n_atoms = static_cast<int>(grid.points_khz.size());
    std::vector<AtomOutcome> outcomes(n_atoms);

    const int n_threads = resolve_thread_count(cfg.max_threads, n_atoms);
    auto worker = [&](int first, int last) {
        for (int j = first; j < last; ++j) {
            const AtomParams atom = atom_template.with_delta_opt_khz(grid.points_khz[j]);
            try {
                simulate_atom(atom, seq.pulses, result.times_us, cfg, outcomes[j]);
            } catch (const std::exception& e) {
                outcomes[j].error = e.what();
            }
        }
    };

    if (n_threads == 1) {
        worker(0, n_atoms);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n_atoms + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int first = t * chunk;
            const int last = std::min(n_atoms, first + chunk);
            if (first >= last) break;
            pool.emplace_back(worker, first, last);
        }
        for (auto& th : pool) th.join();
    }

    for (int j = 0; j < n_atoms; ++j) {
        if (!outcomes[j].error.empty()) {
            std::ostringstream msg;
            msg << "atom " << j << " (delta " << grid.points_khz[j]
                << " kHz): " << outcomes[j].error;
            throw ConfigError(msg.str());
        }
    }

    result.atoms.reserve(n_atoms);
    for (auto& o : outcomes) {
        result.audit.max_trace_error =
            std::max(result.audit.max_trace_error, o.audit.max_trace_error);
        result.audit.max_hermiticity_error =
            std::max(result.audit.max_hermiticity_error, o.audit.max_hermiticity_error);
        result.audit.min_eigenvalue = std::min(result.audit.min_eigenvalue, o.audit.min_eigenvalue);
        result.audit.positivity_checked = o.audit.positivity_checked;
        result.atoms.push_back(std::move(o.trace));
    }

    // fixed grid-order reduction keeps P(t) bit-identical for any thread count
    const std::size_t n_samples = result.times_us.size();
    result.polarization.assign(n_samples, Complex(0.0, 0.0));
    for (int j = 0; j < n_atoms; ++j) {
        const double w = grid.weights[j];
        const auto& r13 = result.atoms[j].rho13;
        for (std::size_t i = 0; i < n_samples; ++i) result.polarization[i] += w * r13[i];
    }
    return result;
}

const std::vector<Complex>& polarization(const EnsembleResult& result) {
    return result.polarization;
}

std::vector<double> intensity(const EnsembleResult& result) {
    std::vector<double> out;
    out.reserve(result.polarization.size());
    for (const Complex& p : result.polarization) out.push_back(std::norm(p));
    return out;
}

std::vector<Complex> subgrid_polarization(const EnsembleResult& result, double center_khz,
                                          double half_width_khz) {
    const auto atoms = select_atoms_near(result.grid, center_khz, half_width_khz);
    std::vector<Complex> out(result.times_us.size(), Complex(0.0, 0.0));
    for (int j : atoms) {
        const double w = result.grid.weights[j];
        const auto& r13 = result.atoms[j].rho13;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * r13[i];
    }
    return out;
}

PopulationTrace population_trace(const EnsembleResult& result) {
    const std::size_t n_samples = result.times_us.size();
    PopulationTrace trace;
    trace.rho11.assign(n_samples, 0.0);
    trace.rho22.assign(n_samples, 0.0);
    trace.rho33.assign(n_samples, 0.0);
    for (std::size_t j = 0; j < result.atoms.size(); ++j) {
        const double w = result.grid.weights[j];
        const AtomTrace& a = result.atoms[j];
        for (std::size_t i = 0; i < n_samples; ++i) {
            trace.rho11[i] += w * a.rho11[i];
            trace.rho22[i] += w * a.rho22[i];
            trace.rho33[i] += w * a.rho33[i];
        }
    }
    return trace;
}

std::vector<EchoEvent> detect_echoes(const std::vector<double>& times_us,
                                     const std::vector<Complex>& p,
                                     const std::vector<EchoWindow>& windows,
                                     double threshold_frac) {
    if (times_us.size() != p.size())
        throw ConfigError("detect_echoes: time and polarization lengths differ");
    for (const auto& w : windows) {
        if (!(w.t_lo_us < w.t_hi_us))
            throw ConfigError("window " + w.label + ": t_lo must be below t_hi");
        if (!times_us.empty() &&
            (w.t_lo_us < times_us.front() - 1e-9 || w.t_hi_us > times_us.back() + 1e-9))
            throw ConfigError("window " + w.label + ": outside the simulated span");
    }
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (std::size_t j = i + 1; j < windows.size(); ++j) {
            if (windows[i].t_lo_us < windows[j].t_hi_us &&
                windows[j].t_lo_us < windows[i].t_hi_us)
                throw ConfigError("windows " + windows[i].label + " and " + windows[j].label +
                                  " overlap");
        }
    }

    double global_max = 0.0;
    for (const Complex& v : p) global_max = std::max(global_max, std::norm(v));

    std::vector<EchoEvent> events;
    for (const auto& w : windows) {
        double best = -1.0;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < times_us.size(); ++i) {
            if (times_us[i] < w.t_lo_us || times_us[i] > w.t_hi_us) continue;
            const double v = std::norm(p[i]);
            if (v > best) {
                best = v;
                best_i = i;
            }
        }
        if (best > threshold_frac * global_max && best >= 0.0 && global_max > 0.0) {
            events.push_back({w.label, times_us[best_i], p[best_i], best});
        }
    }
    return events;
}

namespace {

double window_energy(const std::vector<double>& times, const std::vector<Complex>& p,
                     const EchoWindow& w) {
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i - 1] < w.t_lo_us || times[i] > w.t_hi_us) continue;
        acc += 0.5 * (std::norm(p[i - 1]) + std::norm(p[i])) * (times[i] - times[i - 1]);
    }
    return acc;
}

// Every pi pulse drags each atom's rho13 through a ~0.5 transient, so a
// search window must not reach into any drive interval; trim it to the
// pulse-free region around the predicted peak.
EchoWindow trim_to_pulse_free(EchoWindow w, double t_pred, const PulseSequence& seq) {
    constexpr double margin = 0.05;
    for (const auto& p : seq.pulses) {
        if (p.t_end_us() <= t_pred && p.t_end_us() + margin > w.t_lo_us)
            w.t_lo_us = p.t_end_us() + margin;
        if (p.t_start_us >= t_pred && p.t_start_us - margin < w.t_hi_us)
            w.t_hi_us = p.t_start_us - margin;
    }
    return w;
}

}  // namespace

ScanResult scan_rephase_delay(const AtomParams& atom_template, const PulseSequence& base,
                              const DetuningGrid& grid, const std::vector<double>& r1_centers_us,
                              const ScanOptions& opt) {
    const Pulse* base_r1 = base.find(PulseLabel::R1);
    if (base_r1 == nullptr) throw ConfigError("scan: base sequence has no R1 pulse");

    ScanResult result;
    for (double t_r1 : r1_centers_us) {
        ScanRow row;
        row.t_r1_us = t_r1;
        const double shift = t_r1 - base_r1->t_center_us();

        PulseSequence seq = base;
        for (auto& pulse : seq.pulses) {
            // the protocol tail (R1 and everything after it) moves rigidly
            if (pulse.t_start_us >= base_r1->t_start_us - 1e-12 &&
                pulse.label != PulseLabel::D)
                pulse.t_start_us += shift;
        }
        std::sort(seq.pulses.begin(), seq.pulses.end(),
                  [](const Pulse& a, const Pulse& b) { return a.t_start_us < b.t_start_us; });

        const Findings findings = validate_sequence(seq);
        if (has_errors(findings)) {
            for (const auto& f : findings)
                if (f.is_error()) {
                    row.error = f.message;
                    break;
                }
            result.rows.push_back(row);
            continue;
        }

        try {
            const TimingPrediction pred = predict_timing(seq);
            EchoWindow we1 = trim_to_pulse_free(
                {"E1", pred.e1() - opt.window_half_us, pred.e1() + opt.window_half_us},
                pred.e1(), seq);
            EchoWindow we2;
            const bool has_e2 = !pred.t_e2_us.empty() && !pred.no_echo;
            if (has_e2)
                we2 = trim_to_pulse_free(
                    {"E2", pred.e2() - opt.window_half_us, pred.e2() + opt.window_half_us},
                    pred.e2(), seq);

            EnsembleConfig ens = opt.ensemble;
            ens.t1_us = std::max(ens.t1_us, (has_e2 ? we2.t_hi_us : we1.t_hi_us) + 1.0);
            const EnsembleResult run = run_ensemble(atom_template, seq, grid, ens);

            std::vector<EchoWindow> windows{we1};
            if (has_e2) windows.push_back(we2);
            const auto events = detect_echoes(run.times_us, run.polarization, windows,
                                              opt.threshold_frac);
            for (const auto& ev : events) {
                if (ev.label == "E1") {
                    row.e1_abs = std::abs(ev.amplitude);
                    row.e1_t_us = ev.t_peak_us;
                    row.e1_energy = window_energy(run.times_us, run.polarization, we1);
                } else if (ev.label == "E2") {
                    row.e2_abs = std::abs(ev.amplitude);
                    row.e2_t_us = ev.t_peak_us;
                    row.e2_energy = window_energy(run.times_us, run.polarization, we2);
                }
            }
            row.ok = true;
        } catch (const ValidationError& e) {
            row.error = e.what();
        }
        result.rows.push_back(row);
    }
    return result;
}

}  // namespace echosim
