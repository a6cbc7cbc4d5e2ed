#pragma once

#include <complex>
#include <string>
#include <vector>

#include "echosim/atom.hpp"
#include "echosim/bloch.hpp"
#include "echosim/protocol.hpp"

namespace echosim {

/// Gaussian-weighted detuning abscissae for the inhomogeneous ensemble.
struct DetuningGrid {
    std::vector<double> points_khz;  // uniform in [-span, +span]
    std::vector<double> weights;     // Gaussian of the given FWHM, sum = 1
    double fwhm_khz = 60.0;
    double span_khz = 100.0;
    int n = 201;
};

/// n uniformly spaced points in [-span, +span] with normalized Gaussian
/// weights; n = 1 degenerates to a single resonant atom of weight 1.
DetuningGrid build_grid(double fwhm_khz, double span_khz, int n);

/// Indices of grid atoms with |delta - center| <= half_width (sub-ensemble
/// filter, e.g. the narrow detuned group used for Bloch-vector plots).
std::vector<int> select_atoms_near(const DetuningGrid& grid, double center_khz,
                                   double half_width_khz = 1.0);

/// Reduced per-atom record: optical coherence and populations per sample.
struct AtomTrace {
    std::vector<Complex> rho13;
    std::vector<double> rho11, rho22, rho33;
};

/// Worst-case state-invariant violations seen over a run.
struct InvariantAudit {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 1.0;
    bool positivity_checked = false;
};

struct EnsembleResult {
    DetuningGrid grid;
    std::vector<double> times_us;
    std::vector<AtomTrace> atoms;             // one per grid point, grid order
    std::vector<Complex> polarization;        // P(t) = sum_j w_j rho13_j(t)
    InvariantAudit audit;
};

struct EnsembleConfig {
    IntegratorConfig integrator;
    double t0_us = 0.0;
    double t1_us = 80.0;
    bool audit_positivity = true;
    /// Worker threads; 0 consults ECHO_SIM_THREADS, then hardware_concurrency.
    int max_threads = 0;
};

/// Evolves every grid atom (template with delta_opt overridden) independently
/// and accumulates P(t) in fixed grid order, so results are bit-identical for
/// any worker count. Sequence errors are rethrown annotated with "atom <j>".
EnsembleResult run_ensemble(const AtomParams& atom_template, const PulseSequence& seq,
                            const DetuningGrid& grid, const EnsembleConfig& cfg = {});

/// The stored macroscopic coherence P(t).
const std::vector<Complex>& polarization(const EnsembleResult& result);

/// |P(t)|^2.
std::vector<double> intensity(const EnsembleResult& result);

/// P(t) restricted to atoms within half_width of center (weights un-renormalized).
std::vector<Complex> subgrid_polarization(const EnsembleResult& result, double center_khz,
                                          double half_width_khz = 1.0);

struct PopulationTrace {
    std::vector<double> rho11, rho22, rho33;  // ensemble-averaged
};

PopulationTrace population_trace(const EnsembleResult& result);

struct EchoWindow {
    std::string label;
    double t_lo_us = 0.0;
    double t_hi_us = 0.0;
};

/// Detected coherence burst: the |P|^2 maximum inside one search window.
struct EchoEvent {
    std::string label;
    double t_peak_us = 0.0;
    Complex amplitude;        // P at the peak sample
    double intensity = 0.0;   // |amplitude|^2
};

/// Per window, the peak of |P|^2 if it exceeds threshold_frac times the
/// global maximum of |P|^2; quiet windows produce no event. Windows must be
/// disjoint and inside the sampled span.
std::vector<EchoEvent> detect_echoes(const std::vector<double>& times_us,
                                     const std::vector<Complex>& p,
                                     const std::vector<EchoWindow>& windows,
                                     double threshold_frac = 0.05);

struct ScanRow {
    double t_r1_us = 0.0;  // R1 center for this row
    bool ok = false;
    std::string error;
    double e1_abs = 0.0, e2_abs = 0.0;        // peak |P| in each window
    double e1_t_us = 0.0, e2_t_us = 0.0;      // peak times
    double e1_energy = 0.0, e2_energy = 0.0;  // integral of |P|^2 over window
};

struct ScanResult {
    std::vector<ScanRow> rows;
};

struct ScanOptions {
    EnsembleConfig ensemble;
    double window_half_us = 3.0;
    double threshold_frac = 0.05;
};

/// Rephasing-delay scan: one ensemble run per requested R1 center time.
/// R2, C1 and C2 shift rigidly with R1 (all post-R1 gaps preserved), so the
/// double-rephased echo keeps its delay budget while the D-R1 separation
/// scans; data pulses stay put. Rows whose shifted sequence fails validation
/// carry the error and the scan continues.
ScanResult scan_rephase_delay(const AtomParams& atom_template, const PulseSequence& base,
                              const DetuningGrid& grid, const std::vector<double>& r1_centers_us,
                              const ScanOptions& opt = {});

}  // namespace echosim
