#include <pybind11/eigen.h>
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "echosim/bloch.hpp"
#include "echosim/config.hpp"
#include "echosim/ensemble.hpp"
#include "echosim/output.hpp"
#include "echosim/protocol.hpp"
#include "echosim/version.hpp"

namespace py = pybind11;
using namespace echosim;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Photon-echo simulator core: three-level Lambda ensemble dynamics, "
              "echo protocols and phase matching";
    m.attr("__version__") = version_string;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    py::enum_<Channel>(m, "Channel").value("A", Channel::A).value("B", Channel::B);

    py::enum_<PulseLabel>(m, "PulseLabel")
        .value("D", PulseLabel::D)
        .value("R1", PulseLabel::R1)
        .value("R2", PulseLabel::R2)
        .value("C1", PulseLabel::C1)
        .value("C2", PulseLabel::C2)
        .value("Custom", PulseLabel::Custom);

    py::class_<AtomParams>(m, "AtomParams")
        .def(py::init<>())
        .def_readwrite("delta_opt_khz", &AtomParams::delta_opt_khz)
        .def_readwrite("delta_spin_khz", &AtomParams::delta_spin_khz)
        .def_readwrite("decay_31_khz", &AtomParams::decay_31_khz)
        .def_readwrite("decay_32_khz", &AtomParams::decay_32_khz)
        .def_readwrite("decay_21_khz", &AtomParams::decay_21_khz)
        .def_readwrite("dephasing_31_khz", &AtomParams::dephasing_31_khz)
        .def_readwrite("dephasing_32_khz", &AtomParams::dephasing_32_khz)
        .def_readwrite("dephasing_21_khz", &AtomParams::dephasing_21_khz)
        .def("with_delta_opt_khz", &AtomParams::with_delta_opt_khz);

    py::class_<Pulse>(m, "Pulse")
        .def(py::init<>())
        .def_readwrite("channel", &Pulse::channel)
        .def_readwrite("label", &Pulse::label)
        .def_readwrite("name", &Pulse::name)
        .def_readwrite("t_start_us", &Pulse::t_start_us)
        .def_readwrite("duration_us", &Pulse::duration_us)
        .def_readwrite("area_rad", &Pulse::area_rad)
        .def_readwrite("carrier_phase_rad", &Pulse::carrier_phase_rad)
        .def_readwrite("k_dir", &Pulse::k_dir)
        .def_readwrite("omega_rad_per_s", &Pulse::omega_rad_per_s)
        .def_property_readonly("t_center_us", &Pulse::t_center_us)
        .def_property_readonly("t_end_us", &Pulse::t_end_us);

    py::class_<PulseSequence>(m, "PulseSequence")
        .def(py::init<>())
        .def_readwrite("pulses", &PulseSequence::pulses);

    py::class_<Finding>(m, "Finding")
        .def_property_readonly("is_error", &Finding::is_error)
        .def_readonly("code", &Finding::code)
        .def_readonly("message", &Finding::message);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times_us", &Trajectory::times_us)
        .def_readonly("states", &Trajectory::states);

    py::class_<BlochVector>(m, "BlochVector")
        .def_readonly("u", &BlochVector::u)
        .def_readonly("v", &BlochVector::v)
        .def_readonly("w", &BlochVector::w);

    py::class_<DetuningGrid>(m, "DetuningGrid")
        .def_readonly("points_khz", &DetuningGrid::points_khz)
        .def_readonly("weights", &DetuningGrid::weights)
        .def_readonly("fwhm_khz", &DetuningGrid::fwhm_khz)
        .def_readonly("span_khz", &DetuningGrid::span_khz)
        .def_readonly("n", &DetuningGrid::n);

    py::class_<AtomTrace>(m, "AtomTrace")
        .def_readonly("rho13", &AtomTrace::rho13)
        .def_readonly("rho11", &AtomTrace::rho11)
        .def_readonly("rho22", &AtomTrace::rho22)
        .def_readonly("rho33", &AtomTrace::rho33);

    py::class_<InvariantAudit>(m, "InvariantAudit")
        .def_readonly("max_trace_error", &InvariantAudit::max_trace_error)
        .def_readonly("max_hermiticity_error", &InvariantAudit::max_hermiticity_error)
        .def_readonly("min_eigenvalue", &InvariantAudit::min_eigenvalue);

    py::class_<EnsembleResult>(m, "EnsembleResult")
        .def_readonly("grid", &EnsembleResult::grid)
        .def_readonly("times_us", &EnsembleResult::times_us)
        .def_readonly("atoms", &EnsembleResult::atoms)
        .def_readonly("polarization", &EnsembleResult::polarization)
        .def_readonly("audit", &EnsembleResult::audit);

    py::class_<PopulationTrace>(m, "PopulationTrace")
        .def_readonly("rho11", &PopulationTrace::rho11)
        .def_readonly("rho22", &PopulationTrace::rho22)
        .def_readonly("rho33", &PopulationTrace::rho33);

    py::class_<EchoWindow>(m, "EchoWindow")
        .def(py::init([](std::string label, double lo, double hi) {
                 return EchoWindow{std::move(label), lo, hi};
             }),
             py::arg("label"), py::arg("t_lo_us"), py::arg("t_hi_us"))
        .def_readwrite("label", &EchoWindow::label)
        .def_readwrite("t_lo_us", &EchoWindow::t_lo_us)
        .def_readwrite("t_hi_us", &EchoWindow::t_hi_us);

    py::class_<EchoEvent>(m, "EchoEvent")
        .def_readonly("label", &EchoEvent::label)
        .def_readonly("t_peak_us", &EchoEvent::t_peak_us)
        .def_readonly("amplitude", &EchoEvent::amplitude)
        .def_readonly("intensity", &EchoEvent::intensity);

    py::class_<ScanRow>(m, "ScanRow")
        .def_readonly("t_r1_us", &ScanRow::t_r1_us)
        .def_readonly("ok", &ScanRow::ok)
        .def_readonly("error", &ScanRow::error)
        .def_readonly("e1_abs", &ScanRow::e1_abs)
        .def_readonly("e2_abs", &ScanRow::e2_abs)
        .def_readonly("e1_t_us", &ScanRow::e1_t_us)
        .def_readonly("e2_t_us", &ScanRow::e2_t_us)
        .def_readonly("e1_energy", &ScanRow::e1_energy)
        .def_readonly("e2_energy", &ScanRow::e2_energy);

    py::class_<ScanResult>(m, "ScanResult").def_readonly("rows", &ScanResult::rows);

    py::class_<E2Prediction>(m, "E2Prediction")
        .def_readonly("t_us", &E2Prediction::t_us)
        .def_readonly("no_echo", &E2Prediction::no_echo);

    py::class_<TimingPrediction>(m, "TimingPrediction")
        .def_readonly("t_e1_us", &TimingPrediction::t_e1_us)
        .def_readonly("t_e2_us", &TimingPrediction::t_e2_us)
        .def_readonly("delta_t_us", &TimingPrediction::delta_t_us)
        .def_readonly("no_echo", &TimingPrediction::no_echo);

    py::class_<PhaseMatchResult>(m, "PhaseMatchResult")
        .def_readonly("k_out", &PhaseMatchResult::k_out)
        .def_readonly("omega_out", &PhaseMatchResult::omega_out)
        .def_readonly("mismatch", &PhaseMatchResult::mismatch)
        .def_readonly("direction", &PhaseMatchResult::direction)
        .def_readonly("backward", &PhaseMatchResult::backward);

    py::class_<SimJob>(m, "SimJob")
        .def_readonly("version", &SimJob::version)
        .def_readonly("preset", &SimJob::preset)
        .def_readonly("atom", &SimJob::atom)
        .def_readonly("sequence", &SimJob::sequence)
        .def_readonly("grid_fwhm_khz", &SimJob::grid_fwhm_khz)
        .def_readonly("grid_span_khz", &SimJob::grid_span_khz)
        .def_readonly("grid_n", &SimJob::grid_n)
        .def_readonly("t0_us", &SimJob::t0_us)
        .def_readonly("t1_us", &SimJob::t1_us)
        .def_readonly("threshold_frac", &SimJob::threshold_frac)
        .def("make_grid", &SimJob::make_grid)
        .def("effective_windows", &SimJob::effective_windows);

    // single-atom dynamics
    m.def("ground_state", &ground_state);
    m.def("pure_state", &pure_state, py::arg("level"));
    m.def("build_hamiltonian", &build_hamiltonian, py::arg("rabi_a"), py::arg("rabi_b"),
          py::arg("atom"));
    m.def("master_rhs", &master_rhs, py::arg("rho"), py::arg("h"), py::arg("atom"));
    m.def("free_propagate", &free_propagate, py::arg("rho"), py::arg("atom"), py::arg("dt_us"));
    m.def("hard_pulse_rotation", &hard_pulse_rotation, py::arg("rho"), py::arg("channel"),
          py::arg("area_rad"), py::arg("phase_rad") = 0.0);
    m.def("bloch_vector", &bloch_vector, py::arg("rho"));
    m.def(
        "evolve",
        [](const DensityMatrix& rho0, const AtomParams& atom, const PulseSequence& seq,
           double t0, double t1, double dt, int stride) {
            return evolve(rho0, atom, seq.pulses, t0, t1, IntegratorConfig{dt, stride});
        },
        py::arg("rho0"), py::arg("atom"), py::arg("sequence"), py::arg("t0_us"),
        py::arg("t1_us"), py::arg("dt_us") = 0.002, py::arg("stride") = 25);

    // protocol
    m.def(
        "make_two_pulse_sequence",
        [](double t_d, double t_r1, double area_d, double area_r1, double dur_d, double dur_r1) {
            return make_two_pulse_sequence(t_d, t_r1, {area_d, area_r1, dur_d, dur_r1});
        },
        py::arg("t_d_us"), py::arg("t_r1_us"), py::arg("area_d_rad") = units::pi / 10,
        py::arg("area_r1_rad") = units::pi, py::arg("duration_d_us") = 1.0,
        py::arg("duration_r1_us") = 0.1);
    m.def(
        "make_apc_sequence",
        [](double t_d, double t_r1, double t_r2, double t_c1, double t_c2, double area_d,
           double area_r, double area_c, double dur_d, double dur_rc) {
            return make_apc_sequence(t_d, t_r1, t_r2, t_c1, t_c2,
                                     {area_d, area_r, area_c, dur_d, dur_rc});
        },
        py::arg("t_d_us"), py::arg("t_r1_us"), py::arg("t_r2_us"), py::arg("t_c1_us"),
        py::arg("t_c2_us"), py::arg("area_d_rad") = units::pi / 10,
        py::arg("area_r_rad") = units::pi, py::arg("area_c_rad") = units::pi,
        py::arg("duration_d_us") = 1.0, py::arg("duration_rc_us") = 0.1);
    m.def(
        "predict_e1_time",
        [](double t_d, double t_r1) { return predict_e1_time(t_d, t_r1); },
        py::arg("t_d_center_us"), py::arg("t_r1_center_us"));
    m.def("predict_e2_time", &predict_e2_time, py::arg("t_c2_us"), py::arg("t_r2_us"),
          py::arg("t_e1_us"), py::arg("delta_t_us"),
          py::arg("halt_bound_us") = std::optional<double>());
    m.def("predict_timing", &predict_timing, py::arg("sequence"),
          py::arg("delta_t_override") = std::optional<double>(),
          py::arg("halt_bound_us") = std::optional<double>());
    m.def("phase_match_e1", &phase_match_e1, py::arg("k_d"), py::arg("k_r1"));
    m.def("phase_match_e2", &phase_match_e2, py::arg("k_d"), py::arg("k_c1"), py::arg("k_c2"),
          py::arg("omega_d"), py::arg("omega_c1"), py::arg("omega_c2"));
    m.def(
        "validate_sequence", [](const PulseSequence& seq) { return validate_sequence(seq); },
        py::arg("sequence"));

    // ensemble
    m.def("build_grid", &build_grid, py::arg("fwhm_khz"), py::arg("span_khz"), py::arg("n"));
    m.def(
        "run_ensemble",
        [](const AtomParams& atom, const PulseSequence& seq, const DetuningGrid& grid, double t0,
           double t1, double dt, int stride, bool audit_positivity, int threads) {
            EnsembleConfig cfg;
            cfg.integrator = IntegratorConfig{dt, stride};
            cfg.t0_us = t0;
            cfg.t1_us = t1;
            cfg.audit_positivity = audit_positivity;
            cfg.max_threads = threads;
            return run_ensemble(atom, seq, grid, cfg);
        },
        py::arg("atom"), py::arg("sequence"), py::arg("grid"), py::arg("t0_us") = 0.0,
        py::arg("t1_us") = 80.0, py::arg("dt_us") = 0.002, py::arg("stride") = 25,
        py::arg("audit_positivity") = true, py::arg("threads") = 0);
    m.def("population_trace", &population_trace, py::arg("result"));
    m.def("intensity", &intensity, py::arg("result"));
    m.def("subgrid_polarization", &subgrid_polarization, py::arg("result"), py::arg("center_khz"),
          py::arg("half_width_khz") = 1.0);
    m.def("detect_echoes", &detect_echoes, py::arg("times_us"), py::arg("polarization"),
          py::arg("windows"), py::arg("threshold_frac") = 0.05);
    m.def(
        "scan_rephase_delay",
        [](const AtomParams& atom, const PulseSequence& base, const DetuningGrid& grid,
           const std::vector<double>& r1_centers, double t0, double t1, double dt, int stride,
           double window_half, double threshold) {
            ScanOptions opt;
            opt.ensemble.integrator = IntegratorConfig{dt, stride};
            opt.ensemble.t0_us = t0;
            opt.ensemble.t1_us = t1;
            opt.window_half_us = window_half;
            opt.threshold_frac = threshold;
            return scan_rephase_delay(atom, base, grid, r1_centers, opt);
        },
        py::arg("atom"), py::arg("base"), py::arg("grid"), py::arg("r1_centers_us"),
        py::arg("t0_us") = 0.0, py::arg("t1_us") = 80.0, py::arg("dt_us") = 0.002,
        py::arg("stride") = 25, py::arg("window_half_us") = 3.0,
        py::arg("threshold_frac") = 0.05);

    // config
    m.def("parse_config", &parse_config, py::arg("json_text"));
    m.def("preset_job", &preset_job, py::arg("name"));
    m.def("preset_names", &preset_names);
    m.def("canonical_json", &canonical_json, py::arg("job"));
    m.def("job_hash", &job_hash, py::arg("job"));
}
