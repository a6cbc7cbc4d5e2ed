#include "echosim/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "echosim/bloch.hpp"
#include "echosim/config.hpp"
#include "echosim/ensemble.hpp"
#include "echosim/output.hpp"
#include "echosim/protocol.hpp"
#include "echosim/version.hpp"

namespace echosim {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string vec3(const Eigen::Vector3d& v) {
    return "[" + num(v.x()) + ", " + num(v.y()) + ", " + num(v.z()) + "]";
}

SimJob load_job(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void print_warnings(const SimJob& job) {
    for (const auto& f : job.warnings)
        std::cerr << "warning: " << f.message << "\n";
}

int run_simulate(const std::string& config_path) {
    const SimJob job = load_job(config_path);
    print_warnings(job);

    EnsembleConfig cfg{job.integrator, job.t0_us, job.t1_us};
    const auto start = std::chrono::steady_clock::now();
    const EnsembleResult result = run_ensemble(job.atom, job.sequence, job.make_grid(), cfg);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    const auto windows = job.effective_windows();
    const auto echoes =
        detect_echoes(result.times_us, result.polarization, windows, job.threshold_frac);

    const ResultBundle bundle = make_bundle(job, result, echoes, wall_ms);
    emit_results(bundle, job.outputs);

    std::cout << "job " << bundle.job_hash << ": " << job.sequence.pulses.size() << " pulses, "
              << result.grid.n << " atoms, " << result.times_us.size() << " samples\n";
    for (const auto& e : echoes)
        std::cout << e.label << ": t_peak_us = " << num(e.t_peak_us)
                  << ", abs = " << num(std::abs(e.amplitude))
                  << ", intensity = " << num(e.intensity) << "\n";
    if (echoes.empty()) std::cout << "no echoes above threshold\n";
    for (const auto& o : job.outputs)
        if (o.kind != "scan") std::cout << "wrote " << o.path << "\n";
    return 0;
}

int run_scan(const std::string& config_path, const std::vector<double>& r1_centers) {
    const SimJob job = load_job(config_path);
    print_warnings(job);
    if (r1_centers.empty()) throw ConfigError("scan: provide at least one --r1 time");

    ScanOptions opt;
    opt.ensemble = EnsembleConfig{job.integrator, job.t0_us, job.t1_us};
    opt.threshold_frac = job.threshold_frac;
    const ScanResult scan =
        scan_rephase_delay(job.atom, job.sequence, job.make_grid(), r1_centers, opt);

    ResultBundle bundle;
    bundle.job_hash = job_hash(job);
    bundle.version = version_string;
    bundle.scan = scan;
    emit_results(bundle, job.outputs);

    std::cout << format_scan_csv(scan);
    for (const auto& o : job.outputs)
        if (o.kind == "scan") std::cout << "wrote " << o.path << "\n";
    return 0;
}

int run_predict(const std::string& config_path) {
    const SimJob job = load_job(config_path);
    print_warnings(job);

    const PulseSequence& seq = job.sequence;
    std::cout << "sequence: " << to_string(seq.tag) << " (" << seq.pulses.size() << " pulses)\n";

    const TimingPrediction pred = predict_timing(seq);
    std::cout << "t_d_us = " << num(pred.t_d_us) << "\n";
    std::cout << "t_r1_us = " << num(pred.t_r1_us) << "\n";
    if (!pred.t_e2_us.empty()) {
        std::cout << "t_r2_us = " << num(pred.t_r2_us) << "\n";
        std::cout << "t_c1_us = " << num(pred.t_c1_us) << "\n";
        std::cout << "t_c2_us = " << num(pred.t_c2_us) << "\n";
        std::cout << "delta_t_us = " << num(pred.delta_t_us) << "\n";
    }
    auto list = [](const std::vector<double>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
        return out;
    };
    std::cout << "t_e1_us = " << list(pred.t_e1_us) << "\n";
    if (!pred.t_e2_us.empty()) {
        std::cout << "t_e2_us = " << list(pred.t_e2_us) << "\n";
        std::cout << "no_echo = " << (pred.no_echo ? "true" : "false") << "\n";
    }

    const Pulse* d = seq.data_pulses().empty() ? nullptr : seq.data_pulses().front();
    const Pulse* r1 = seq.find(PulseLabel::R1);
    if (d && r1) {
        const auto e1 = phase_match_e1(d->k_vector(), r1->k_vector());
        std::cout << "E1 phase match: k_out = " << vec3(e1.k_out)
                  << " rad/m, mismatch = " << num(e1.mismatch)
                  << " rad/m, direction = " << vec3(e1.direction)
                  << ", backward = " << (e1.backward ? "true" : "false") << "\n";
    }
    const Pulse* c1 = seq.find(PulseLabel::C1);
    const Pulse* c2 = seq.find(PulseLabel::C2);
    if (d && c1 && c2) {
        const auto e2 = phase_match_e2(d->k_vector(), c1->k_vector(), c2->k_vector(),
                                       d->omega_rad_per_s, c1->omega_rad_per_s,
                                       c2->omega_rad_per_s);
        std::cout << "E2 phase match: k_out = " << vec3(e2.k_out)
                  << " rad/m, mismatch = " << num(e2.mismatch)
                  << " rad/m, direction = " << vec3(e2.direction)
                  << ", backward = " << (e2.backward ? "true" : "false") << "\n";
    }
    return 0;
}

int run_bloch(const std::string& config_path, double delta_khz, const std::string& out_path) {
    const SimJob job = load_job(config_path);
    print_warnings(job);

    const AtomParams atom = job.atom.with_delta_opt_khz(delta_khz);
    const Trajectory traj =
        evolve(ground_state(), atom, job.sequence.pulses, job.t0_us, job.t1_us, job.integrator);

    std::ostringstream csv;
    csv << "t_us,u,v,w\n";
    for (std::size_t i = 0; i < traj.times_us.size(); ++i) {
        const BlochVector b = bloch_vector(traj.states[i]);
        csv << num(traj.times_us[i]) << ',' << num(b.u) << ',' << num(b.v) << ',' << num(b.w)
            << '\n';
    }
    {
        std::ofstream out(out_path + ".tmp", std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
        out << csv.str();
    }
    std::filesystem::rename(out_path + ".tmp", out_path);

    std::cout << "atom delta = " << num(delta_khz) << " kHz, " << traj.times_us.size()
              << " samples\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Photon-echo simulator for a three-level Lambda ensemble"};
    app.set_version_flag("--version", version_string);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<double> r1_centers;
    double delta_khz = 0.0;
    std::string bloch_out = "bloch_trace.csv";

    auto* simulate = app.add_subcommand("simulate", "Run the configured ensemble simulation");
    simulate->add_option("config", config_path, "JSON config file")->required();

    auto* scan = app.add_subcommand("scan", "Rephasing-delay scan over R1 times");
    scan->add_option("config", config_path, "JSON config file")->required();
    scan->add_option("--r1", r1_centers, "R1 center times in us")->required()->expected(-1);

    auto* predict = app.add_subcommand("predict", "Echo timing and phase matching, no integration");
    predict->add_option("config", config_path, "JSON config file")->required();

    auto* bloch = app.add_subcommand("bloch", "Single-atom Bloch trajectory export");
    bloch->add_option("config", config_path, "JSON config file")->required();
    bloch->add_option("--delta", delta_khz, "atom detuning in kHz")->required();
    bloch->add_option("--out", bloch_out, "output CSV path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out;
        const int code = app.exit(e, out, out);
        std::ostream& sink = (code == 0) ? std::cout : std::cerr;
        sink << out.str();
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return run_simulate(config_path);
        if (scan->parsed()) return run_scan(config_path, r1_centers);
        if (predict->parsed()) return run_predict(config_path);
        if (bloch->parsed()) return run_bloch(config_path, delta_khz, bloch_out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace echosim
