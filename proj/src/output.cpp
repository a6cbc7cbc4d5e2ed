#include "echosim/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "echosim/version.hpp"

namespace echosim {

namespace {

// All result files use 9 significant digits, fixed column order and '\n'
// line ends, so identical runs serialize to identical bytes.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);  // files only ever appear complete
}

}  // namespace

ResultBundle make_bundle(const SimJob& job, const EnsembleResult& result,
                         const std::vector<EchoEvent>& echoes, double wall_ms) {
    ResultBundle bundle;
    bundle.job_hash = job_hash(job);
    bundle.version = version_string;
    bundle.wall_ms = wall_ms;
    bundle.times_us = result.times_us;
    bundle.polarization = result.polarization;
    bundle.populations = population_trace(result);
    bundle.echoes = echoes;
    return bundle;
}

std::string format_timeseries_csv(const ResultBundle& b) {
    std::ostringstream out;
    out << "t_us,re_P,im_P,intensity,rho11,rho22,rho33\n";
    for (std::size_t i = 0; i < b.times_us.size(); ++i) {
        const Complex p = b.polarization[i];
        out << num(b.times_us[i]) << ',' << num(p.real()) << ',' << num(p.imag()) << ','
            << num(std::norm(p)) << ',' << num(b.populations.rho11[i]) << ','
            << num(b.populations.rho22[i]) << ',' << num(b.populations.rho33[i]) << '\n';
    }
    return out.str();
}

std::string format_echoes_csv(const ResultBundle& b) {
    std::ostringstream out;
    out << "label,t_peak_us,re_amp,im_amp,intensity\n";
    for (const auto& e : b.echoes) {
        out << e.label << ',' << num(e.t_peak_us) << ',' << num(e.amplitude.real()) << ','
            << num(e.amplitude.imag()) << ',' << num(e.intensity) << '\n';
    }
    return out.str();
}

std::string format_scan_csv(const ScanResult& scan) {
    std::ostringstream out;
    out << "t_r1_us,status,e1_abs,e2_abs,e1_t_us,e2_t_us,e1_energy,e2_energy\n";
    for (const auto& r : scan.rows) {
        out << num(r.t_r1_us) << ',' << (r.ok ? "ok" : "error") << ',' << num(r.e1_abs) << ','
            << num(r.e2_abs) << ',' << num(r.e1_t_us) << ',' << num(r.e2_t_us) << ','
            << num(r.e1_energy) << ',' << num(r.e2_energy) << '\n';
    }
    return out.str();
}

namespace {

std::string metadata_json(const ResultBundle& b) {
    std::ostringstream out;
    out << "\"metadata\": {\"job_hash\": " << quoted(b.job_hash)
        << ", \"version\": " << quoted(b.version) << ", \"wall_ms\": " << num(b.wall_ms) << "}";
    return out.str();
}

std::string array_json(const char* name, const std::vector<double>& v) {
    std::ostringstream out;
    out << quoted(name) << ": [";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << num(v[i]);
    out << "]";
    return out.str();
}

}  // namespace

std::string format_timeseries_json(const ResultBundle& b) {
    std::vector<double> re, im, inten;
    re.reserve(b.polarization.size());
    for (const Complex& p : b.polarization) {
        re.push_back(p.real());
        im.push_back(p.imag());
        inten.push_back(std::norm(p));
    }
    std::ostringstream out;
    out << "{\n  " << metadata_json(b) << ",\n  " << array_json("t_us", b.times_us) << ",\n  "
        << array_json("re_P", re) << ",\n  " << array_json("im_P", im) << ",\n  "
        << array_json("intensity", inten) << ",\n  " << array_json("rho11", b.populations.rho11)
        << ",\n  " << array_json("rho22", b.populations.rho22) << ",\n  "
        << array_json("rho33", b.populations.rho33) << "\n}\n";
    return out.str();
}

std::string format_echoes_json(const ResultBundle& b) {
    std::ostringstream out;
    out << "{\n  " << metadata_json(b) << ",\n  \"echoes\": [";
    for (std::size_t i = 0; i < b.echoes.size(); ++i) {
        const auto& e = b.echoes[i];
        out << (i ? "," : "") << "\n    {\"label\": " << quoted(e.label)
            << ", \"t_peak_us\": " << num(e.t_peak_us)
            << ", \"re_amp\": " << num(e.amplitude.real())
            << ", \"im_amp\": " << num(e.amplitude.imag())
            << ", \"intensity\": " << num(e.intensity) << "}";
    }
    out << (b.echoes.empty() ? "]" : "\n  ]") << "\n}\n";
    return out.str();
}

std::string format_scan_json(const ResultBundle& b, const ScanResult& scan) {
    std::ostringstream out;
    out << "{\n  " << metadata_json(b) << ",\n  \"rows\": [";
    for (std::size_t i = 0; i < scan.rows.size(); ++i) {
        const auto& r = scan.rows[i];
        out << (i ? "," : "") << "\n    {\"t_r1_us\": " << num(r.t_r1_us)
            << ", \"status\": " << quoted(r.ok ? "ok" : r.error)
            << ", \"e1_abs\": " << num(r.e1_abs) << ", \"e2_abs\": " << num(r.e2_abs)
            << ", \"e1_t_us\": " << num(r.e1_t_us) << ", \"e2_t_us\": " << num(r.e2_t_us)
            << ", \"e1_energy\": " << num(r.e1_energy) << ", \"e2_energy\": " << num(r.e2_energy)
            << "}";
    }
    out << (scan.rows.empty() ? "]" : "\n  ]") << "\n}\n";
    return out.str();
}

void emit_results(const ResultBundle& bundle, const std::vector<OutputSpec>& outputs) {
    for (const auto& spec : outputs) {
        std::string content;
        if (spec.kind == "timeseries") {
            content = (spec.format == "json") ? format_timeseries_json(bundle)
                                              : format_timeseries_csv(bundle);
        } else if (spec.kind == "echoes") {
            content = (spec.format == "json") ? format_echoes_json(bundle)
                                              : format_echoes_csv(bundle);
        } else if (spec.kind == "scan") {
            if (!bundle.scan) continue;  // nothing scanned in this run
            content = (spec.format == "json") ? format_scan_json(bundle, *bundle.scan)
                                              : format_scan_csv(*bundle.scan);
        } else {
            continue;  // unreachable: kinds are validated at parse time
        }
        write_file_atomic(spec.path, content);
    }
}

}  // namespace echosim
