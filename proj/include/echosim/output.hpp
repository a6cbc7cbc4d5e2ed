#pragma once

#include <optional>
#include <string>
#include <vector>

#include "echosim/config.hpp"
#include "echosim/ensemble.hpp"

namespace echosim {

/// Everything one run produces, ready for serialization.
struct ResultBundle {
    std::string job_hash;
    std::string version;
    double wall_ms = 0.0;

    std::vector<double> times_us;
    std::vector<Complex> polarization;
    PopulationTrace populations;
    std::vector<EchoEvent> echoes;
    std::optional<ScanResult> scan;
};

ResultBundle make_bundle(const SimJob& job, const EnsembleResult& result,
                         const std::vector<EchoEvent>& echoes, double wall_ms);

// Deterministic serializations; numbers carry 9 significant digits.
// Time-series CSV columns: t_us,re_P,im_P,intensity,rho11,rho22,rho33
// Echo CSV columns:        label,t_peak_us,re_amp,im_amp,intensity
std::string format_timeseries_csv(const ResultBundle& bundle);
std::string format_echoes_csv(const ResultBundle& bundle);
std::string format_scan_csv(const ScanResult& scan);
std::string format_timeseries_json(const ResultBundle& bundle);
std::string format_echoes_json(const ResultBundle& bundle);
std::string format_scan_json(const ResultBundle& bundle, const ScanResult& scan);

/// Writes every requested output file (write-to-temp then rename, so files
/// only ever appear complete). Unknown kinds were rejected at parse time;
/// kinds without data in the bundle are skipped.
void emit_results(const ResultBundle& bundle, const std::vector<OutputSpec>& outputs);

}  // namespace echosim
