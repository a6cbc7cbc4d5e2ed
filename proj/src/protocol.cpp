#include "echosim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace echosim {

const char* to_string(ProtocolTag t) {
    switch (t) {
        case ProtocolTag::two_pulse_echo: return "two_pulse_echo";
        case ProtocolTag::apc_double_rephase: return "apc_double_rephase";
        case ProtocolTag::custom: return "custom";
    }
    return "?";
}

const Pulse* PulseSequence::find(PulseLabel label) const {
    for (const auto& p : pulses)
        if (p.label == label) return &p;
    return nullptr;
}

std::vector<const Pulse*> PulseSequence::data_pulses() const {
    std::vector<const Pulse*> out;
    for (const auto& p : pulses)
        if (p.label == PulseLabel::D) out.push_back(&p);
    std::sort(out.begin(), out.end(),
              [](const Pulse* a, const Pulse* b) { return a->t_start_us < b->t_start_us; });
    return out;
}

double PulseSequence::t_min_us() const {
    double t = 0.0;
    for (const auto& p : pulses) t = std::min(t, p.t_start_us);
    return t;
}

double PulseSequence::t_max_us() const {
    double t = 0.0;
    for (const auto& p : pulses) t = std::max(t, p.t_end_us());
    return t;
}

PulseSequence make_two_pulse_sequence(double t_d_us, double t_r1_us, const TwoPulseOptions& opt) {
    if (t_d_us + opt.duration_d_us > t_r1_us) {
        std::ostringstream msg;
        msg << "two-pulse sequence: D (ends " << t_d_us + opt.duration_d_us
            << " us) must finish before R1 starts (" << t_r1_us << " us)";
        throw ConfigError(msg.str());
    }
    PulseSequence seq;
    seq.tag = ProtocolTag::two_pulse_echo;
    seq.pulses.push_back({Channel::A, PulseLabel::D, "D", t_d_us, opt.duration_d_us,
                          opt.area_d_rad});
    seq.pulses.push_back({Channel::A, PulseLabel::R1, "R1", t_r1_us, opt.duration_r1_us,
                          opt.area_r1_rad});
    return seq;
}

PulseSequence make_apc_sequence(double t_d_us, double t_r1_us, double t_r2_us, double t_c1_us,
                                double t_c2_us, const ApcOptions& opt) {
    struct Slot {
        const char* name;
        double start;
        double duration;
    };
    const Slot slots[] = {{"D", t_d_us, opt.duration_d_us},
                          {"R1", t_r1_us, opt.duration_rc_us},
                          {"R2", t_r2_us, opt.duration_rc_us},
                          {"C1", t_c1_us, opt.duration_rc_us},
                          {"C2", t_c2_us, opt.duration_rc_us}};
    for (int i = 0; i + 1 < 5; ++i) {
        if (slots[i].start >= slots[i + 1].start) {
            std::ostringstream msg;
            msg << "apc sequence: " << slots[i].name << " (t=" << slots[i].start
                << " us) must precede " << slots[i + 1].name << " (t=" << slots[i + 1].start
                << " us)";
            throw ConfigError(msg.str());
        }
    }
    // same-channel pulses must also be non-overlapping
    auto overlap = [](const Slot& a, const Slot& b) {
        return a.start + a.duration > b.start;
    };
    const std::pair<int, int> same_channel[] = {{0, 1}, {1, 2}, {3, 4}};
    for (auto [i, j] : same_channel) {
        if (overlap(slots[i], slots[j])) {
            std::ostringstream msg;
            msg << "apc sequence: " << slots[i].name << " overlaps " << slots[j].name
                << " on the same channel";
            throw ConfigError(msg.str());
        }
    }

    PulseSequence seq;
    seq.tag = ProtocolTag::apc_double_rephase;
    seq.pulses.push_back({Channel::A, PulseLabel::D, "D", t_d_us, opt.duration_d_us,
                          opt.area_d_rad});
    seq.pulses.push_back({Channel::A, PulseLabel::R1, "R1", t_r1_us, opt.duration_rc_us,
                          opt.area_r_rad});
    seq.pulses.push_back({Channel::A, PulseLabel::R2, "R2", t_r2_us, opt.duration_rc_us,
                          opt.area_r_rad});
    seq.pulses.push_back({Channel::B, PulseLabel::C1, "C1", t_c1_us, opt.duration_rc_us,
                          opt.area_c_rad});
    seq.pulses.push_back({Channel::B, PulseLabel::C2, "C2", t_c2_us, opt.duration_rc_us,
                          opt.area_c_rad});
    return seq;
}

double predict_e1_time(double t_d_center_us, double t_r1_center_us, Findings* findings) {
    if (t_r1_center_us < t_d_center_us)
        throw ConfigError("predict_e1_time: rephasing pulse must not precede the data pulse");
    if (t_r1_center_us == t_d_center_us && findings)
        findings->push_back({Finding::Severity::warning, "degenerate_timing",
                             "data and rephasing pulse coincide; echo time is degenerate"});
    return 2.0 * t_r1_center_us - t_d_center_us;
}

E2Prediction predict_e2_time(double t_c2_us, double t_r2_us, double t_e1_us, double delta_t_us,
                             std::optional<double> halt_bound_us) {
    for (double v : {t_c2_us, t_r2_us, t_e1_us, delta_t_us})
        if (!std::isfinite(v)) throw ConfigError("predict_e2_time: inputs must be finite");
    E2Prediction pred;
    pred.t_us = t_c2_us + (t_r2_us - t_e1_us) - delta_t_us;
    // Past the halt bound C1 freezes the phase after it has already crossed
    // zero, so the restored coherence never rephases again.
    const double bound = halt_bound_us.value_or(t_r2_us - t_e1_us);
    pred.no_echo = delta_t_us > bound;
    return pred;
}

TimingPrediction predict_timing(const PulseSequence& seq, std::optional<double> delta_t_override,
                                std::optional<double> halt_bound_us) {
    const auto data = seq.data_pulses();
    const Pulse* r1 = seq.find(PulseLabel::R1);
    if (data.empty() || r1 == nullptr)
        throw ConfigError("predict_timing: sequence needs a data pulse and R1");

    TimingPrediction pred;
    pred.t_d_us = data.front()->t_center_us();
    pred.t_r1_us = r1->t_center_us();
    for (const Pulse* d : data)
        pred.t_e1_us.push_back(predict_e1_time(d->t_center_us(), r1->t_center_us()));

    const Pulse* r2 = seq.find(PulseLabel::R2);
    const Pulse* c1 = seq.find(PulseLabel::C1);
    const Pulse* c2 = seq.find(PulseLabel::C2);
    if (r2 && c1 && c2) {
        pred.t_r2_us = r2->t_center_us();
        pred.t_c1_us = c1->t_center_us();
        pred.t_c2_us = c2->t_center_us();
        pred.delta_t_us = delta_t_override.value_or(c1->t_center_us() - r2->t_center_us());
        for (double t_e1 : pred.t_e1_us) {
            const auto e2 = predict_e2_time(pred.t_c2_us, pred.t_r2_us, t_e1, pred.delta_t_us,
                                            halt_bound_us);
            pred.t_e2_us.push_back(e2.t_us);
            pred.no_echo = pred.no_echo || e2.no_echo;
        }
    }
    return pred;
}

namespace {

constexpr double kC = units::speed_of_light_m_per_s;

PhaseMatchResult finish_phase_match(const Eigen::Vector3d& k_out, double omega_out,
                                    const Eigen::Vector3d& k_d) {
    PhaseMatchResult r;
    r.k_out = k_out;
    r.omega_out = omega_out;
    r.mismatch = std::abs(k_out.norm() - omega_out / kC);
    if (k_out.norm() > 0.0) r.direction = k_out / k_out.norm();
    r.backward = r.direction.dot(k_d.normalized()) < 0.0;
    return r;
}

}  // namespace

PhaseMatchResult phase_match_e1(const Eigen::Vector3d& k_d, const Eigen::Vector3d& k_r1) {
    if (k_d.norm() == 0.0 || k_r1.norm() == 0.0)
        throw ConfigError("phase_match_e1: wave vectors must be non-zero");
    const double omega_e1 = k_d.norm() * kC;  // degenerate mixing
    return finish_phase_match(2.0 * k_d - k_r1, omega_e1, k_d);
}

PhaseMatchResult phase_match_e2(const Eigen::Vector3d& k_d, const Eigen::Vector3d& k_c1,
                                const Eigen::Vector3d& k_c2, double omega_d_rad_per_s,
                                double omega_c1_rad_per_s, double omega_c2_rad_per_s) {
    if (k_d.norm() == 0.0 || k_c1.norm() == 0.0 || k_c2.norm() == 0.0)
        throw ConfigError("phase_match_e2: wave vectors must be non-zero");
    const double omega_e2 = omega_d_rad_per_s - omega_c1_rad_per_s + omega_c2_rad_per_s;
    if (omega_e2 <= 0.0)
        throw ConfigError("phase_match_e2: resulting frequency is not positive");
    return finish_phase_match(k_d - k_c1 + k_c2, omega_e2, k_d);
}

namespace {

void check_apc_shape(const PulseSequence& seq, const ValidateOptions& opt, Findings& out) {
    const PulseLabel order[] = {PulseLabel::R1, PulseLabel::R2, PulseLabel::C1, PulseLabel::C2};
    const Pulse* prev = nullptr;
    for (const Pulse* d : seq.data_pulses()) prev = d;
    if (prev == nullptr) {
        out.push_back({Finding::Severity::error, "missing_pulse",
                       "apc sequence: no data pulse present"});
        return;
    }
    for (PulseLabel label : order) {
        const Pulse* p = seq.find(label);
        if (p == nullptr) {
            out.push_back({Finding::Severity::error, "missing_pulse",
                           std::string("apc sequence: missing pulse ") + to_string(label)});
            return;
        }
        if (p->t_start_us <= prev->t_start_us)
            out.push_back({Finding::Severity::error, "order",
                           std::string("apc sequence: ") + to_string(label) +
                               " must come after " + prev->display_name()});
        prev = p;
    }

    auto expect_channel = [&](PulseLabel label, Channel ch) {
        const Pulse* p = seq.find(label);
        if (p && p->channel != ch)
            out.push_back({Finding::Severity::error, "channel",
                           std::string("apc sequence: ") + to_string(label) +
                               " must drive channel " + to_string(ch)});
    };
    for (PulseLabel l : {PulseLabel::D, PulseLabel::R1, PulseLabel::R2})
        expect_channel(l, Channel::A);
    for (PulseLabel l : {PulseLabel::C1, PulseLabel::C2}) expect_channel(l, Channel::B);

    for (const Pulse* d : seq.data_pulses()) {
        if (d->area_rad >= 0.5 * units::pi)
            out.push_back({Finding::Severity::error, "area",
                           "apc sequence: data pulse area must stay below pi/2"});
    }
    for (PulseLabel l : {PulseLabel::R1, PulseLabel::R2, PulseLabel::C1, PulseLabel::C2}) {
        const Pulse* p = seq.find(l);
        if (p && std::abs(p->area_rad - units::pi) > opt.area_tol_rad)
            out.push_back({Finding::Severity::warning, "non_ideal_area",
                           std::string(to_string(l)) + " area differs from pi: non-ideal rephasing"});
    }

    // rephasing halt: a late C1 parks phase that can no longer unwind
    if (!has_errors(out)) {
        const TimingPrediction pred = predict_timing(seq, std::nullopt, opt.halt_bound_us);
        if (pred.no_echo)
            out.push_back({Finding::Severity::warning, "halt",
                           "rephasing halt -- no E2 expected (C1 delay exceeds the halt bound)"});
    }
}

}  // namespace

Findings validate_sequence(const PulseSequence& seq, const ValidateOptions& opt) {
    Findings out;
    for (const auto& p : seq.pulses) {
        const Findings pf = p.validate();
        out.insert(out.end(), pf.begin(), pf.end());
    }
    if (has_errors(out)) return out;

    for (std::size_t i = 1; i < seq.pulses.size(); ++i) {
        if (seq.pulses[i].t_start_us < seq.pulses[i - 1].t_start_us)
            out.push_back({Finding::Severity::error, "order",
                           "pulses must be sorted by start time (" +
                               seq.pulses[i].display_name() + " starts before " +
                               seq.pulses[i - 1].display_name() + ")"});
    }

    for (std::size_t i = 0; i < seq.pulses.size(); ++i) {
        for (std::size_t j = i + 1; j < seq.pulses.size(); ++j) {
            const Pulse& a = seq.pulses[i];
            const Pulse& b = seq.pulses[j];
            if (a.channel != b.channel) continue;
            if (a.t_start_us < b.t_end_us() && b.t_start_us < a.t_end_us())
                out.push_back({Finding::Severity::error, "overlap",
                               "pulses " + a.display_name() + " and " + b.display_name() +
                                   " overlap on channel " + to_string(a.channel)});
        }
    }

    if (seq.tag == ProtocolTag::two_pulse_echo) {
        const Pulse* r1 = seq.find(PulseLabel::R1);
        if (r1 && std::abs(r1->area_rad - units::pi) > opt.area_tol_rad)
            out.push_back({Finding::Severity::warning, "non_ideal_area",
                           "R1 area differs from pi: non-ideal rephasing"});
    } else if (seq.tag == ProtocolTag::apc_double_rephase) {
        if (!has_errors(out)) check_apc_shape(seq, opt, out);
    }
    return out;
}

}  // namespace echosim
