#include "cacc/trace_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cacc {

namespace {

// Shortest round-trippable-enough text, independent of stream locale state.
std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json vec(const Vec2& v) { return nlohmann::json::array({v(0), v(1)}); }

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string trace_header(int vehicles) {
    std::ostringstream h;
    h << "t";
    for (int i = 0; i < vehicles; ++i) h << ",p" << i << ",v" << i << ",a" << i << ",u" << i;
    for (int i = 1; i < vehicles; ++i) h << ",e" << i << ",e_hat" << i;
    h << ",nu_1,nu_2,nu_fil_1,nu_fil_2,eps_y_1,eps_y_2,eps1_1,eps1_2,eps2"
         ",upper_1,upper_2,lower_1,lower_2,evaluated,violation,alarm,comm,clamped,phi,du_c,du_hat";
    return h.str();
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace, int vehicles) {
    out << trace_header(vehicles) << '\n';
    for (const auto& r : trace) {
        out << num(r.t);
        for (const auto& s : r.vehicles) out << ',' << num(s.p) << ',' << num(s.v) << ',' << num(s.a) << ',' << num(s.u);
        for (std::size_t i = 0; i < r.e.size(); ++i) out << ',' << num(r.e[i]) << ',' << num(r.e_hat[i]);
        for (double x : {r.nu(0), r.nu(1), r.nu_fil(0), r.nu_fil(1), r.eps_y(0), r.eps_y(1), r.eps1(0), r.eps1(1),
                         r.eps2, r.upper(0), r.upper(1), r.lower(0), r.lower(1)}) {
            out << ',' << num(x);
        }
        out << ',' << r.evaluated << ',' << r.violation << ',' << r.alarm << ',' << r.comm << ',' << r.clamped;
        out << ',' << num(r.phi) << ',' << num(r.du_c) << ',' << num(r.du_hat) << '\n';
    }
}

std::string metrics_json(const RunResult& r) {
    const RunMetrics& m = r.metrics;
    const bool event = r.config.comm_mode == CommMode::EventTriggered;
    nlohmann::json j;
    j["trace_format_version"] = kTraceFormatVersion;
    j["comm_mode"] = to_string(r.config.comm_mode);
    j["seed"] = r.config.seed;
    j["monitored_follower"] = r.config.monitored();
    j["attack_onset"] = opt(m.attack_onset);
    j["attack_magnitude"] = opt(r.calibrated_attack);
    j["first_alarm"] = opt(m.first_alarm);
    j["detection_delay"] = opt(m.detection_delay);
    j["false_alarm_count"] = m.false_alarm_count;
    j["alarm_count"] = r.alarms.size();
    j["threshold_steady_state"] = vec(m.threshold_steady_state);
    j["transmissions_count"] = m.transmissions_count;
    j["max_abs_eps1"] = vec(m.max_abs_eps1);
    j["zeta_bar"] = vec(r.steady_bounds.zeta_bar);
    j["gain_condition_warnings"] = r.gain_condition_warnings;
    j["comm_peak_violations"] = r.comm_peak_violations;
    j["reference"] = {
        {"threshold_steady_state", 0.35},
        {"detection_delay", event ? 0.6 : 0.23},
    };
    return j.dump(2) + "\n";
}

void write_alarms(std::ostream& out, const std::vector<AlarmEvent>& alarms) {
    out << "time,sample_time,component,value,bound,side,mode\n";
    for (const auto& a : alarms) {
        out << num(a.time) << ',' << num(a.sample_time) << ',' << (a.component + 1) << ',' << num(a.value) << ','
            << num(a.bound) << ',' << (a.upper ? "upper" : "lower") << ',' << to_string(a.mode) << '\n';
    }
}

void write_plot_eoi(std::ostream& out, const std::vector<TraceRecord>& trace) {
    out << "t,nu_fil_2,upper_2,lower_2,phi,du_hat,comm,evaluated\n";
    for (const auto& r : trace) {
        out << num(r.t) << ',' << num(r.nu_fil(1)) << ',' << num(r.upper(1)) << ',' << num(r.lower(1)) << ','
            << num(r.phi) << ',' << num(r.du_hat) << ',' << r.comm << ',' << r.evaluated << '\n';
    }
}

void write_plot_comm_markers(std::ostream& out, const std::vector<TraceRecord>& trace) {
    out << "t,nu_fil_2,upper_2,lower_2,du_hat\n";
    for (const auto& r : trace) {
        if (!r.comm) continue;
        out << num(r.t) << ',' << num(r.nu_fil(1)) << ',' << num(r.upper(1)) << ',' << num(r.lower(1)) << ','
            << num(r.du_hat) << '\n';
    }
}

void emit(const RunResult& r, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::ostringstream trace, alarms, eoi, markers;
    write_trace(trace, r.trace, r.config.vehicles);
    write_alarms(alarms, r.alarms);
    write_plot_eoi(eoi, r.trace);
    write_plot_comm_markers(markers, r.trace);

    write_file(out_dir / "trace.csv", trace.str());
    write_file(out_dir / "metrics.json", metrics_json(r));
    write_file(out_dir / "alarms.csv", alarms.str());
    write_file(out_dir / "plot_eoi.csv", eoi.str());
    write_file(out_dir / "plot_comm_markers.csv", markers.str());
}

}  // namespace cacc
