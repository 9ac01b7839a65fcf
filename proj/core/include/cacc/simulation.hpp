#pragma once

#include "cacc/scenario.hpp"
#include "cacc/thresholds.hpp"
#include "cacc/v2v_network.hpp"

#include <optional>
#include <vector>

namespace cacc {

/// One simulation tick. Per-follower vectors are indexed by follower - 1;
/// the detector columns belong to the monitored follower.
struct TraceRecord {
    double t = 0.0;
    std::vector<VehicleState> vehicles;
    std::vector<double> e;
    std::vector<double> e_hat;
    Vec2 nu = Vec2::Zero();
    Vec2 nu_fil = Vec2::Zero();
    Vec2 eps_y = Vec2::Zero();
    Vec2 eps1 = Vec2::Zero();  // true measured-state estimation error
    double eps2 = 0.0;         // true unmeasured-state estimation error
    Vec2 upper = Vec2::Zero();
    Vec2 lower = Vec2::Zero();
    bool evaluated = false;  // thresholds at this tick are final
    bool violation = false;  // nu_fil outside [lower, upper]
    bool alarm = false;      // an alarm was raised at this tick
    bool comm = false;       // the monitored link transmitted at this tick
    bool clamped = false;    // the lower |nu| bound was clamped
    double phi = 0.0;        // scheduled attack value
    double du_c = 0.0;       // communication-induced error on the monitored link
    double du_hat = 0.0;     // attack estimate
};

struct RunMetrics {
    std::optional<double> attack_onset;
    std::optional<double> first_alarm;
    std::optional<double> detection_delay;
    int false_alarm_count = 0;
    Vec2 threshold_steady_state = Vec2::Zero();
    int transmissions_count = 0;
    Vec2 max_abs_eps1 = Vec2::Zero();
};

struct RunResult {
    ScenarioConfig config;  // as run, with any calibrated attack filled in
    std::vector<TraceRecord> trace;
    std::vector<AlarmEvent> alarms;
    std::vector<TransmissionEvent> transmissions;  // monitored link
    BoundSet steady_bounds;
    RunMetrics metrics;
    std::optional<double> calibrated_attack;
    int gain_condition_warnings = 0;
    // Event mode: windows in which |du_c| exceeded the |u_tilde step| seen at
    // the closing communication, so the inflated bound did not cover them.
    int comm_peak_violations = 0;
};

/// Deterministic closed-loop run. Per tick: measure, trigger/transmit,
/// observer, filter, thresholds, estimate, then control and vehicle step.
/// Throws NumericDivergence if any state becomes non-finite.
RunResult run(const ScenarioConfig& cfg);

/// Detection delay, false alarms, steady-state threshold (mean upper bound
/// over the final 20% of the run), transmissions, max |eps1| after the
/// configured transient.
RunMetrics compute_metrics(const std::vector<TraceRecord>& trace, const ScenarioConfig& cfg);

struct Calibration {
    Vec2 steady_threshold = Vec2::Zero();
    double attack_magnitude = 0.0;  // factor * steady_threshold of the estimated component
};

/// Attack-free run of `cfg`; the attack magnitude is `factor` times the
/// steady upper threshold of the component carrying the estimate.
Calibration calibrate(const ScenarioConfig& cfg, double factor = 2.0);

}  // namespace cacc
