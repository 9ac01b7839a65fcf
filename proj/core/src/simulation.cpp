#include "cacc/simulation.hpp"

#include "cacc/attack_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cacc {

namespace {

std::vector<VehicleState> initial_platoon(const ScenarioConfig& cfg) {
    std::vector<VehicleState> states(cfg.vehicles);
    const double gap = desired_distance(cfg.initial_speed, cfg.gains) + cfg.vehicle.length;
    for (int i = 0; i < cfg.vehicles; ++i) {
        states[i].p = (cfg.vehicles - 1 - i) * gap;
        states[i].v = cfg.initial_speed;
        states[i].a = 0.0;
        states[i].u = 0.0;
    }
    states[0].u = cfg.lead.at(0.0);
    states[0].a = states[0].u;
    for (int i = 1; i < cfg.vehicles; ++i) {
        states[i].a = states[0].a;
        states[i].u = states[0].u;
    }
    return states;
}

void check_finite(const std::vector<VehicleState>& states, const SlidingModeObserver& obs, double t) {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!states[i].finite()) {
            std::ostringstream msg;
            msg << "vehicle " << i << " state diverged at t=" << t;
            throw NumericDivergence(msg.str());
        }
    }
    const auto& s = obs.state();
    if (!s.z1_hat.allFinite() || !std::isfinite(s.z2_hat) || !s.nu_fil.allFinite()) {
        std::ostringstream msg;
        msg << "observer diverged at t=" << t;
        throw NumericDivergence(msg.str());
    }
}

void fill_thresholds(TraceRecord& rec, const EvaluatedSample& s, bool clamped) {
    rec.upper = s.upper;
    rec.lower = s.lower;
    rec.evaluated = s.evaluated;
    rec.violation = s.violated[0] || s.violated[1];
    rec.clamped = clamped;
}

RunResult simulate(const ScenarioConfig& cfg) {
    cfg.validate();

    const ErrorMatrices mats = build_error_matrices(cfg.gains, cfg.vehicle);
    const int m = cfg.vehicles;
    const int watched = cfg.monitored();
    const double dt = cfg.dt;
    const std::size_t n_ticks = cfg.ticks();

    NoiseSource noise(cfg.noise, cfg.seed);
    std::vector<VehicleState> states = initial_platoon(cfg);

    std::vector<V2VLink> links;
    links.reserve(m);
    for (int i = 0; i < m; ++i) {
        const AttackSignal attack = (i == watched) ? cfg.attack.signal : AttackSignal{};
        links.emplace_back(cfg.comm_mode, cfg.trigger, attack);
    }

    SlidingModeObserver observer(cfg.observer, mats, dt);
    ThresholdModel model{cfg.observer, mats, cfg.noise, cfg.gains, 0.0};
    ThresholdMonitor monitor(model, cfg.comm_mode);

    RunResult result;
    result.config = cfg;
    result.trace.reserve(n_ticks);
    result.steady_bounds = compute_bounds(cfg.observer, mats, cfg.noise, cfg.gains, 0.0, 1e9);

    std::vector<Measurement> meas(m);
    std::vector<NoisyErrors> errs(m);
    std::size_t alarms_seen = 0;
    double window_peak_du_c = 0.0;
    bool warned = false;

    for (std::size_t k = 0; k <= n_ticks; ++k) {
        const double t = static_cast<double>(k) * dt;
        states[0].u = cfg.lead.at(t);

        for (int i = 0; i < m; ++i) {
            meas[i] = measure(states[i], i > 0 ? &states[i - 1] : nullptr, noise, cfg.vehicle);
            if (i > 0) errs[i] = noisy_errors(meas[i], cfg.gains);
        }

        bool comm = false;
        for (int i = 1; i < m; ++i) {
            const Vec2 y_sender = meas[i - 1].local.head<2>();
            bool sent = true;
            if (k == 0) {
                links[i].start(t, states[i - 1].u, y_sender);
            } else {
                sent = links[i].update(t, states[i - 1].u, y_sender);
            }
            if (i == watched && sent) {
                comm = true;
                result.transmissions.push_back(
                    {t, links[i].received(), links[i].state().phi_applied != 0.0});
            }
        }

        const Vec2 y_e = errs[watched].as_vector();
        const ErrorState truth = true_error_state(states[watched - 1], states[watched], cfg.gains, cfg.vehicle);
        if (k == 0) {
            observer.start(t, y_e);
            monitor.start(t);
        }

        TraceRecord rec;
        rec.t = t;
        rec.vehicles = states;
        rec.e.resize(m - 1);
        rec.e_hat.resize(m - 1);
        for (int i = 1; i < m; ++i) {
            rec.e[i - 1] = true_error_state(states[i - 1], states[i], cfg.gains, cfg.vehicle).x(0);
            rec.e_hat[i - 1] = errs[i].e_hat;
        }
        rec.eps1 = observer.state().z1_hat - truth.x.head<2>();
        rec.eps2 = observer.state().z2_hat - truth.x(2);

        const ObserverTick tick = observer.step(t, y_e);
        rec.nu = tick.nu;
        rec.nu_fil = tick.nu_fil;
        rec.eps_y = tick.eps_y;
        rec.comm = comm;
        rec.phi = cfg.attack.signal.at(t);
        rec.du_c = comm_error(states[watched - 1].u, links[watched].state());
        window_peak_du_c = std::max(window_peak_du_c, std::abs(rec.du_c));
        rec.du_hat = estimate_attack(tick.nu_fil, mats);

        const BoundSet now = model.bounds(t);
        if (!gain_condition_holds(cfg.observer, mats, now) && !warned) {
            ++result.gain_condition_warnings;
            warned = true;
        }

        if (auto s = monitor.observe(k, t, tick.nu_fil, tick.switches)) {
            fill_thresholds(rec, *s, now.nu_under_clamped);
        } else {
            rec.upper = monitor.upper();
            rec.lower = monitor.lower();
        }
        result.trace.push_back(std::move(rec));

        if (cfg.comm_mode == CommMode::EventTriggered && comm) {
            const std::optional<double> du_bar = delta_u_bar(links[watched].state());
            if (du_bar && window_peak_du_c > std::abs(*du_bar) + 1e-12) ++result.comm_peak_violations;
            window_peak_du_c = 0.0;
            const BoundSet inflated = model.bounds(t, du_bar.value_or(0.0));
            const RetroactiveResult r = monitor.on_communication(t, du_bar);
            for (const auto& s : r.samples) fill_thresholds(result.trace[s.tick], s, inflated.nu_under_clamped);
        }

        for (; alarms_seen < monitor.alarms().size(); ++alarms_seen) {
            const double raised = monitor.alarms()[alarms_seen].time;
            const auto idx = static_cast<std::size_t>(std::llround(raised / dt));
            if (idx < result.trace.size()) result.trace[idx].alarm = true;
        }

        if (k == n_ticks) break;

        // Control and plant advance to t + dt with inputs held over the step.
        for (int i = 1; i < m; ++i) {
            const double u_now = states[i].u;
            const double u_next = cacc_control_step(u_now, errs[i], links[i].received(), cfg.gains, dt);
            states[i] = vehicle_step(states[i], u_now, dt, cfg.vehicle);
            states[i].u = u_next;
        }
        states[0] = vehicle_step(states[0], states[0].u, dt, cfg.vehicle);
        check_finite(states, observer, t + dt);
    }

    result.alarms = monitor.alarms();
    result.metrics = compute_metrics(result.trace, cfg);
    return result;
}

ScenarioConfig without_attack(ScenarioConfig cfg) {
    cfg.attack.signal = AttackSignal{};
    cfg.attack.calibrate_factor.reset();
    return cfg;
}

}  // namespace

RunMetrics compute_metrics(const std::vector<TraceRecord>& trace, const ScenarioConfig& cfg) {
    RunMetrics m;
    m.attack_onset = cfg.attack.signal.onset();
    if (trace.empty()) return m;

    const double t0 = trace.front().t;
    const double t_end = trace.back().t;
    const double steady_from = t_end - 0.2 * (t_end - t0);
    Vec2 steady_sum = Vec2::Zero();
    int steady_n = 0;

    for (const auto& r : trace) {
        if (r.alarm) {
            const bool before_attack = !m.attack_onset || r.t < *m.attack_onset - kTimeEps;
            if (before_attack) {
                ++m.false_alarm_count;
            } else if (!m.first_alarm) {
                m.first_alarm = r.t;
            }
        }
        if (r.comm) ++m.transmissions_count;
        if (r.t >= t0 + cfg.eps1_transient - kTimeEps) {
            m.max_abs_eps1 = m.max_abs_eps1.cwiseMax(r.eps1.cwiseAbs());
        }
        if (r.t >= steady_from - kTimeEps && r.evaluated) {
            steady_sum += r.upper;
            ++steady_n;
        }
    }
    if (steady_n > 0) m.threshold_steady_state = steady_sum / steady_n;
    if (m.first_alarm && m.attack_onset) m.detection_delay = *m.first_alarm - *m.attack_onset;
    return m;
}

Calibration calibrate(const ScenarioConfig& cfg, double factor) {
    const RunResult r = simulate(without_attack(cfg));
    Calibration c;
    c.steady_threshold = r.metrics.threshold_steady_state;
    // The estimate reads the second component (A12 = [0, 1]^T).
    c.attack_magnitude = factor * c.steady_threshold(1);
    return c;
}

RunResult run(const ScenarioConfig& cfg) {
    if (!cfg.attack.calibrate_factor) return simulate(cfg);

    const Calibration c = calibrate(cfg, *cfg.attack.calibrate_factor);
    ScenarioConfig attacked = cfg;
    attacked.attack.calibrate_factor.reset();
    attacked.attack.signal = AttackSignal::constant(cfg.attack.onset, c.attack_magnitude);
    RunResult r = simulate(attacked);
    r.calibrated_attack = c.attack_magnitude;
    return r;
}

}  // namespace cacc
