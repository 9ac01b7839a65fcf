#include "cacc/v2v_network.hpp"

#include <algorithm>
#include <cmath>

namespace cacc {

const char* to_string(CommMode mode) {
    return mode == CommMode::Continuous ? "continuous" : "event";
}

void TriggerConfig::validate() const {
    if (!(T_L > 0.0)) throw ConfigError("trigger.T_L", "must be > 0");
    if (!(T_H > T_L)) throw ConfigError("trigger.T_H", "must be > T_L");
    if (!(dy_L.array() > 0.0).all()) throw ConfigError("trigger.dy_L", "components must be > 0");
}

AttackSignal::AttackSignal(std::vector<std::pair<double, double>> schedule) : schedule_(std::move(schedule)) {
    std::stable_sort(schedule_.begin(), schedule_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [t, v] : schedule_) {
        if (!std::isfinite(t) || !std::isfinite(v)) throw ConfigError("attack.schedule", "values must be finite");
    }
}

double AttackSignal::at(double t) const {
    double value = 0.0;
    for (const auto& [start, v] : schedule_) {
        if (start > t + kTimeEps) break;
        value = v;
    }
    return value;
}

std::optional<double> AttackSignal::onset() const {
    for (const auto& [start, v] : schedule_) {
        if (v != 0.0) return start;
    }
    return std::nullopt;
}

bool trigger_check(const CommState& cs, const Vec2& y_local, double t, const TriggerConfig& cfg) {
    const double elapsed = t - cs.tau_last;
    if (elapsed >= cfg.T_H - kTimeEps) return true;
    if (elapsed <= cfg.T_L + kTimeEps) return false;
    const Vec2 drift = (cs.y_ref - y_local).cwiseAbs();
    return (drift.array() >= cfg.dy_L.array()).any();
}

CommState transmit(const CommState& cs, double u_true, const Vec2& y_local, double t, const AttackSignal& attack) {
    CommState next = cs;
    next.phi_applied = attack.at(t);
    next.u_tilde_prev = cs.u_tilde_last;
    next.u_tilde_last = u_true + next.phi_applied;
    next.tau_last = t;
    next.y_ref = y_local;
    next.transmissions = cs.transmissions + 1;
    return next;
}

std::optional<double> delta_u_bar(const CommState& cs) {
    if (cs.transmissions < 2) return std::nullopt;
    return cs.u_tilde_last - cs.u_tilde_prev;
}

V2VLink::V2VLink(CommMode mode, TriggerConfig cfg, AttackSignal attack)
    : mode_(mode), cfg_(cfg), attack_(std::move(attack)) {
    if (mode_ == CommMode::EventTriggered) cfg_.validate();
}

void V2VLink::start(double t0, double u_true, const Vec2& y_local) {
    state_ = transmit(CommState{}, u_true, y_local, t0, attack_);
}

bool V2VLink::update(double t, double u_true, const Vec2& y_local) {
    if (mode_ == CommMode::EventTriggered && !trigger_check(state_, y_local, t, cfg_)) return false;
    state_ = transmit(state_, u_true, y_local, t, attack_);
    return true;
}

}  // namespace cacc
