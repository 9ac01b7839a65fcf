#pragma once

#include "cacc/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace cacc {

enum class CommMode { Continuous, EventTriggered };

const char* to_string(CommMode mode);

/// Minimum/maximum inter-transmission times and the drift threshold on the
/// sender's measured (position, velocity).
struct TriggerConfig {
    double T_L = 0.1;
    double T_H = 1.0;
    Vec2 dy_L = Vec2(4.0, 0.5);

    void validate() const;
};

/// Event-trigger bookkeeping of one link (vehicle i-1 -> vehicle i).
struct CommState {
    double tau_last = 0.0;
    Vec2 y_ref = Vec2::Zero();
    double u_tilde_last = 0.0;
    double u_tilde_prev = 0.0;
    double phi_applied = 0.0;  // attack value carried by the last payload
    int transmissions = 0;
};

/// Piecewise-constant additive corruption of the transmitted intended
/// acceleration. Breakpoints are (time, value) pairs; the value holds until
/// the next breakpoint and is zero before the first one.
class AttackSignal {
public:
    AttackSignal() = default;
    explicit AttackSignal(std::vector<std::pair<double, double>> schedule);

    double at(double t) const;
    bool empty() const { return schedule_.empty(); }
    /// First time the signal becomes nonzero.
    std::optional<double> onset() const;
    const std::vector<std::pair<double, double>>& schedule() const { return schedule_; }

    static AttackSignal constant(double onset, double value) { return AttackSignal({{onset, value}}); }

private:
    std::vector<std::pair<double, double>> schedule_;
};

/// True iff (t - tau_l >= T_H) or (t - tau_l > T_L and some channel of the
/// sender's measurement drifted by at least dy_L since the last transmission).
bool trigger_check(const CommState& cs, const Vec2& y_local, double t, const TriggerConfig& cfg);

/// Delivers u_true + phi(t) and resets the trigger reference.
CommState transmit(const CommState& cs, double u_true, const Vec2& y_local, double t, const AttackSignal& attack);

/// Communication-induced part of the received-value error, u_tilde - phi - u.
inline double comm_error(double u_true, const CommState& cs) { return cs.u_tilde_last - cs.phi_applied - u_true; }

/// u_tilde(tau_l) - u_tilde(tau_{l-1}); empty before the second transmission.
std::optional<double> delta_u_bar(const CommState& cs);

struct TransmissionEvent {
    double t = 0.0;
    double payload = 0.0;
    bool attacked = false;
};

/// One directed link with its trigger rule. In continuous mode every call
/// transmits.
class V2VLink {
public:
    V2VLink(CommMode mode, TriggerConfig cfg, AttackSignal attack);

    /// Seeds the link with a transmission at t0.
    void start(double t0, double u_true, const Vec2& y_local);

    /// Returns true when a transmission happened at t.
    bool update(double t, double u_true, const Vec2& y_local);

    double received() const { return state_.u_tilde_last; }
    const CommState& state() const { return state_; }
    CommMode mode() const { return mode_; }
    const AttackSignal& attack() const { return attack_; }

private:
    CommMode mode_;
    TriggerConfig cfg_;
    AttackSignal attack_;
    CommState state_;
};

}  // namespace cacc
