#pragma once

#include "cacc/platoon_dynamics.hpp"
#include "cacc/types.hpp"

#include <array>
#include <deque>
#include <optional>

namespace cacc {

struct ObserverConfig {
    Mat2 P = Mat2::Zero();
    double M = 20.0;     // switching gain
    double K = 2.0;      // EOI filter pole (1/s)
    double eps2_0 = 10.0;  // initial bound on the unmeasured-state error

    /// Structural checks only; the sliding gain condition needs the noise
    /// bounds and is checked by `validate_gain_condition` in thresholds.
    void validate() const;
};

/// Sign change of one output-error component, i.e. the start of a new
/// interval of constant sign.
struct SwitchEvent {
    double t = 0.0;
    int component = 0;
    int sign = 0;  // sign of the interval that starts at t
};

struct ObserverState {
    Vec2 z1_hat = Vec2::Zero();
    double z2_hat = 0.0;
    Vec2 nu = Vec2::Zero();
    Vec2 nu_fil = Vec2::Zero();
    std::array<int, 2> sgn_prev{0, 0};
    // Most recent sign-change timestamps per component, oldest first.
    std::array<std::deque<double>, 2> switch_times;

    static constexpr std::size_t kSwitchHistory = 16;
};

struct OutputError {
    Vec2 eps_y = Vec2::Zero();
};

/// Observer start: z1_hat = y_e(t0), z2_hat = 0, nu_fil = 0.
ObserverState initial_observer_state(const Vec2& y_e0);

/// nu = (A11 + P) eps_y + M sgn(eps_y), with sgn(0) = 0.
Vec2 pseudo_control(const Vec2& eps_y, const ObserverConfig& cfg, const ErrorMatrices& mats);

/// Exact discrete update of nu_fil' = K (nu - nu_fil) for nu held over dt.
Vec2 eoi_filter_step(const Vec2& nu_fil, const Vec2& nu, double K, double dt);

inline OutputError output_error(const ObserverState& obs, const Vec2& y_e) { return {obs.z1_hat - y_e}; }

/// What one observer tick produced. `nu_fil` is the filter output at time t,
/// before the update to t + dt.
struct ObserverTick {
    Vec2 eps_y = Vec2::Zero();
    Vec2 nu = Vec2::Zero();
    Vec2 nu_fil = Vec2::Zero();
    std::array<std::optional<SwitchEvent>, 2> switches;
};

/// Forward-Euler step of the sliding-mode observer from t to t + dt.
ObserverState observer_step(const ObserverState& obs, const Vec2& y_e, double t, const ObserverConfig& cfg,
                            const ErrorMatrices& mats, double dt, ObserverTick* tick = nullptr);

class SlidingModeObserver {
public:
    SlidingModeObserver(ObserverConfig cfg, ErrorMatrices mats, double dt);

    void start(double t0, const Vec2& y_e0);
    ObserverTick step(double t, const Vec2& y_e);

    const ObserverState& state() const { return state_; }
    const ObserverConfig& config() const { return cfg_; }
    const ErrorMatrices& matrices() const { return mats_; }
    double start_time() const { return t0_; }

private:
    ObserverConfig cfg_;
    ErrorMatrices mats_;
    double dt_;
    double t0_ = 0.0;
    ObserverState state_;
};

}  // namespace cacc
