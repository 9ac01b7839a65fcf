#include "cacc/smo_observer.hpp"

#include <Eigen/LU>

#include <cmath>

namespace cacc {

void ObserverConfig::validate() const {
    if (!(M > 0.0)) throw ConfigError("observer.M", "must be > 0");
    if (!(K > 0.0)) throw ConfigError("observer.K", "must be > 0");
    if (!(eps2_0 >= 0.0)) throw ConfigError("observer.eps2_0", "must be >= 0");
    if (!P.allFinite()) throw ConfigError("observer.P", "must be finite");
    // Positive semidefinite: symmetric part has no negative eigenvalue.
    const Mat2 sym = 0.5 * (P + P.transpose());
    const double tr = sym.trace();
    const double det = sym.determinant();
    if (tr < -1e-12 || det < -1e-12) throw ConfigError("observer.P", "must be positive semidefinite");
}

ObserverState initial_observer_state(const Vec2& y_e0) {
    ObserverState s;
    s.z1_hat = y_e0;
    return s;
}

Vec2 pseudo_control(const Vec2& eps_y, const ObserverConfig& cfg, const ErrorMatrices& mats) {
    return (mats.A11 + cfg.P) * eps_y + cfg.M * sgn(eps_y);
}

Vec2 eoi_filter_step(const Vec2& nu_fil, const Vec2& nu, double K, double dt) {
    const double g = -std::expm1(-K * dt);
    return nu_fil + g * (nu - nu_fil);
}

ObserverState observer_step(const ObserverState& obs, const Vec2& y_e, double t, const ObserverConfig& cfg,
                            const ErrorMatrices& mats, double dt, ObserverTick* tick) {
    const Vec2 eps_y = output_error(obs, y_e).eps_y;
    const Vec2 nu = pseudo_control(eps_y, cfg, mats);

    ObserverState next = obs;
    next.nu = nu;
    next.nu_fil = eoi_filter_step(obs.nu_fil, nu, cfg.K, dt);
    next.z1_hat = obs.z1_hat + dt * (mats.A11 * obs.z1_hat + mats.A12 * obs.z2_hat - nu);
    next.z2_hat = obs.z2_hat + dt * (mats.A21.dot(obs.z1_hat) + mats.A22 * obs.z2_hat);

    std::array<std::optional<SwitchEvent>, 2> switches;
    for (int j = 0; j < 2; ++j) {
        const int s = static_cast<int>(sgn(eps_y(j)));
        if (s == 0) continue;  // a zero sample keeps the running interval
        if (obs.sgn_prev[j] != 0 && s != obs.sgn_prev[j]) {
            switches[j] = SwitchEvent{t, j, s};
            auto& hist = next.switch_times[j];
            hist.push_back(t);
            if (hist.size() > ObserverState::kSwitchHistory) hist.pop_front();
        }
        next.sgn_prev[j] = s;
    }

    if (tick != nullptr) {
        tick->eps_y = eps_y;
        tick->nu = nu;
        tick->nu_fil = obs.nu_fil;
        tick->switches = switches;
    }
    return next;
}

SlidingModeObserver::SlidingModeObserver(ObserverConfig cfg, ErrorMatrices mats, double dt)
    : cfg_(std::move(cfg)), mats_(std::move(mats)), dt_(dt) {
    cfg_.validate();
}

void SlidingModeObserver::start(double t0, const Vec2& y_e0) {
    t0_ = t0;
    state_ = initial_observer_state(y_e0);
}

ObserverTick SlidingModeObserver::step(double t, const Vec2& y_e) {
    ObserverTick tick;
    state_ = observer_step(state_, y_e, t, cfg_, mats_, dt_, &tick);
    return tick;
}

}  // namespace cacc
