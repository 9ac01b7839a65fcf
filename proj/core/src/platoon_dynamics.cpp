#include "cacc/platoon_dynamics.hpp"

#include <cmath>

namespace cacc {

void VehicleParams::validate() const {
    if (!(tau > 0.0)) throw ConfigError("vehicle.tau", "must be > 0");
    if (!(length >= 0.0)) throw ConfigError("vehicle.length", "must be >= 0");
}

void CaccGains::validate() const {
    if (!(kp > 0.0)) throw ConfigError("cacc.kp", "must be > 0");
    if (!(kd > 0.0)) throw ConfigError("cacc.kd", "must be > 0");
    if (!(h > 0.0)) throw ConfigError("cacc.h", "must be > 0");
    if (!(r >= 0.0)) throw ConfigError("cacc.r", "must be >= 0");
}

bool VehicleState::finite() const {
    return std::isfinite(p) && std::isfinite(v) && std::isfinite(a) && std::isfinite(u);
}

NoiseModel NoiseModel::with_sigma(double sigma) {
    NoiseModel n;
    n.sigma_xi = Vec3::Constant(sigma);
    n.sigma_eta = Vec2::Constant(sigma);
    n.xi_bar = Vec3::Constant(2.0 * sigma);
    n.eta_bar = Vec2::Constant(2.0 * sigma);
    return n;
}

void NoiseModel::validate() const {
    if ((sigma_xi.array() < 0.0).any()) throw ConfigError("noise.sigma_xi", "must be >= 0");
    if ((sigma_eta.array() < 0.0).any()) throw ConfigError("noise.sigma_eta", "must be >= 0");
    if (!(xi_bar.array() > 0.0).all()) throw ConfigError("noise.xi_bar", "bounds must be > 0");
    if (!(eta_bar.array() > 0.0).all()) throw ConfigError("noise.eta_bar", "bounds must be > 0");
}

NoiseSource::NoiseSource(NoiseModel model, std::uint64_t seed) : model_(std::move(model)), rng_(seed) {}

double NoiseSource::draw(double sigma, double bound) {
    if (!model_.enabled || sigma == 0.0) return 0.0;
    for (;;) {
        const double x = sigma * normal_(rng_);
        if (!model_.truncate || std::abs(x) <= bound) return x;
    }
}

Vec3 NoiseSource::draw_local() {
    Vec3 xi;
    for (int j = 0; j < 3; ++j) xi(j) = draw(model_.sigma_xi(j), model_.xi_bar(j));
    return xi;
}

Vec2 NoiseSource::draw_relative() {
    Vec2 eta;
    for (int j = 0; j < 2; ++j) eta(j) = draw(model_.sigma_eta(j), model_.eta_bar(j));
    return eta;
}

ErrorMatrices build_error_matrices(const CaccGains& gains, const VehicleParams& params) {
    params.validate();
    gains.validate();
    const double tau = params.tau;

    ErrorMatrices m;
    const Eigen::RowVector3d last_row(-gains.kp / tau, -gains.kd / tau, -1.0 / tau);
    m.A_e << 0, 1, 0,
             0, 0, 1,
             0, 0, 0;
    m.A_e.row(2) = last_row;
    m.B_e.setZero();
    m.B_e.row(2) = last_row;
    m.C_e << 1, 0, 0,
             0, 1, 0;
    m.D_e = m.C_e;

    m.A11 = m.A_e.topLeftCorner<2, 2>();
    m.A12 = m.A_e.block<2, 1>(0, 2);
    m.A21 = m.A_e.block<1, 2>(2, 0);
    m.A22 = m.A_e(2, 2);
    m.b = -1.0 / tau;
    return m;
}

VehicleState vehicle_step(const VehicleState& s, double u_cmd, double dt, const VehicleParams& params) {
    const double tau = params.tau;
    const double da = s.a - u_cmd;
    // 1 - e^{-dt/tau}, computed without cancellation for small dt
    const double g = -std::expm1(-dt / tau);

    VehicleState next = s;
    next.a = u_cmd + da * (1.0 - g);
    next.v = s.v + u_cmd * dt + da * tau * g;
    next.p = s.p + s.v * dt + 0.5 * u_cmd * dt * dt + da * tau * (dt - tau * g);
    return next;
}

double cacc_control_step(double u, const NoisyErrors& errs, double u_tilde_prev, const CaccGains& gains,
                         double dt) {
    const double target = gains.kp * errs.e_hat + gains.kd * errs.edot_hat + u_tilde_prev;
    const double g = -std::expm1(-dt / gains.h);
    return u + (target - u) * g;
}

Measurement measure(const VehicleState& self, const VehicleState* pred, NoiseSource& noise,
                    const VehicleParams& params) {
    Measurement m;
    m.local = Vec3(self.p, self.v, self.a) + noise.draw_local();
    if (pred != nullptr) {
        const Vec2 truth(pred->p - self.p - params.length, pred->v - self.v);
        m.relative = truth + noise.draw_relative();
        m.has_relative = true;
    }
    return m;
}

NoisyErrors noisy_errors(const Measurement& m, const CaccGains& gains) {
    // e_hat = d + eta1 - r - h (v + xi2) = e + eta1 - h xi2, likewise for e'.
    NoisyErrors out;
    out.e_hat = m.relative(0) - desired_distance(m.local(1), gains);
    out.edot_hat = m.relative(1) - gains.h * m.local(2);
    return out;
}

ErrorState true_error_state(const VehicleState& pred, const VehicleState& self, const CaccGains& gains,
                            const VehicleParams& params) {
    const double d = pred.p - self.p - params.length;
    const double dv = pred.v - self.v;
    const double adot = (self.u - self.a) / params.tau;

    ErrorState es;
    es.x(0) = d - desired_distance(self.v, gains);
    es.x(1) = dv - gains.h * self.a;
    es.x(2) = (pred.a - self.a) - gains.h * adot;
    return es;
}

}  // namespace cacc
