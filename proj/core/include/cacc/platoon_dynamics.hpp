#pragma once

#include "cacc/types.hpp"

#include <cstdint>
#include <random>

namespace cacc {

struct VehicleParams {
    double tau = 0.1;     // engine time constant (s)
    double length = 4.0;  // vehicle length (m)

    void validate() const;
};

struct CaccGains {
    double kp = 0.2;
    double kd = 0.7;
    double h = 0.7;  // time headway (s)
    double r = 1.5;  // standstill distance (m)

    void validate() const;
};

struct VehicleState {
    double p = 0.0;
    double v = 0.0;
    double a = 0.0;
    double u = 0.0;  // controller state, the intended acceleration

    bool finite() const;
};

/// Sensor readings of one vehicle. `local` is (p, v, a) + xi; `relative` is
/// (d, dv) + eta and is only meaningful for followers.
struct Measurement {
    Vec3 local = Vec3::Zero();
    Vec2 relative = Vec2::Zero();
    bool has_relative = false;
};

struct NoiseModel {
    Vec3 sigma_xi = Vec3::Constant(0.05);
    Vec2 sigma_eta = Vec2::Constant(0.05);
    Vec3 xi_bar = Vec3::Constant(0.1);
    Vec2 eta_bar = Vec2::Constant(0.1);
    bool truncate = true;
    // When false every draw is zero; the bounds still feed the thresholds.
    bool enabled = true;

    /// Equal std-dev on every channel with bounds at 2 sigma.
    static NoiseModel with_sigma(double sigma);

    void validate() const;
};

/// Seeded source of the measurement noise of a whole platoon.
class NoiseSource {
public:
    NoiseSource(NoiseModel model, std::uint64_t seed);

    Vec3 draw_local();
    Vec2 draw_relative();

    const NoiseModel& model() const { return model_; }

private:
    double draw(double sigma, double bound);

    NoiseModel model_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Spacing-error dynamics x_e' = A_e x_e + B_e zeta, y_e = C_e x_e + D_e zeta,
/// and the measured/unmeasured partition used by the observer.
struct ErrorMatrices {
    Mat3 A_e;
    Mat3 B_e;
    Mat23 C_e;
    Mat23 D_e;

    Mat2 A11;
    Vec2 A12;
    Row2 A21;
    double A22 = 0.0;
    double b = 0.0;
};

/// (e, e', e'') of one follower.
struct ErrorState {
    Vec3 x = Vec3::Zero();
};

/// Controller inputs as seen through noisy sensors.
struct NoisyErrors {
    double e_hat = 0.0;
    double edot_hat = 0.0;

    Vec2 as_vector() const { return Vec2(e_hat, edot_hat); }
};

ErrorMatrices build_error_matrices(const CaccGains& gains, const VehicleParams& params);

/// Exact zero-order-hold step of p' = v, v' = a, a' = (u_cmd - a)/tau.
/// The controller state `u` is carried through unchanged.
VehicleState vehicle_step(const VehicleState& s, double u_cmd, double dt, const VehicleParams& params);

inline double desired_distance(double v, const CaccGains& gains) { return gains.r + gains.h * v; }

/// Exact step of h u' = -u + kp e_hat + kd edot_hat + u_tilde_prev with the
/// right-hand side inputs held over dt.
double cacc_control_step(double u, const NoisyErrors& errs, double u_tilde_prev, const CaccGains& gains,
                         double dt);

/// Samples the sensors of `self`; `pred` is the vehicle directly ahead, or
/// null for the platoon leader.
Measurement measure(const VehicleState& self, const VehicleState* pred, NoiseSource& noise,
                    const VehicleParams& params);

NoisyErrors noisy_errors(const Measurement& m, const CaccGains& gains);

/// Ground truth (e, e', e'') of a follower. e'' is taken from the model
/// accelerations, not by differencing.
ErrorState true_error_state(const VehicleState& pred, const VehicleState& self, const CaccGains& gains,
                            const VehicleParams& params);

}  // namespace cacc
