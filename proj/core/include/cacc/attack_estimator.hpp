#pragma once

#include "cacc/platoon_dynamics.hpp"
#include "cacc/types.hpp"

namespace cacc {

struct AttackEstimate {
    double du_hat = 0.0;      // estimated error on the received intended acceleration (m/s^2)
    double valid_from = 0.0;  // time after which the EOI filter has settled
};

/// Left pseudo-inverse of the 2x1 column A12.
Eigen::RowVector2d column_pseudo_inverse(const Vec2& a);

/// du_hat = b^{-1} A22 A12^+ nu_fil. Exact only without measurement noise and
/// for piecewise-constant du; reported as advisory otherwise.
/// Throws ConfigError if b == 0.
double estimate_attack(const Vec2& nu_fil, const ErrorMatrices& mats);

/// Filter settling time used for `valid_from`: five time constants.
inline double estimator_settling_time(double K) { return 5.0 / K; }

inline AttackEstimate estimate_attack(const Vec2& nu_fil, const ErrorMatrices& mats, double observer_start,
                                      double K) {
    return {estimate_attack(nu_fil, mats), observer_start + estimator_settling_time(K)};
}

}  // namespace cacc
