#include "cacc/attack_estimator.hpp"

namespace cacc {

Eigen::RowVector2d column_pseudo_inverse(const Vec2& a) {
    const double n2 = a.squaredNorm();
    if (n2 == 0.0) return Eigen::RowVector2d::Zero();
    return a.transpose() / n2;
}

double estimate_attack(const Vec2& nu_fil, const ErrorMatrices& mats) {
    if (mats.b == 0.0) throw ConfigError("vehicle.tau", "input gain b is zero");
    return (mats.A22 / mats.b) * column_pseudo_inverse(mats.A12).dot(nu_fil);
}

}  // namespace cacc
