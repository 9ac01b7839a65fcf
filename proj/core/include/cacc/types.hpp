#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace cacc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Row2 = Eigen::RowVector2d;

// Tolerance used when comparing simulation times that are built from tick
// counts, so that e.g. 100 ticks of 1 ms compare equal to 0.1 s.
inline constexpr double kTimeEps = 1e-9;

/// A configuration value violates its documented invariant. `field()` names
/// the offending entry using the scenario-file path (e.g. "cacc.h").
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Some simulated quantity became NaN or infinite.
class NumericDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Componentwise sign with sgn(0) = 0.
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline Vec2 sgn(const Vec2& x) { return Vec2(sgn(x(0)), sgn(x(1))); }

}  // namespace cacc
