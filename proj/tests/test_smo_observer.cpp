#include "cacc/smo_observer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cacc;

namespace {

const ErrorMatrices& mats() {
    static const ErrorMatrices m = build_error_matrices(CaccGains{}, VehicleParams{});
    return m;
}

}  // namespace

TEST(PseudoControl, ZeroAtZero) {
    EXPECT_EQ(pseudo_control(Vec2::Zero(), ObserverConfig{}, mats()), Vec2::Zero());
}

TEST(PseudoControl, HandValues) {
    const Vec2 nu = pseudo_control(Vec2(0.1, 0.2), ObserverConfig{}, mats());
    EXPECT_NEAR(nu(0), 20.2, 1e-12);
    EXPECT_NEAR(nu(1), 20.0, 1e-12);
    const Vec2 neg = pseudo_control(Vec2(-0.1, -0.2), ObserverConfig{}, mats());
    EXPECT_NEAR(neg(0), -20.2, 1e-12);
    EXPECT_NEAR(neg(1), -20.0, 1e-12);
}

TEST(OutputError, Subtraction) {
    ObserverState s;
    s.z1_hat = Vec2(1, 2);
    EXPECT_EQ(output_error(s, Vec2(0.5, 2.5)).eps_y, Vec2(0.5, -0.5));
    EXPECT_EQ(output_error(s, s.z1_hat).eps_y, Vec2::Zero());
}

TEST(ObserverStep, EulerUpdate) {
    ObserverState s;
    s.z1_hat = Vec2(0.3, -0.1);
    s.z2_hat = 0.4;
    const Vec2 y(0.2, -0.3);
    const double dt = 1e-3;
    const ObserverConfig cfg;
    const Vec2 nu = pseudo_control(s.z1_hat - y, cfg, mats());
    const ObserverState n = observer_step(s, y, 0.0, cfg, mats(), dt);
    const Vec2 expect = s.z1_hat + dt * (mats().A11 * s.z1_hat + mats().A12 * s.z2_hat - nu);
    EXPECT_NEAR((n.z1_hat - expect).norm(), 0.0, 1e-15);
}

TEST(ObserverStep, ExactEstimateStaysQuiet) {
    const ObserverState s = initial_observer_state(Vec2::Zero());
    ObserverTick tick;
    const ObserverState n = observer_step(s, Vec2::Zero(), 0.0, ObserverConfig{}, mats(), 1e-3, &tick);
    EXPECT_EQ(tick.nu, Vec2::Zero());
    EXPECT_EQ(n.z1_hat, Vec2::Zero());
    EXPECT_EQ(n.z2_hat, 0.0);
}

TEST(EoiFilter, FixedPoint) {
    const Vec2 v(0.3, -2.0);
    EXPECT_EQ(eoi_filter_step(v, v, 2.0, 1e-3), v);
}

TEST(EoiFilter, StepResponse) {
    Vec2 f = Vec2::Zero();
    for (int k = 0; k < 500; ++k) f = eoi_filter_step(f, Vec2(1.0, -1.0), 2.0, 1e-3);
    EXPECT_NEAR(f(0), 0.632120558828558, 1e-12);
    EXPECT_NEAR(f(1), -0.632120558828558, 1e-12);
}

TEST(EoiFilter, ClosedFormRandomConstants) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> c_dist(-25.0, 25.0), k_dist(0.5, 10.0);
    const double dt = 1e-3;
    for (int trial = 0; trial < 10; ++trial) {
        const double c = c_dist(rng), K = k_dist(rng);
        Vec2 f = Vec2::Zero();
        double worst = 0.0;
        for (int k = 1; k <= 10000; ++k) {
            f = eoi_filter_step(f, Vec2(c, -c), K, dt);
            const double exact = c * -std::expm1(-K * k * dt);
            worst = std::max(worst, std::abs(f(0) - exact) / std::abs(exact));
        }
        EXPECT_LE(worst, 1e-9) << "c=" << c << " K=" << K;
    }
}

TEST(ObserverStep, SwitchBookkeeping) {
    SlidingModeObserver obs(ObserverConfig{}, mats(), 1e-3);
    obs.start(0.0, Vec2::Zero());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> noise(-0.1, 0.1);
    std::array<int, 2> sign{0, 0};
    int switches = 0;
    for (int k = 0; k < 5000; ++k) {
        const ObserverTick tick = obs.step(k * 1e-3, Vec2(noise(rng), noise(rng)));
        for (int j = 0; j < 2; ++j) {
            const int s = static_cast<int>(sgn(tick.eps_y(j)));
            if (tick.switches[j]) {
                ++switches;
                EXPECT_EQ(tick.switches[j]->sign, s);
                EXPECT_NE(sign[j], s);
                EXPECT_NE(sign[j], 0);
            } else if (s != 0 && sign[j] != 0) {
                EXPECT_EQ(s, sign[j]) << "sign changed without a switch event at tick " << k;
            }
            if (s != 0) sign[j] = s;
        }
    }
    EXPECT_GT(switches, 100);
}

// Noise-free tracking of a smooth error trajectory: the output error settles
// into the discrete chattering band.
TEST(ObserverStep, ChatteringBand) {
    const ErrorMatrices& m = mats();
    const ObserverConfig cfg;
    const double dt = 1e-3;
    Vec3 x(0.5, -0.2, 0.1);
    ObserverState s = initial_observer_state(x.head<2>());
    double worst = 0.0;
    for (int k = 0; k < 5000; ++k) {
        ObserverTick tick;
        s = observer_step(s, x.head<2>(), k * dt, cfg, m, dt, &tick);
        if (k * dt > 1.0) worst = std::max(worst, tick.eps_y.cwiseAbs().maxCoeff());
        x = x + dt * (m.A_e * x);
    }
    EXPECT_LE(worst, cfg.M * dt + 1e-12);
}

TEST(ObserverConfig, Validation) {
    ObserverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.P = (Mat2() << -1, 0, 0, 1).finished();
    EXPECT_THROW(c.validate(), ConfigError);
    c = ObserverConfig{};
    c.M = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = ObserverConfig{};
    c.K = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}
