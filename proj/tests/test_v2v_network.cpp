#include "cacc/v2v_network.hpp"

#include <gtest/gtest.h>

using namespace cacc;

namespace {

CommState sent_at(double t, const Vec2& y) {
    CommState cs;
    cs.tau_last = t;
    cs.y_ref = y;
    cs.transmissions = 1;
    return cs;
}

}  // namespace

TEST(Trigger, UpperIntervalForces) {
    const CommState cs = sent_at(2.0, Vec2(0, 0));
    EXPECT_TRUE(trigger_check(cs, Vec2(0, 0), 3.0, TriggerConfig{}));
}

TEST(Trigger, LowerIntervalBlocks) {
    const CommState cs = sent_at(2.0, Vec2(0, 0));
    EXPECT_FALSE(trigger_check(cs, Vec2(1e6, 1e6), 2.05, TriggerConfig{}));
}

TEST(Trigger, PositionDrift) {
    const CommState cs = sent_at(2.0, Vec2(10.0, 10.0));
    EXPECT_TRUE(trigger_check(cs, Vec2(14.2, 10.0), 2.2, TriggerConfig{}));
    EXPECT_FALSE(trigger_check(cs, Vec2(13.9, 10.4), 2.2, TriggerConfig{}));
    EXPECT_TRUE(trigger_check(cs, Vec2(10.0, 9.5), 2.2, TriggerConfig{}));
}

TEST(Transmit, AttackInjection) {
    const AttackSignal none;
    CommState cs = transmit(CommState{}, 1.0, Vec2::Zero(), 0.0, none);
    EXPECT_DOUBLE_EQ(cs.u_tilde_last, 1.0);
    EXPECT_DOUBLE_EQ(comm_error(1.0, cs), 0.0);

    const AttackSignal half = AttackSignal::constant(0.0, 0.5);
    cs = transmit(CommState{}, 1.0, Vec2::Zero(), 0.0, half);
    EXPECT_DOUBLE_EQ(cs.u_tilde_last, 1.5);
    EXPECT_DOUBLE_EQ(comm_error(1.0, cs), 0.0);
}

TEST(Transmit, CommErrorTracksStaleValue) {
    const CommState cs = transmit(CommState{}, 1.0, Vec2::Zero(), 0.0, AttackSignal{});
    EXPECT_NEAR(comm_error(1.3, cs), -0.3, 1e-15);
}

TEST(Transmit, DeltaUBar) {
    CommState cs = transmit(CommState{}, 0.9, Vec2::Zero(), 0.0, AttackSignal{});
    EXPECT_FALSE(delta_u_bar(cs).has_value());
    cs = transmit(cs, 1.2, Vec2::Zero(), 0.5, AttackSignal{});
    EXPECT_NEAR(*delta_u_bar(cs), 0.3, 1e-15);
    cs = transmit(cs, 1.2, Vec2::Zero(), 1.0, AttackSignal{});
    EXPECT_DOUBLE_EQ(*delta_u_bar(cs), 0.0);
    cs = transmit(cs, 0.2, Vec2::Zero(), 1.5, AttackSignal{});
    EXPECT_LT(*delta_u_bar(cs), 0.0);
}

TEST(AttackSignal, Schedule) {
    const AttackSignal a({{6.0, 0.0}, {4.01, 0.7}});
    EXPECT_DOUBLE_EQ(a.at(4.0), 0.0);
    EXPECT_DOUBLE_EQ(a.at(4.01), 0.7);
    EXPECT_DOUBLE_EQ(a.at(5.99), 0.7);
    EXPECT_DOUBLE_EQ(a.at(6.5), 0.0);
    EXPECT_DOUBLE_EQ(*a.onset(), 4.01);
    EXPECT_FALSE(AttackSignal{}.onset().has_value());
}

TEST(V2VLink, AttackFirstCorruptsAtNextTransmission) {
    TriggerConfig cfg;
    V2VLink link(CommMode::EventTriggered, cfg, AttackSignal::constant(4.01, 0.5));
    link.start(3.3, 0.0, Vec2::Zero());
    for (int k = 3301; k <= 4300; ++k) {
        const double t = k * 1e-3;
        const bool sent = link.update(t, 0.0, Vec2::Zero());
        EXPECT_DOUBLE_EQ(link.received(), k < 4300 ? 0.0 : 0.5) << t;
        EXPECT_EQ(sent, k == 4300) << t;
    }
}

TEST(V2VLink, ContinuousAlwaysSends) {
    V2VLink link(CommMode::Continuous, TriggerConfig{}, AttackSignal{});
    link.start(0.0, 0.0, Vec2::Zero());
    for (int k = 1; k < 50; ++k) {
        EXPECT_TRUE(link.update(k * 1e-3, 0.01 * k, Vec2::Zero()));
        EXPECT_DOUBLE_EQ(comm_error(0.01 * k, link.state()), 0.0);
    }
}

TEST(TriggerConfig, Validation) {
    TriggerConfig c;
    c.T_H = 0.05;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TriggerConfig{};
    c.dy_L(1) = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
}
