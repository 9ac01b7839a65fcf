#include "cacc/scenario.hpp"
#include "cacc/simulation.hpp"
#include "cacc/trace_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cacc;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ScenarioConfig short_run(double duration = 3.0) {
    ScenarioConfig cfg;
    cfg.duration = duration;
    return cfg;
}

}  // namespace

TEST(Scenario, EmptyGivesDefaults) {
    const ScenarioConfig cfg = parse_scenario("  ");
    EXPECT_EQ(cfg.vehicles, 3);
    EXPECT_DOUBLE_EQ(cfg.dt, 1e-3);
    EXPECT_EQ(cfg.comm_mode, CommMode::EventTriggered);
    EXPECT_DOUBLE_EQ(cfg.observer.M, 20.0);
}

TEST(Scenario, ParsesFields) {
    const ScenarioConfig cfg = parse_scenario(R"({
        "vehicles": 4, "duration": 5, "comm_mode": "continuous",
        "noise": {"sigma": 0.02, "truncate": false},
        "trigger": {"T_L": 0.2, "T_H": 2.0, "dy_L": [3, 0.4]},
        "observer": {"M": 25, "K": 3},
        "lead_profile": [[0, 0], [1, 0.5]],
        "attack": {"target": 2, "onset": 3.0, "magnitude": 0.8}
    })");
    EXPECT_EQ(cfg.vehicles, 4);
    EXPECT_EQ(cfg.comm_mode, CommMode::Continuous);
    EXPECT_DOUBLE_EQ(cfg.noise.xi_bar(1), 0.04);
    EXPECT_FALSE(cfg.noise.truncate);
    EXPECT_DOUBLE_EQ(cfg.trigger.dy_L(1), 0.4);
    EXPECT_DOUBLE_EQ(cfg.observer.K, 3.0);
    EXPECT_DOUBLE_EQ(cfg.lead.at(0.5), 0.25);
    EXPECT_EQ(cfg.monitored(), 2);
    EXPECT_DOUBLE_EQ(cfg.attack.signal.at(3.5), 0.8);
}

TEST(Scenario, RoundTrip) {
    ScenarioConfig cfg = parse_scenario(R"({"attack": {"onset": 4.01, "magnitude": 0.6}, "seed": 9})");
    const ScenarioConfig back = parse_scenario(scenario_to_json(cfg));
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(cfg));
    EXPECT_EQ(back.seed, 9u);
}

TEST(Scenario, Errors) {
    auto field_of = [](const std::string& text) {
        try {
            parse_scenario(text);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(field_of(R"({"vehicles": 1})"), "vehicles");
    EXPECT_EQ(field_of(R"({"attack": {"target": 5}})"), "attack.target");
    EXPECT_EQ(field_of(R"({"bogus": 1})"), "bogus");
    EXPECT_EQ(field_of(R"({"observer": {"Mx": 1}})"), "observer.Mx");
    EXPECT_EQ(field_of(R"({"observer": {"M": 0.1}})"), "observer.M");
    EXPECT_EQ(field_of(R"({"comm_mode": "radio"})"), "comm_mode");
    EXPECT_EQ(field_of(R"({"trigger": {"T_L": 2, "T_H": 1}})"), "trigger.T_H");
    EXPECT_THROW(parse_scenario("{not json"), ConfigError);
    EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST(Simulation, Deterministic) {
    const RunResult a = run(short_run());
    const RunResult b = run(short_run());
    std::ostringstream ta, tb;
    write_trace(ta, a.trace, 3);
    write_trace(tb, b.trace, 3);
    EXPECT_EQ(ta.str(), tb.str());

    ScenarioConfig other = short_run();
    other.seed = 2;
    std::ostringstream tc;
    write_trace(tc, run(other).trace, 3);
    EXPECT_NE(ta.str(), tc.str());
}

TEST(Simulation, NoiseFreeConvergence) {
    ScenarioConfig cfg;
    cfg.comm_mode = CommMode::Continuous;
    cfg.noise.enabled = false;
    cfg.duration = 30.0;
    cfg.lead = LeadProfile({{0.0, 0.0}, {1.0, 0.0}, {1.001, 1.0}, {3.0, 1.0}, {3.001, 0.0}});
    const RunResult r = run(cfg);
    for (double e : r.trace.back().e) EXPECT_LT(std::abs(e), 1e-3);
}

// Event mode with a trigger that fires every tick reproduces continuous mode.
TEST(Simulation, EventModeDegeneratesToContinuous) {
    ScenarioConfig cont = short_run(2.0);
    cont.comm_mode = CommMode::Continuous;
    ScenarioConfig ev = cont;
    ev.comm_mode = CommMode::EventTriggered;
    ev.trigger.T_L = ev.dt / 2;
    ev.trigger.T_H = ev.dt;
    ev.trigger.dy_L = Vec2(1e-12, 1e-12);
    const RunResult a = run(cont);
    const RunResult b = run(ev);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        ASSERT_EQ(a.trace[k].nu_fil, b.trace[k].nu_fil);
        ASSERT_EQ(a.trace[k].vehicles[2].p, b.trace[k].vehicles[2].p);
        EXPECT_TRUE(b.trace[k].comm);
        if (a.trace[k].evaluated && b.trace[k].evaluated) {
            ASSERT_EQ(a.trace[k].upper, b.trace[k].upper);
        }
    }
}

TEST(Simulation, ContinuousCommErrorIsZero) {
    ScenarioConfig cfg = short_run();
    cfg.comm_mode = CommMode::Continuous;
    for (const auto& row : run(cfg).trace) ASSERT_EQ(row.du_c, 0.0);
}

TEST(Simulation, CalibrationInjectsAttack) {
    ScenarioConfig cfg = short_run(6.0);
    cfg.attack.calibrate_factor = 2.0;
    cfg.attack.onset = 4.01;
    const RunResult r = run(cfg);
    ASSERT_TRUE(r.calibrated_attack.has_value());
    EXPECT_GT(*r.calibrated_attack, 0.0);
    EXPECT_DOUBLE_EQ(r.trace[4500].phi, *r.calibrated_attack);
    EXPECT_DOUBLE_EQ(r.trace[4000].phi, 0.0);
}

TEST(TraceIo, EmitWritesAllFilesAndIsReproducible) {
    const auto dir = std::filesystem::temp_directory_path() / "cacc_emit_test";
    std::filesystem::remove_all(dir);
    const ScenarioConfig cfg = short_run(1.0);
    emit(run(cfg), dir / "a");
    emit(run(cfg), dir / "b");
    for (const char* f : {"trace.csv", "metrics.json", "alarms.csv", "plot_eoi.csv", "plot_comm_markers.csv"}) {
        ASSERT_TRUE(std::filesystem::exists(dir / "a" / f)) << f;
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    const std::string trace = slurp(dir / "a" / "trace.csv");
    EXPECT_EQ(static_cast<std::size_t>(std::count(trace.begin(), trace.end(), '\n')), cfg.ticks() + 2);
    EXPECT_EQ(trace.substr(0, trace.find('\n')), trace_header(3));
    std::filesystem::remove_all(dir);
}

TEST(TraceIo, UnwritableDirectory) {
    EXPECT_THROW(emit(run(short_run(0.01)), "/proc/cacc_cannot_write_here"), IoError);
}

TEST(Simulation, CommPeakViolationsLogged) {
    ScenarioConfig cfg = short_run(6.0);
    cfg.noise.enabled = false;
    EXPECT_EQ(run(cfg).comm_peak_violations, 0);
    // A short pulse that returns to zero before the next transmission.
    cfg.lead = LeadProfile({{0.0, 0.0}, {3.0, 0.0}, {3.05, 1.0}, {3.1, 0.0}});
    EXPECT_GT(run(cfg).comm_peak_violations, 0);
}
