#pragma once

#include "cacc/platoon_dynamics.hpp"
#include "cacc/smo_observer.hpp"
#include "cacc/v2v_network.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cacc {

/// Piecewise-linear intended acceleration of the platoon leader, given as
/// (time, u) breakpoints. Held constant before the first and after the last.
class LeadProfile {
public:
    LeadProfile() = default;
    explicit LeadProfile(std::vector<std::pair<double, double>> points);

    double at(double t) const;
    /// First time the profile leaves its initial value.
    std::optional<double> onset() const;
    const std::vector<std::pair<double, double>>& points() const { return points_; }

    /// Accelerate to 1 m/s^2 from 2.01 s, hold, release at 12.01 s.
    static LeadProfile default_maneuver();

private:
    std::vector<std::pair<double, double>> points_;
};

struct AttackConfig {
    int target = 1;  // follower whose incoming link is attacked and monitored
    AttackSignal signal;
    // When set, the run first executes an attack-free calibration and then
    // injects factor * steady-state threshold from `onset` on.
    std::optional<double> calibrate_factor;
    double onset = 4.01;
};

struct ScenarioConfig {
    int vehicles = 3;
    double duration = 20.0;
    double dt = 1e-3;
    CommMode comm_mode = CommMode::EventTriggered;
    double initial_speed = 10.0;
    VehicleParams vehicle;
    CaccGains gains;
    NoiseModel noise;
    TriggerConfig trigger;
    ObserverConfig observer;
    LeadProfile lead = LeadProfile::default_maneuver();
    AttackConfig attack;
    std::uint64_t seed = 1;
    // Samples before observer start + this are excluded from max |eps1|.
    double eps1_transient = 1.0;

    int monitored() const { return attack.target; }
    std::size_t ticks() const;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Parses a scenario from JSON text. Empty or whitespace-only text yields
/// the defaults. Unknown keys are rejected.
ScenarioConfig parse_scenario(const std::string& text);

/// Reads and parses a scenario file. Missing file -> IoError.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// The scenario as JSON, suitable for `parse_scenario`.
std::string scenario_to_json(const ScenarioConfig& cfg);

}  // namespace cacc
