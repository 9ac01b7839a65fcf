#pragma once

#include "cacc/platoon_dynamics.hpp"
#include "cacc/smo_observer.hpp"
#include "cacc/types.hpp"
#include "cacc/v2v_network.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cacc {

/// Analytic bounds that feed the detection thresholds. Vector quantities are
/// per output-error component.
struct BoundSet {
    Vec2 zeta_bar = Vec2::Zero();     // noise on the measured error outputs
    Vec2 eps1_bar = Vec2::Zero();     // measured-state estimation error
    double eps2_bar = 0.0;            // unmeasured-state estimation error at the evaluation time
    double eps2_0 = 0.0;
    Vec2 eps1dot_min = Vec2::Zero();  // slowest |d eps1/dt| while sliding
    Vec2 eps1dot_max = Vec2::Zero();
    Vec2 nu_bar = Vec2::Zero();       // max |nu|
    Vec2 nu_under = Vec2::Zero();     // min |nu|, clamped at -nu_bar
    Vec2 t_bar = Vec2::Zero();        // max dwell time; +inf if eps1dot_min <= 0
    bool nu_under_clamped = false;
    double du = 0.0;                  // assumed received-value error

    bool feasible() const { return (eps1dot_min.array() > 0.0).all(); }
};

/// zeta_bar = (eta_bar1 + h xi_bar2, eta_bar2 + h xi_bar3).
Vec2 noise_output_bound(const NoiseModel& noise, const CaccGains& gains);

/// Bound on the unmeasured-state error t seconds after observer start when
/// the received value is off by du:
/// eps2_0 e^{A22 t} + (|A21| (eps1_bar + zeta_bar) + |b du|) / |A22|.
double eps2_bound(const ErrorMatrices& mats, const Vec2& eps1_bar, const Vec2& zeta_bar, double eps2_0, double du,
                  double t_since_start);

/// Same as `compute_bounds` but never throws; infeasible components get an
/// infinite dwell time.
BoundSet compute_bounds_unchecked(const ObserverConfig& cfg, const ErrorMatrices& mats, const NoiseModel& noise,
                                  const CaccGains& gains, double du, double t_since_start);

/// Throws ConfigError when eps1dot_min <= 0 in some component.
BoundSet compute_bounds(const ObserverConfig& cfg, const ErrorMatrices& mats, const NoiseModel& noise,
                        const CaccGains& gains, double du, double t_since_start);

/// Sliding gain condition M > |A12| eps2_bar + |A11| zeta_bar, componentwise.
bool gain_condition_holds(const ObserverConfig& cfg, const ErrorMatrices& mats, const BoundSet& b);

/// Checks the gain condition at the steady-state eps2 bound (transient
/// decayed, du = 0). Throws ConfigError naming observer.M on violation.
void validate_gain_condition(const ObserverConfig& cfg, const ErrorMatrices& mats, const NoiseModel& noise,
                             const CaccGains& gains);

/// t_bar_j = 2 eps1_bar_j / eps1dot_min_j. Throws ConfigError if infeasible.
Vec2 max_dwell_time(const BoundSet& b);

/// One-switch-ahead bound computed at the start of an interval.
double osa_threshold(double nu_fil_at_switch, const BoundSet& b, double K, int j);

/// Multiple-switches-ahead bound: propagates `prev_bound` down through the
/// measured opposite-sign interval t_minus and back up through the longest
/// admissible same-sign interval t_plus = (eps1dot_max / eps1dot_min) t_minus.
double msa_threshold(double prev_bound, double t_minus, const BoundSet& b, double K, int j);

enum class Branch { Seed, Osa, Msa };

const char* to_string(Branch b);

struct CombinedThreshold {
    double value = 0.0;
    Branch branch = Branch::Msa;
};

/// min(osa, msa); a tie is labelled MSA.
CombinedThreshold combined_threshold(double osa, double msa);

/// Previous bound the MSA recursion starts from at the k-th interval start
/// (k = 1 is t_2). k = 1 uses the OSA seed computed with nu_fil(t0) = 0;
/// later ones use the combined bound from the interval start before.
/// `combined_history[i]` is the combined bound at t_{2(i+1)}.
double bootstrap_rule(std::size_t k, double osa_seed, std::span<const double> combined_history);

/// Threshold chain for one side of one component. Works in "upper bound"
/// coordinates; the lower side is fed negated filter values.
class ThresholdChain {
public:
    void seed(double osa0);
    CombinedThreshold advance(double nu_fil_at_switch, double t_minus, const BoundSet& b, double K, int j);

    double bound() const { return bound_; }
    Branch branch() const { return branch_; }
    std::size_t k() const { return k_; }
    double seed_value() const { return seed_; }

private:
    double seed_ = 0.0;
    double bound_ = 0.0;
    Branch branch_ = Branch::Seed;
    std::size_t k_ = 0;
};

/// Upper and lower chains of one component plus its switch clock.
struct ComponentThresholds {
    ThresholdChain upper;
    ThresholdChain lower;  // stores -lower_bound
    double interval_start = 0.0;

    double upper_bound() const { return upper.bound(); }
    double lower_bound() const { return -lower.bound(); }
};

/// Everything needed to evaluate bounds at a given time.
struct ThresholdModel {
    ObserverConfig observer;
    ErrorMatrices mats;
    NoiseModel noise;
    CaccGains gains;
    double t0 = 0.0;

    BoundSet bounds(double t, double du = 0.0) const {
        return compute_bounds_unchecked(observer, mats, noise, gains, du, t - t0);
    }
};

using ChainState = std::array<ComponentThresholds, 2>;

/// Seeds both components at observer start with nu_fil(t0) = 0.
ChainState seed_chains(const ThresholdModel& model);

/// Applies one switch event to the chains.
void apply_switch(ChainState& chains, const SwitchEvent& ev, double nu_fil_j, const BoundSet& b, double K);

struct AlarmEvent {
    double time = 0.0;         // when the alarm was raised
    double sample_time = 0.0;  // when the violating value occurred
    int component = 0;
    double value = 0.0;
    double bound = 0.0;
    bool upper = true;
    CommMode mode = CommMode::Continuous;
};

/// Alarm for the first component of nu_fil outside [lower, upper].
std::optional<AlarmEvent> check_alarm(const Vec2& nu_fil, const Vec2& upper, const Vec2& lower, double t,
                                      CommMode mode = CommMode::Continuous);

/// One filtered-EOI sample awaiting evaluation.
struct WindowSample {
    std::size_t tick = 0;
    double t = 0.0;
    Vec2 nu_fil = Vec2::Zero();
    std::array<std::optional<SwitchEvent>, 2> switches;
};

struct EvaluatedSample {
    std::size_t tick = 0;
    double t = 0.0;
    Vec2 nu_fil = Vec2::Zero();
    Vec2 upper = Vec2::Zero();
    Vec2 lower = Vec2::Zero();
    std::array<bool, 2> violated{false, false};
    bool evaluated = true;
};

struct RetroactiveResult {
    bool empty = false;  // no switch in the window, nothing evaluable
    ChainState chains;
    std::vector<EvaluatedSample> samples;
};

/// Replays the switches buffered since the previous communication with the
/// bounds inflated by du_bar, and evaluates every buffered sample against
/// the thresholds that were active at its time.
RetroactiveResult retroactive_update(const ChainState& start, std::span<const WindowSample> window, double du_bar,
                                     const ThresholdModel& model);

/// Per-tick driver. In continuous mode samples are evaluated as they come;
/// in event-triggered mode they are buffered until the next communication.
class ThresholdMonitor {
public:
    ThresholdMonitor(ThresholdModel model, CommMode mode);

    void start(double t0);

    /// Returns the evaluated sample in continuous mode, nothing otherwise.
    std::optional<EvaluatedSample> observe(std::size_t tick, double t, const Vec2& nu_fil,
                                           const std::array<std::optional<SwitchEvent>, 2>& switches);

    /// Event-triggered mode: evaluates the pending window at a communication
    /// instant. `du_bar` is empty before the second transmission (treated as 0).
    RetroactiveResult on_communication(double t, std::optional<double> du_bar);

    Vec2 upper() const;
    Vec2 lower() const;
    const ChainState& chains() const { return chains_; }
    const ThresholdModel& model() const { return model_; }
    const std::vector<AlarmEvent>& alarms() const { return alarms_; }
    std::size_t pending() const { return window_.size(); }

private:
    void record_alarms(const EvaluatedSample& s, double raised_at);

    ThresholdModel model_;
    CommMode mode_;
    ChainState chains_;
    std::vector<WindowSample> window_;
    std::array<bool, 2> in_violation_{false, false};
    std::vector<AlarmEvent> alarms_;
};

}  // namespace cacc
