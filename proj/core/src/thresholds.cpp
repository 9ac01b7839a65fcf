#include "cacc/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cacc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Vec2 noise_output_bound(const NoiseModel& noise, const CaccGains& gains) {
    return Vec2(noise.eta_bar(0) + gains.h * noise.xi_bar(1), noise.eta_bar(1) + gains.h * noise.xi_bar(2));
}

double eps2_bound(const ErrorMatrices& mats, const Vec2& eps1_bar, const Vec2& zeta_bar, double eps2_0, double du,
                  double t_since_start) {
    const double forcing = mats.A21.cwiseAbs().dot(eps1_bar + zeta_bar) + std::abs(mats.b * du);
    return eps2_0 * std::exp(mats.A22 * t_since_start) + forcing / std::abs(mats.A22);
}

BoundSet compute_bounds_unchecked(const ObserverConfig& cfg, const ErrorMatrices& mats, const NoiseModel& noise,
                                  const CaccGains& gains, double du, double t_since_start) {
    BoundSet b;
    b.du = du;
    b.eps2_0 = cfg.eps2_0;
    b.zeta_bar = noise_output_bound(noise, gains);
    b.eps1_bar = b.zeta_bar;
    b.eps2_bar = eps2_bound(mats, b.eps1_bar, b.zeta_bar, cfg.eps2_0, du, t_since_start);

    const Vec2 a12_eps2 = mats.A12.cwiseAbs() * b.eps2_bar;
    const Vec2 a11_zeta = mats.A11.cwiseAbs() * b.zeta_bar;
    const Vec2 p_term = cfg.P.cwiseAbs() * (b.zeta_bar + b.eps1_bar);
    b.eps1dot_min = Vec2::Constant(cfg.M) - a12_eps2;
    b.eps1dot_max = p_term + a12_eps2 + a11_zeta + Vec2::Constant(cfg.M);

    const Vec2 nu_spread = (mats.A11 + cfg.P).cwiseAbs() * (b.eps1_bar + b.zeta_bar);
    b.nu_bar = nu_spread + Vec2::Constant(cfg.M);
    b.nu_under = Vec2::Constant(cfg.M) - nu_spread;
    for (int j = 0; j < 2; ++j) {
        if (b.nu_under(j) < -b.nu_bar(j)) {
            b.nu_under(j) = -b.nu_bar(j);
            b.nu_under_clamped = true;
        }
        b.t_bar(j) = b.eps1dot_min(j) > 0.0 ? 2.0 * b.eps1_bar(j) / b.eps1dot_min(j) : kInf;
    }
    return b;
}

BoundSet compute_bounds(const ObserverConfig& cfg, const ErrorMatrices& mats, const NoiseModel& noise,
                        const CaccGains& gains, double du, double t_since_start) {
    BoundSet b = compute_bounds_unchecked(cfg, mats, noise, gains, du, t_since_start);
    if (!b.feasible()) {
        throw ConfigError("observer.M", "minimum sliding rate is not positive, max dwell time undefined");
    }
    return b;
}

bool gain_condition_holds(const ObserverConfig& cfg, const ErrorMatrices& mats, const BoundSet& b) {
    const Vec2 need = mats.A12.cwiseAbs() * b.eps2_bar + mats.A11.cwiseAbs() * b.zeta_bar;
    return (need.array() < cfg.M).all();
}

void validate_gain_condition(const ObserverConfig& cfg, const ErrorMatrices& mats, const NoiseModel& noise,
                             const CaccGains& gains) {
    ObserverConfig steady = cfg;
    steady.eps2_0 = 0.0;
    const BoundSet b = compute_bounds_unchecked(steady, mats, noise, gains, 0.0, 0.0);
    if (!gain_condition_holds(cfg, mats, b)) {
        throw ConfigError("observer.M", "switching gain too small for the noise bounds");
    }
}

Vec2 max_dwell_time(const BoundSet& b) {
    if (!b.feasible()) throw ConfigError("observer.M", "minimum sliding rate is not positive");
    return Vec2(2.0 * b.eps1_bar(0) / b.eps1dot_min(0), 2.0 * b.eps1_bar(1) / b.eps1dot_min(1));
}

double osa_threshold(double nu_fil_at_switch, const BoundSet& b, double K, int j) {
    const double decay = std::exp(-K * b.t_bar(j));
    return decay * nu_fil_at_switch + (1.0 - decay) * b.nu_bar(j);
}

double msa_threshold(double prev_bound, double t_minus, const BoundSet& b, double K, int j) {
    const double ratio = b.eps1dot_min(j) > 0.0 ? b.eps1dot_max(j) / b.eps1dot_min(j) : kInf;
    const double t_plus = t_minus > 0.0 ? ratio * t_minus : 0.0;
    const double down = std::exp(-K * t_minus);
    const double up = std::exp(-K * t_plus);
    return up * (down * prev_bound - (1.0 - down) * b.nu_under(j)) + (1.0 - up) * b.nu_bar(j);
}

const char* to_string(Branch b) {
    switch (b) {
        case Branch::Seed: return "seed";
        case Branch::Osa: return "osa";
        case Branch::Msa: return "msa";
    }
    return "?";
}

CombinedThreshold combined_threshold(double osa, double msa) {
    if (osa < msa) return {osa, Branch::Osa};
    return {msa, Branch::Msa};
}

double bootstrap_rule(std::size_t k, double osa_seed, std::span<const double> combined_history) {
    if (k <= 1 || combined_history.empty()) return osa_seed;
    return combined_history[std::min(k - 2, combined_history.size() - 1)];
}

void ThresholdChain::seed(double osa0) {
    seed_ = osa0;
    bound_ = osa0;
    branch_ = Branch::Seed;
    k_ = 0;
}

CombinedThreshold ThresholdChain::advance(double nu_fil_at_switch, double t_minus, const BoundSet& b, double K,
                                          int j) {
    // The chain always holds the previous combined bound (the seed at k = 1).
    const double prev = bound_;
    const CombinedThreshold c =
        combined_threshold(osa_threshold(nu_fil_at_switch, b, K, j), msa_threshold(prev, t_minus, b, K, j));
    bound_ = c.value;
    branch_ = c.branch;
    ++k_;
    return c;
}

ChainState seed_chains(const ThresholdModel& model) {
    const BoundSet b = model.bounds(model.t0);
    ChainState chains;
    for (int j = 0; j < 2; ++j) {
        const double seed = osa_threshold(0.0, b, model.observer.K, j);
        chains[j].upper.seed(seed);
        chains[j].lower.seed(seed);
        chains[j].interval_start = model.t0;
    }
    return chains;
}

void apply_switch(ChainState& chains, const SwitchEvent& ev, double nu_fil_j, const BoundSet& b, double K) {
    auto& c = chains[ev.component];
    const double t_minus = std::max(0.0, ev.t - c.interval_start);
    if (ev.sign > 0) {
        c.upper.advance(nu_fil_j, t_minus, b, K, ev.component);
    } else {
        c.lower.advance(-nu_fil_j, t_minus, b, K, ev.component);
    }
    c.interval_start = ev.t;
}

std::optional<AlarmEvent> check_alarm(const Vec2& nu_fil, const Vec2& upper, const Vec2& lower, double t,
                                      CommMode mode) {
    for (int j = 0; j < 2; ++j) {
        if (nu_fil(j) > upper(j)) return AlarmEvent{t, t, j, nu_fil(j), upper(j), true, mode};
        if (nu_fil(j) < lower(j)) return AlarmEvent{t, t, j, nu_fil(j), lower(j), false, mode};
    }
    return std::nullopt;
}

namespace {

EvaluatedSample evaluate(const ChainState& chains, std::size_t tick, double t, const Vec2& nu_fil) {
    EvaluatedSample s;
    s.tick = tick;
    s.t = t;
    s.nu_fil = nu_fil;
    for (int j = 0; j < 2; ++j) {
        s.upper(j) = chains[j].upper_bound();
        s.lower(j) = chains[j].lower_bound();
        s.violated[j] = nu_fil(j) > s.upper(j) || nu_fil(j) < s.lower(j);
    }
    return s;
}

void apply_sample_switches(ChainState& chains, const WindowSample& ws, const ThresholdModel& model, double du) {
    std::optional<BoundSet> b;
    for (const auto& sw : ws.switches) {
        if (!sw) continue;
        if (!b) b = model.bounds(sw->t, du);
        apply_switch(chains, *sw, ws.nu_fil(sw->component), *b, model.observer.K);
    }
}

}  // namespace

RetroactiveResult retroactive_update(const ChainState& start, std::span<const WindowSample> window, double du_bar,
                                     const ThresholdModel& model) {
    RetroactiveResult out;
    out.chains = start;
    out.empty = std::none_of(window.begin(), window.end(),
                             [](const WindowSample& w) { return w.switches[0] || w.switches[1]; });
    out.samples.reserve(window.size());
    for (const auto& ws : window) {
        apply_sample_switches(out.chains, ws, model, du_bar);
        EvaluatedSample s = evaluate(out.chains, ws.tick, ws.t, ws.nu_fil);
        if (out.empty) {
            s.evaluated = false;
            s.violated = {false, false};
        }
        out.samples.push_back(s);
    }
    return out;
}

ThresholdMonitor::ThresholdMonitor(ThresholdModel model, CommMode mode) : model_(std::move(model)), mode_(mode) {
    chains_ = seed_chains(model_);
}

void ThresholdMonitor::start(double t0) {
    model_.t0 = t0;
    chains_ = seed_chains(model_);
    window_.clear();
    alarms_.clear();
    in_violation_ = {false, false};
}

std::optional<EvaluatedSample> ThresholdMonitor::observe(std::size_t tick, double t, const Vec2& nu_fil,
                                                         const std::array<std::optional<SwitchEvent>, 2>& switches) {
    WindowSample ws{tick, t, nu_fil, switches};
    if (mode_ == CommMode::EventTriggered) {
        window_.push_back(ws);
        return std::nullopt;
    }
    apply_sample_switches(chains_, ws, model_, 0.0);
    EvaluatedSample s = evaluate(chains_, tick, t, nu_fil);
    record_alarms(s, t);
    return s;
}

RetroactiveResult ThresholdMonitor::on_communication(double t, std::optional<double> du_bar) {
    RetroactiveResult r = retroactive_update(chains_, window_, du_bar.value_or(0.0), model_);
    chains_ = r.chains;
    for (const auto& s : r.samples) {
        if (s.evaluated) record_alarms(s, t);
    }
    window_.clear();
    return r;
}

Vec2 ThresholdMonitor::upper() const { return Vec2(chains_[0].upper_bound(), chains_[1].upper_bound()); }

Vec2 ThresholdMonitor::lower() const { return Vec2(chains_[0].lower_bound(), chains_[1].lower_bound()); }

void ThresholdMonitor::record_alarms(const EvaluatedSample& s, double raised_at) {
    for (int j = 0; j < 2; ++j) {
        if (s.violated[j] && !in_violation_[j]) {
            const bool up = s.nu_fil(j) > s.upper(j);
            alarms_.push_back(AlarmEvent{raised_at, s.t, j, s.nu_fil(j), up ? s.upper(j) : s.lower(j), up, mode_});
        }
        in_violation_[j] = s.violated[j];
    }
}

}  // namespace cacc
