#include "cacc/scenario.hpp"

#include "cacc/thresholds.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cacc {

using nlohmann::json;

LeadProfile::LeadProfile(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second)) {
            throw ConfigError("lead_profile", "breakpoints must be finite");
        }
        if (i > 0 && points_[i].first < points_[i - 1].first) {
            throw ConfigError("lead_profile", "breakpoint times must be nondecreasing");
        }
    }
}

double LeadProfile::at(double t) const {
    if (points_.empty()) return 0.0;
    if (t <= points_.front().first) return points_.front().second;
    if (t >= points_.back().first) return points_.back().second;
    const auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                     [](double x, const auto& p) { return x < p.first; });
    const auto lo = hi - 1;
    const double span = hi->first - lo->first;
    if (span <= 0.0) return hi->second;
    return lo->second + (hi->second - lo->second) * (t - lo->first) / span;
}

std::optional<double> LeadProfile::onset() const {
    if (points_.empty()) return std::nullopt;
    const double u0 = points_.front().second;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i].second != u0) return points_[i - 1].first;
    }
    return std::nullopt;
}

LeadProfile LeadProfile::default_maneuver() {
    return LeadProfile({{0.0, 0.0}, {2.01, 0.0}, {2.31, 1.0}, {12.01, 1.0}, {12.31, 0.0}});
}

std::size_t ScenarioConfig::ticks() const {
    return static_cast<std::size_t>(std::llround(duration / dt));
}

void ScenarioConfig::validate() const {
    if (vehicles < 2) throw ConfigError("vehicles", "need at least a leader and one follower");
    if (!(duration > 0.0)) throw ConfigError("duration", "must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt", "must be > 0");
    if (duration / dt > 1e9) throw ConfigError("dt", "too many ticks");
    if (!std::isfinite(initial_speed)) throw ConfigError("initial_speed", "must be finite");
    if (attack.target < 1 || attack.target > vehicles - 1) {
        throw ConfigError("attack.target", "must be in [1, vehicles-1]");
    }
    if (attack.calibrate_factor && !(*attack.calibrate_factor > 0.0)) {
        throw ConfigError("attack.calibrate_factor", "must be > 0");
    }
    if (!(eps1_transient >= 0.0)) throw ConfigError("eps1_transient", "must be >= 0");
    vehicle.validate();
    gains.validate();
    noise.validate();
    if (comm_mode == CommMode::EventTriggered) trigger.validate();
    observer.validate();
    validate_gain_condition(observer, build_error_matrices(gains, vehicle), noise, gains);
}

namespace {

/// Reads keys of one JSON object and rejects the ones nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(name(key), "unknown key");
        }
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ConfigError(name(key), "must be a number");
            out = v->get<double>();
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ConfigError(name(key), "must be an integer");
            out = v->get<int>();
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) throw ConfigError(name(key), "must be a boolean");
            out = v->get<bool>();
        }
    }

    /// Accepts a scalar (broadcast) or an array of N numbers.
    template <int N>
    bool vector(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
        const json* v = get(key);
        if (v == nullptr) return false;
        if (v->is_number()) {
            out.setConstant(v->get<double>());
            return true;
        }
        if (!v->is_array() || v->size() != N) {
            throw ConfigError(name(key), "must be a number or an array of " + std::to_string(N) + " numbers");
        }
        for (int i = 0; i < N; ++i) {
            if (!(*v)[i].is_number()) throw ConfigError(name(key), "entries must be numbers");
            out(i) = (*v)[i].get<double>();
        }
        return true;
    }

    std::vector<std::pair<double, double>> pairs(const json& v, const std::string& key) const {
        if (!v.is_array()) throw ConfigError(name(key), "must be an array of [time, value] pairs");
        std::vector<std::pair<double, double>> out;
        for (const auto& p : v) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ConfigError(name(key), "entries must be [time, value] pairs");
            }
            out.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_noise(const json& j, NoiseModel& n) {
    Section s(j, "noise");
    if (const json* sigma = s.get("sigma")) {
        if (!sigma->is_number()) throw ConfigError("noise.sigma", "must be a number");
        n = NoiseModel::with_sigma(sigma->get<double>());
    }
    const bool had_xi = s.vector<3>("sigma_xi", n.sigma_xi);
    const bool had_eta = s.vector<2>("sigma_eta", n.sigma_eta);
    // Bounds default to two standard deviations.
    if (!s.vector<3>("xi_bar", n.xi_bar) && had_xi) n.xi_bar = 2.0 * n.sigma_xi;
    if (!s.vector<2>("eta_bar", n.eta_bar) && had_eta) n.eta_bar = 2.0 * n.sigma_eta;
    s.boolean("truncate", n.truncate);
    s.boolean("enabled", n.enabled);
    s.finish();
}

void read_observer(const json& j, ObserverConfig& o) {
    Section s(j, "observer");
    if (const json* p = s.get("P")) {
        const bool ok = p->is_array() && p->size() == 2 && (*p)[0].is_array() && (*p)[0].size() == 2 &&
                        (*p)[1].is_array() && (*p)[1].size() == 2;
        if (!ok) throw ConfigError("observer.P", "must be a 2x2 array");
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                if (!(*p)[r][c].is_number()) throw ConfigError("observer.P", "entries must be numbers");
                o.P(r, c) = (*p)[r][c].get<double>();
            }
        }
    }
    s.number("M", o.M);
    s.number("K", o.K);
    s.number("eps2_0", o.eps2_0);
    s.finish();
}

void read_attack(const json& j, AttackConfig& a) {
    Section s(j, "attack");
    s.integer("target", a.target);
    s.number("onset", a.onset);
    if (const json* sched = s.get("schedule")) a.signal = AttackSignal(s.pairs(*sched, "schedule"));
    if (const json* mag = s.get("magnitude")) {
        if (!mag->is_number()) throw ConfigError("attack.magnitude", "must be a number");
        if (!a.signal.empty()) throw ConfigError("attack.magnitude", "conflicts with attack.schedule");
        a.signal = AttackSignal::constant(a.onset, mag->get<double>());
    }
    if (const json* f = s.get("calibrate_factor")) {
        if (!f->is_number()) throw ConfigError("attack.calibrate_factor", "must be a number");
        if (!a.signal.empty()) throw ConfigError("attack.calibrate_factor", "conflicts with an explicit attack");
        a.calibrate_factor = f->get<double>();
    }
    s.finish();
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig cfg;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
        cfg.validate();
        return cfg;
    }

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }

    {
        Section s(root, "");
        s.integer("vehicles", cfg.vehicles);
        s.number("duration", cfg.duration);
        s.number("dt", cfg.dt);
        s.number("initial_speed", cfg.initial_speed);
        s.number("eps1_transient", cfg.eps1_transient);
        if (const json* v = s.get("seed")) {
            if (!v->is_number_unsigned()) throw ConfigError("seed", "must be a nonnegative integer");
            cfg.seed = v->get<std::uint64_t>();
        }
        if (const json* v = s.get("comm_mode")) {
            const std::string mode = v->is_string() ? v->get<std::string>() : "";
            if (mode == "continuous") {
                cfg.comm_mode = CommMode::Continuous;
            } else if (mode == "event") {
                cfg.comm_mode = CommMode::EventTriggered;
            } else {
                throw ConfigError("comm_mode", "must be \"continuous\" or \"event\"");
            }
        }
        if (const json* v = s.get("vehicle")) {
            Section vs(*v, "vehicle");
            vs.number("tau", cfg.vehicle.tau);
            vs.number("length", cfg.vehicle.length);
            vs.finish();
        }
        if (const json* v = s.get("cacc")) {
            Section cs(*v, "cacc");
            cs.number("kp", cfg.gains.kp);
            cs.number("kd", cfg.gains.kd);
            cs.number("h", cfg.gains.h);
            cs.number("r", cfg.gains.r);
            cs.finish();
        }
        if (const json* v = s.get("noise")) read_noise(*v, cfg.noise);
        if (const json* v = s.get("trigger")) {
            Section ts(*v, "trigger");
            ts.number("T_L", cfg.trigger.T_L);
            ts.number("T_H", cfg.trigger.T_H);
            ts.vector<2>("dy_L", cfg.trigger.dy_L);
            ts.finish();
        }
        if (const json* v = s.get("observer")) read_observer(*v, cfg.observer);
        if (const json* v = s.get("lead_profile")) cfg.lead = LeadProfile(s.pairs(*v, "lead_profile"));
        if (const json* v = s.get("attack")) read_attack(*v, cfg.attack);
        s.finish();
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
    auto vec = [](const auto& v) {
        json a = json::array();
        for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
        return a;
    };
    auto pairs = [](const std::vector<std::pair<double, double>>& ps) {
        json a = json::array();
        for (const auto& [t, x] : ps) a.push_back({t, x});
        return a;
    };

    json j;
    j["vehicles"] = cfg.vehicles;
    j["duration"] = cfg.duration;
    j["dt"] = cfg.dt;
    j["comm_mode"] = to_string(cfg.comm_mode);
    j["initial_speed"] = cfg.initial_speed;
    j["seed"] = cfg.seed;
    j["eps1_transient"] = cfg.eps1_transient;
    j["vehicle"] = {{"tau", cfg.vehicle.tau}, {"length", cfg.vehicle.length}};
    j["cacc"] = {{"kp", cfg.gains.kp}, {"kd", cfg.gains.kd}, {"h", cfg.gains.h}, {"r", cfg.gains.r}};
    j["noise"] = {{"sigma_xi", vec(cfg.noise.sigma_xi)}, {"sigma_eta", vec(cfg.noise.sigma_eta)},
                  {"xi_bar", vec(cfg.noise.xi_bar)},     {"eta_bar", vec(cfg.noise.eta_bar)},
                  {"truncate", cfg.noise.truncate},      {"enabled", cfg.noise.enabled}};
    j["trigger"] = {{"T_L", cfg.trigger.T_L}, {"T_H", cfg.trigger.T_H}, {"dy_L", vec(cfg.trigger.dy_L)}};
    j["observer"] = {{"P", {{cfg.observer.P(0, 0), cfg.observer.P(0, 1)}, {cfg.observer.P(1, 0), cfg.observer.P(1, 1)}}},
                     {"M", cfg.observer.M},
                     {"K", cfg.observer.K},
                     {"eps2_0", cfg.observer.eps2_0}};
    j["lead_profile"] = pairs(cfg.lead.points());
    json attack = {{"target", cfg.attack.target}, {"onset", cfg.attack.onset}};
    if (cfg.attack.calibrate_factor) {
        attack["calibrate_factor"] = *cfg.attack.calibrate_factor;
    } else if (!cfg.attack.signal.empty()) {
        attack["schedule"] = pairs(cfg.attack.signal.schedule());
    }
    j["attack"] = attack;
    return j.dump(2);
}

}  // namespace cacc
