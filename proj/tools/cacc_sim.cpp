// cacc_sim: run platoon scenarios with the sliding-mode attack detector.
//
//   cacc_sim run --scenario s.json --seed 7 --out out/ [--comm event] [--duration 20] [--no-attack]
//   cacc_sim sweep --scenario s.json --seeds 100 --out sweep/
//   cacc_sim calibrate --scenario s.json
//
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 numeric divergence.

#include "cacc/scenario.hpp"
#include "cacc/simulation.hpp"
#include "cacc/trace_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kIo = 3, kDivergence = 4 };

struct Overrides {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string comm;
    std::optional<double> duration;
    bool no_attack = false;
};

cacc::ScenarioConfig load(const Overrides& o) {
    cacc::ScenarioConfig cfg = cacc::load_scenario(o.scenario);
    if (o.seed) cfg.seed = *o.seed;
    if (o.comm == "continuous") cfg.comm_mode = cacc::CommMode::Continuous;
    if (o.comm == "event") cfg.comm_mode = cacc::CommMode::EventTriggered;
    if (o.duration) cfg.duration = *o.duration;
    if (o.no_attack) {
        cfg.attack.signal = cacc::AttackSignal{};
        cfg.attack.calibrate_factor.reset();
    }
    cfg.validate();
    return cfg;
}

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "none";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
}

int cmd_run(const Overrides& o, const std::string& out_dir) {
    const cacc::ScenarioConfig cfg = load(o);
    const cacc::RunResult r = cacc::run(cfg);
    cacc::emit(r, out_dir);

    const auto& m = r.metrics;
    std::cout << "mode            " << cacc::to_string(cfg.comm_mode) << "\n"
              << "attack onset    " << fmt_opt(m.attack_onset) << " s\n"
              << "attack value    " << fmt_opt(r.calibrated_attack ? r.calibrated_attack
                                                                   : std::optional<double>{}) << "\n"
              << "detection delay " << fmt_opt(m.detection_delay) << " s (reference "
              << (cfg.comm_mode == cacc::CommMode::EventTriggered ? "0.6" : "0.23") << " s)\n"
              << "false alarms    " << m.false_alarm_count << "\n"
              << "steady upper    " << fmt_opt(m.threshold_steady_state(0)) << ", "
              << fmt_opt(m.threshold_steady_state(1)) << " (reference 0.35)\n"
              << "transmissions   " << m.transmissions_count << "\n"
              << "output written to " << out_dir << "\n";
    return kOk;
}

int cmd_sweep(const Overrides& o, int seeds, const std::string& out_dir) {
    if (seeds < 1) throw cacc::ConfigError("--seeds", "must be >= 1");
    const cacc::ScenarioConfig base = load(o);

    std::vector<cacc::RunMetrics> metrics(seeds);
    std::vector<std::optional<double>> attack(seeds);
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    for (int first = 0; first < seeds; first += static_cast<int>(workers)) {
        std::vector<std::future<std::pair<cacc::RunMetrics, std::optional<double>>>> batch;
        for (int s = first; s < std::min(seeds, first + static_cast<int>(workers)); ++s) {
            cacc::ScenarioConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(s);
            batch.push_back(std::async(std::launch::async, [cfg] {
                cacc::RunResult r = cacc::run(cfg);
                return std::make_pair(r.metrics, r.calibrated_attack);
            }));
        }
        for (std::size_t i = 0; i < batch.size(); ++i) {
            auto [m, a] = batch[i].get();
            metrics[first + i] = m;
            attack[first + i] = a;
        }
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw cacc::IoError("cannot create " + out_dir);
    std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv");
    if (!csv) throw cacc::IoError("cannot write sweep.csv");
    csv << "seed,detection_delay,false_alarms,steady_upper_1,steady_upper_2,transmissions,max_abs_eps1_1,"
           "max_abs_eps1_2\n";
    int total_false = 0;
    int detected = 0;
    for (int s = 0; s < seeds; ++s) {
        const auto& m = metrics[s];
        total_false += m.false_alarm_count;
        detected += m.detection_delay.has_value();
        csv << base.seed + s << ',' << (m.detection_delay ? std::to_string(*m.detection_delay) : "") << ','
            << m.false_alarm_count << ',' << m.threshold_steady_state(0) << ',' << m.threshold_steady_state(1)
            << ',' << m.transmissions_count << ',' << m.max_abs_eps1(0) << ',' << m.max_abs_eps1(1) << '\n';
    }
    if (!csv) throw cacc::IoError("write failed for sweep.csv");

    nlohmann::json summary = {{"runs", seeds},
                              {"comm_mode", cacc::to_string(base.comm_mode)},
                              {"false_alarms", total_false},
                              {"detected", detected}};
    std::ofstream js(std::filesystem::path(out_dir) / "sweep_summary.json");
    js << summary.dump(2) << '\n';
    if (!js) throw cacc::IoError("write failed for sweep_summary.json");
    std::cout << seeds << " runs, " << detected << " detected, " << total_false << " false alarms\n";
    return kOk;
}

int cmd_calibrate(const Overrides& o, double factor) {
    const cacc::ScenarioConfig cfg = load(o);
    const cacc::Calibration c = cacc::calibrate(cfg, factor);
    std::cout << "steady upper threshold " << c.steady_threshold(0) << ", " << c.steady_threshold(1)
              << " (reference 0.35)\n"
              << "attack magnitude (" << factor << "x) " << c.attack_magnitude << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Platoon simulator with sliding-mode cyber-attack detection"};
    app.require_subcommand(1);

    Overrides o;
    std::string out_dir;
    int seeds = 0;
    double factor = 2.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
        sub->add_option("--comm", o.comm, "Communication mode")->check(CLI::IsMember({"continuous", "event"}));
        sub->add_option("--duration", o.duration, "Simulated time (s)");
    };

    CLI::App* run = app.add_subcommand("run", "Run one scenario and write trace, metrics and plot data");
    add_common(run);
    run->add_option("--seed", o.seed, "Noise seed");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_flag("--no-attack", o.no_attack, "Drop the scenario's attack");

    CLI::App* sweep = app.add_subcommand("sweep", "Run consecutive seeds and summarise");
    add_common(sweep);
    sweep->add_option("--seeds", seeds, "Number of seeds")->required();
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_flag("--no-attack", o.no_attack, "Drop the scenario's attack");

    CLI::App* cal = app.add_subcommand("calibrate", "Report the attack-free steady-state threshold");
    add_common(cal);
    cal->add_option("--factor", factor, "Attack magnitude as a multiple of the threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return cmd_run(o, out_dir);
        if (*sweep) return cmd_sweep(o, seeds, out_dir);
        return cmd_calibrate(o, factor);
    } catch (const cacc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const cacc::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const cacc::NumericDivergence& e) {
        std::cerr << "numeric divergence: " << e.what() << '\n';
        return kDivergence;
    }
}
