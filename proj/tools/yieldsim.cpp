// yieldsim: run scenarios and sweeps from TOML files.
//
//   yieldsim run      --config f.toml [--out dir] [--set key=value ...]
//   yieldsim sweep    --config f.toml [--out dir] [--set key=value ...] [--jobs n]
//   yieldsim validate --config f.toml [--set key=value ...]
//   yieldsim presets
//
// Exit codes: 0 ok, 1 configuration error, 2 simulation error, 3 I/O error.
// Data goes to files under --out; stdout carries key=value summaries only.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "yieldsim/scenario.hpp"

namespace {

namespace ys = yieldsim;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfig = 1, kSimulation = 2, kIo = 3 };

struct Options {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    int jobs = 1;
};

ys::scenario::ScenarioConfig load(const Options& o) {
    auto config = ys::scenario::load_config(o.config_path);
    for (const auto& kv : o.overrides) ys::scenario::apply_override(config, kv);
    return config;
}

int cmd_run(const Options& o) {
    const auto config = load(o);
    const auto series = ys::scenario::run(config);
    const fs::path csv = fs::path(o.out_dir) / (fs::path(o.config_path).stem().string() + ".csv");
    ys::scenario::write_csv(series, csv);
    std::cout << "days=" << config.horizon_days << '\n'
              << "final_total=" << ys::scenario::format_number(series.final_total()) << '\n'
              << "final_pps=" << ys::scenario::format_number(series.final_row().pps) << '\n'
              << "csv=" << csv.string() << '\n';
    return kOk;
}

int cmd_sweep(const Options& o) {
    const auto config = load(o);
    const auto points = ys::scenario::sweep(config, o.jobs);
    const fs::path dir = fs::path(o.out_dir) / fs::path(o.config_path).stem();
    ys::scenario::write_sweep(points, dir);
    std::cout << "points=" << points.size() << '\n'
              << "index=" << (dir / "index.csv").string() << '\n'
              << "surface=" << (dir / "final_w.dat").string() << '\n';
    return kOk;
}

int cmd_validate(const Options& o) {
    const auto config = load(o);
    ys::scenario::validate(config);
    std::cout << ys::scenario::to_toml(config);
    return kOk;
}

int cmd_presets() {
    std::cout << "name,performance_fee,withdrawal_fee,management_fee_annual,buyback_fraction,"
                 "performance_split_treasury\n";
    for (const auto& p : ys::vault::kFeePresets) {
        const auto& f = p.fees;
        std::cout << p.name;
        for (double v : {f.performance_fee, f.withdrawal_fee, f.management_fee_annual, f.buyback_fraction,
                         f.performance_split_treasury}) {
            std::cout << ',' << ys::scenario::format_number(v);
        }
        std::cout << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic yield-farming strategy simulator"};
    app.require_subcommand(1);
    Options opts;

    auto add_common = [&opts](CLI::App* sub, bool with_out) {
        sub->add_option("--config", opts.config_path, "Scenario TOML file")->required();
        sub->add_option("--set", opts.overrides, "Override a field, key=value (repeatable)");
        if (with_out) sub->add_option("--out", opts.out_dir, "Output directory");
    };
    auto* run = app.add_subcommand("run", "Run the base scenario and write its CSV");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "Run every point of the scenario's sweep grid");
    add_common(sweep, true);
    sweep->add_option("--jobs", opts.jobs, "Parallel sweep workers")->check(CLI::PositiveNumber);
    auto* validate = app.add_subcommand("validate", "Check a scenario and print its effective config");
    add_common(validate, false);
    auto* presets = app.add_subcommand("presets", "List vault fee presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return cmd_run(opts);
        if (*sweep) return cmd_sweep(opts);
        if (*validate) return cmd_validate(opts);
        if (*presets) return cmd_presets();
    } catch (const ys::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ys::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    } catch (const ys::SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return kSimulation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }
    return kOk;
}
