#include "pinstt/errors.hpp"
#include "pinstt/scenario_io.hpp"
#include "pinstt/simulator.hpp"
#include "pinstt/svg_plot.hpp"
#include "pinstt/trainer.hpp"
#include "pinstt/verifier.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

// Exit codes, kept stable for scripting:
//   0 success            4 I/O failure
//   1 usage error        5 file format / schema error
//   2 synth did not converge   6 invariant or numeric domain error
//   3 verification failed      7 simulation objective not met
enum ExitCode {
    kOk = 0,
    kUsage = 1,
    kNotConverged = 2,
    kVerifyFailed = 3,
    kIoError = 4,
    kFormatError = 5,
    kInvariantError = 6,
    kSimulationFailed = 7,
};

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void info(const std::string& message) {
    if (g_log_level >= 1) std::cerr << message << "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw std::ios_base::failure("failed writing " + path.string());
    }
}

int run_synth(const std::string& scenario_path, const std::string& out_path,
              std::optional<std::string> log_path, std::optional<long> seed_override) {
    pinstt::ScenarioBundle bundle = pinstt::parse_scenario(scenario_path);
    if (seed_override) {
        bundle.training.seed = static_cast<std::uint64_t>(*seed_override);
    }
    info("training tube network (seed " + std::to_string(bundle.training.seed) + ")");
    pinstt::TrainLog log;
    pinstt::TubeNet net;
    try {
        std::tie(net, log) = pinstt::train(bundle.scenario, bundle.training);
    } catch (const pinstt::TrainingDiverged& err) {
        if (log_path) err.log().write_csv(*log_path);
        std::cerr << "training diverged: " << err.what() << "\n";
        return kInvariantError;
    }
    pinstt::save_model(net, out_path);
    if (log_path) {
        log.write_csv(*log_path);
    }
    const double final_loss = log.epochs.empty() ? 0.0 : log.epochs.back().total();
    info("epochs: " + std::to_string(log.final_epoch) +
         ", best loss: " + std::to_string(final_loss) +
         ", wall clock: " + std::to_string(log.wall_clock_seconds) + " s");
    if (!log.converged) {
        std::cerr << "training did not reach the loss tolerance\n";
        return kNotConverged;
    }
    return kOk;
}

int run_verify(const std::string& model_path, const std::string& scenario_path,
               std::optional<std::string> report_path) {
    const pinstt::ScenarioBundle bundle = pinstt::parse_scenario(scenario_path);
    const pinstt::TubeNet net = pinstt::load_model(model_path);
    const pinstt::Certificate cert = pinstt::certify(net, bundle.scenario, bundle.training);
    const std::string report = pinstt::certificate_report(cert);
    std::cout << report;
    if (report_path) {
        write_text(*report_path, report);
    }
    return cert.pass ? kOk : kVerifyFailed;
}

int run_simulate(const std::string& model_path, const std::string& scenario_path,
                 const std::string& out_dir, std::optional<long> seed_override) {
    pinstt::ScenarioBundle bundle = pinstt::parse_scenario(scenario_path);
    if (seed_override) {
        bundle.simulation.seed = static_cast<std::uint64_t>(*seed_override);
    }
    const pinstt::TubeNet net = pinstt::load_model(model_path);
    const pinstt::PlantModel plant = pinstt::make_plant(bundle.plant, bundle.scenario);
    const auto [trajectory, metrics] = pinstt::simulate(plant, net, bundle.scenario,
                                                        bundle.funnel, bundle.gains,
                                                        bundle.simulation);
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    trajectory.write_csv(dir / "trajectory.csv");
    const std::string report = pinstt::metrics_report_json(metrics);
    write_text(dir / "metrics.json", report);
    std::cout << report;
    if (!metrics.reach_success) {
        std::cerr << "simulation failed to reach the target set\n";
        return kSimulationFailed;
    }
    if (metrics.clamp_count > 0) {
        std::cerr << "controller clamped " << metrics.clamp_count << " step(s)\n";
        return kSimulationFailed;
    }
    return kOk;
}

int run_plot(const std::string& trajectory_path, const std::string& scenario_path,
             const std::string& out_path, std::optional<std::string> model_path) {
    const pinstt::ScenarioBundle bundle = pinstt::parse_scenario(scenario_path);
    const auto outputs =
        pinstt::read_trajectory_outputs(trajectory_path, bundle.scenario.dimension);
    std::optional<pinstt::TubeNet> net;
    if (model_path) {
        net = pinstt::load_model(*model_path);
    }
    const std::string svg =
        pinstt::render_plot_svg(bundle.scenario, outputs, net ? &*net : nullptr);
    write_text(out_path, svg);
    info("wrote " + out_path);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatiotemporal tube synthesis, verification and closed-loop simulation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string log_level = "info";
    app.add_option("--log-level", log_level, "quiet, info or debug")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));
    std::optional<long> seed_override;
    app.add_option("--seed-override", seed_override,
                   "replace the subcommand-relevant seed from the scenario file");

    std::string scenario_path, model_path, out_path, trajectory_path;
    std::optional<std::string> log_path, report_path, plot_model;

    CLI::App* synth = app.add_subcommand("synth", "train a tube network for a scenario");
    synth->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
    synth->add_option("-o,--output", out_path, "output model file (.pnst)")->required();
    synth->add_option("--log", log_path, "write the per-epoch loss log (.csv)");

    CLI::App* verify = app.add_subcommand("verify", "certify a trained tube network");
    verify->add_option("model", model_path, "model file (.pnst)")->required();
    verify->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
    verify->add_option("--report", report_path, "also write the certificate to a file");

    CLI::App* simulate = app.add_subcommand("simulate", "closed-loop rollout through the tube");
    simulate->add_option("model", model_path, "model file (.pnst)")->required();
    simulate->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
    simulate->add_option("-o,--output", out_path, "output directory")->required();

    CLI::App* plot = app.add_subcommand("plot", "render a trajectory as a static SVG");
    plot->add_option("trajectory", trajectory_path, "trajectory file (.csv)")->required();
    plot->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
    plot->add_option("-o,--output", out_path, "output image (.svg)")->required();
    plot->add_option("--model", plot_model, "model file for tube slices (.pnst)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return err.get_exit_code() == 0 ? kOk : kUsage;
    }
    g_log_level = log_level == "quiet" ? 0 : (log_level == "debug" ? 2 : 1);

    try {
        if (synth->parsed()) {
            return run_synth(scenario_path, out_path, log_path, seed_override);
        }
        if (verify->parsed()) {
            return run_verify(model_path, scenario_path, report_path);
        }
        if (simulate->parsed()) {
            return run_simulate(model_path, scenario_path, out_path, seed_override);
        }
        if (plot->parsed()) {
            return run_plot(trajectory_path, scenario_path, out_path, plot_model);
        }
    } catch (const pinstt::FormatError& err) {
        std::cerr << "format error: " << err.what() << "\n";
        return kFormatError;
    } catch (const pinstt::InvariantError& err) {
        std::cerr << "invariant error: " << err.what() << "\n";
        return kInvariantError;
    } catch (const pinstt::NumericalError& err) {
        std::cerr << "numeric error: " << err.what() << "\n";
        return kInvariantError;
    } catch (const std::ios_base::failure& err) {
        std::cerr << "i/o error: " << err.what() << "\n";
        return kIoError;
    } catch (const std::filesystem::filesystem_error& err) {
        std::cerr << "i/o error: " << err.what() << "\n";
        return kIoError;
    }
    return kUsage;
}
