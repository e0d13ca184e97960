// Command-line front end: run a scenario or sweep its sample time.
//
//   pcca run <scenario> [--out DIR] [--assert-theorem2] [--assert-no-collision] [--svg]
//   pcca sweep <scenario> --dts 0.05,0.025,0.01 [--out DIR]
//
// Exit codes: 0 success, 1 assertion failure, 2 input error, 3 simulation abort.

#include "pcca/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

int code(pcca::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collision-avoidance controller simulator"};
    app.require_subcommand(1);

    std::string run_scenario_path;
    pcca::RunFlags flags;
    std::string run_out = ".";
    auto* run = app.add_subcommand("run", "Simulate a scenario and write trace.csv / metrics.json");
    run->add_option("scenario", run_scenario_path, "Scenario file")->required();
    run->add_option("--out", run_out, "Output directory");
    run->add_flag("--assert-theorem2", flags.assert_estimate_identity, "Check the two-agent PCCA estimate identity");
    run->add_flag("--assert-no-collision", flags.assert_no_collision, "Check min h_r0 >= 0");
    run->add_flag("--svg", flags.svg, "Also write trajectory.svg and barrier.svg");

    std::string sweep_scenario_path;
    std::vector<double> dts;
    std::string sweep_out = ".";
    auto* sweep = app.add_subcommand("sweep", "Required radius margin versus sample time");
    sweep->add_option("scenario", sweep_scenario_path, "Scenario file")->required();
    sweep->add_option("--dts", dts, "Comma-separated sample times in seconds")->delimiter(',')->required();
    sweep->add_option("--out", sweep_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : code(pcca::ExitCode::InputError);
    }

    try {
        if (*run) {
            flags.out_dir = run_out;
            const auto report = pcca::cmd_run(run_scenario_path, flags);
            std::cout << pcca::to_json(report).dump(2) << "\n";
            for (const auto& a : report.assertions)
                if (!a.passed) std::cerr << "assertion failed: " << a.name << " (" << a.detail << ")\n";
            return code(report.all_passed() ? pcca::ExitCode::Success : pcca::ExitCode::AssertionFailure);
        }
        const auto report = pcca::cmd_sweep(sweep_scenario_path, dts, sweep_out);
        std::cout << pcca::to_json(report).dump(2) << "\n";
        return code(pcca::ExitCode::Success);
    } catch (const pcca::SimulationAbort& e) {
        std::cerr << e.what() << "\n";
        return code(pcca::ExitCode::SimulationAbort);
    } catch (const pcca::BracketError& e) {
        std::cerr << e.what() << "\n";
        return code(pcca::ExitCode::SimulationAbort);
    } catch (const pcca::Error& e) {
        std::cerr << e.what() << "\n";
        return code(pcca::ExitCode::InputError);
    }
}
