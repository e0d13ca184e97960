#pragma once

#include "pcca/report.hpp"

#include <filesystem>
#include <fstream>

namespace pcca {

enum class ExitCode : int { Success = 0, AssertionFailure = 1, InputError = 2, SimulationAbort = 3 };

class UsageError : public Error {
public:
    using Error::Error;
};

struct RunFlags {
    std::filesystem::path out_dir = ".";
    bool assert_estimate_identity = false;
    bool assert_no_collision = false;
    bool svg = false;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

inline void prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

}  // namespace detail

/// Two-agent PCCA identity (w_21 - w_12)(k) = (u0_1 - u0_2)(k-1), tolerance 1e-9 (1 + max |u0|).
inline AssertionResult check_estimate_identity(const MetricsReport& m) {
    const double tol = 1e-9 * (1.0 + m.max_baseline_norm);
    AssertionResult a{"estimate-identity", false, "no pair of PCCA agents in scenario"};
    for (const auto& p : m.pairs) {
        if (!p.estimate_identity_residual) continue;
        a.passed = *p.estimate_identity_residual <= tol;
        a.detail = "residual " + detail::format_number(*p.estimate_identity_residual) + " vs tolerance " + detail::format_number(tol);
        if (!a.passed) break;
    }
    return a;
}

inline AssertionResult check_no_collision(const MetricsReport& m) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : m.pairs) worst = std::min(worst, p.min_h_r0);
    return {"no-collision", worst >= 0.0, "min h_r0 = " + detail::format_number(worst)};
}

/// Runs a scenario file and writes trace.csv, metrics.json and optional SVGs into flags.out_dir.
inline RunReport cmd_run(const std::filesystem::path& scenario_path, const RunFlags& flags) {
    const Scenario s = load_scenario_file(scenario_path.string());
    const Trace trace = run_scenario(s);

    RunReport report;
    report.scenario_digest = scenario_digest(s);
    report.metrics = metrics(trace, s.barrier);
    if (flags.assert_no_collision) report.assertions.push_back(check_no_collision(report.metrics));
    if (flags.assert_estimate_identity) report.assertions.push_back(check_estimate_identity(report.metrics));

    detail::prepare_dir(flags.out_dir);
    {
        auto out = detail::open_output(flags.out_dir / "trace.csv");
        write_trace_csv(out, trace);
        report.outputs.push_back((flags.out_dir / "trace.csv").string());
    }
    if (flags.svg) {
        auto traj = detail::open_output(flags.out_dir / "trajectory.svg");
        write_trajectory_svg(traj, trace);
        auto bar = detail::open_output(flags.out_dir / "barrier.svg");
        write_barrier_svg(bar, trace);
        report.outputs.push_back((flags.out_dir / "trajectory.svg").string());
        report.outputs.push_back((flags.out_dir / "barrier.svg").string());
    }
    report.outputs.push_back((flags.out_dir / "metrics.json").string());
    auto out = detail::open_output(flags.out_dir / "metrics.json");
    out << to_json(report).dump(2) << "\n";
    return report;
}

struct SweepReport {
    std::string scenario_digest;
    std::vector<SweepRow> rows;
    std::vector<std::string> outputs;

    /// Margin at the first dt over margin at the last dt (inf when the last margin is zero).
    double margin_ratio() const {
        if (rows.size() < 2) return 1.0;
        if (rows.back().margin == 0.0) return rows.front().margin == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        return rows.front().margin / rows.back().margin;
    }
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    using detail::format_number;
    os << "dt_s,margin_m,min_h_m2,min_hr0_m2\n";
    for (const auto& r : rows)
        os << format_number(r.dt) << "," << format_number(r.margin) << "," << format_number(r.min_h) << ","
           << format_number(r.min_h_r0) << "\n";
}

inline SweepReport cmd_sweep(const std::filesystem::path& scenario_path, const std::vector<double>& dts,
                             const std::filesystem::path& out_dir) {
    if (dts.empty()) throw UsageError("sweep needs at least one dt (--dts 0.05,0.025,0.01)");
    for (const double dt : dts)
        if (!(dt > 0.0)) throw UsageError("every dt must be positive");
    const Scenario s = load_scenario_file(scenario_path.string());

    SweepReport report;
    report.scenario_digest = scenario_digest(s);
    report.rows = dt_sweep(s, dts);
    detail::prepare_dir(out_dir);
    auto out = detail::open_output(out_dir / "sweep.csv");
    write_sweep_csv(out, report.rows);
    report.outputs.push_back((out_dir / "sweep.csv").string());
    return report;
}

inline nlohmann::json to_json(const SweepReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"dt_s", row.dt}, {"margin_m", row.margin}, {"min_h_m2", row.min_h}, {"min_hr0_m2", row.min_h_r0}});
    const double ratio = r.margin_ratio();
    return {{"scenario_digest", r.scenario_digest},
            {"rows", rows},
            {"margin_ratio", std::isfinite(ratio) ? nlohmann::json(ratio) : nlohmann::json("inf")},
            {"outputs", r.outputs}};
}

}  // namespace pcca
