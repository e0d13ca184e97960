#pragma once

// File outputs of a run: trace CSV, metrics JSON, static SVG figures, and the
// scenario digest that ties reports to their inputs.

#include "pcca/scenario_io.hpp"
#include "pcca/sim.hpp"

#include "json.hpp"

#include <cstdint>
#include <iomanip>
#include <istream>
#include <ostream>

namespace pcca {

/// FNV-1a 64 of the canonical scenario text, as 16 hex digits.
inline std::string scenario_digest(const Scenario& s) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : save_scenario(s)) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash;
    return os.str();
}

// ---------------------------------------------------------------------------
// trace.csv
//
// time_s, then per agent aN_x,aN_y,aN_vx,aN_vy,aN_ux,aN_uy, then per pair
// h_I_J,hr0_I_J, then per agent brake_N (0/1). Agents are numbered from 1.
// ---------------------------------------------------------------------------

inline std::vector<std::string> trace_csv_header(std::size_t n_agents, const std::vector<PairIndex>& pairs) {
    std::vector<std::string> cols{"time_s"};
    for (std::size_t i = 1; i <= n_agents; ++i)
        for (const char* f : {"x", "y", "vx", "vy", "ux", "uy"}) cols.push_back("a" + std::to_string(i) + "_" + f);
    for (const auto& p : pairs) {
        const auto tag = std::to_string(p.i + 1) + "_" + std::to_string(p.j + 1);
        cols.push_back("h_" + tag);
        cols.push_back("hr0_" + tag);
    }
    for (std::size_t i = 1; i <= n_agents; ++i) cols.push_back("brake_" + std::to_string(i));
    return cols;
}

inline void write_trace_csv(std::ostream& os, const Trace& t) {
    using detail::format_number;
    const auto header = trace_csv_header(t.agents(), t.pairs);
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << "\n";
    for (std::size_t k = 0; k < t.samples(); ++k) {
        os << format_number(t.times[k]);
        for (std::size_t i = 0; i < t.agents(); ++i) {
            const auto& x = t.states[k][i];
            const auto& u = t.controls[k][i];
            for (const double v : {x.position.x(), x.position.y(), x.velocity.x(), x.velocity.y(), u.x(), u.y()})
                os << "," << format_number(v);
        }
        for (std::size_t q = 0; q < t.pairs.size(); ++q)
            os << "," << format_number(t.h[k][q]) << "," << format_number(t.h_r0[k][q]);
        for (std::size_t i = 0; i < t.agents(); ++i) os << "," << (t.braking[k][i] ? 1 : 0);
        os << "\n";
    }
}

/// Columns of a trace.csv by header name.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw ParseError(name, 0, "column not found");
    }
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) throw ParseError("", lineno, "wrong number of columns");
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) row.push_back(detail::parse_number(t.header[c], cells[c]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Recomputes every h_I_J column from the recorded positions and returns the largest
/// absolute deviation from the recorded values.
inline double replay_barrier_deviation(const CsvTable& t, double r) {
    double worst = 0.0;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const auto& name = t.header[c];
        if (name.rfind("h_", 0) != 0) continue;
        const auto sep = name.find('_', 2);
        const auto i = name.substr(2, sep - 2);
        const auto j = name.substr(sep + 1);
        const auto xi = t.column("a" + i + "_x"), yi = t.column("a" + i + "_y");
        const auto xj = t.column("a" + j + "_x"), yj = t.column("a" + j + "_y");
        for (const auto& row : t.rows) {
            const double dx = row[xi] - row[xj], dy = row[yi] - row[yj];
            worst = std::max(worst, std::abs(dx * dx + dy * dy - r * r - row[c]));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// metrics.json
// ---------------------------------------------------------------------------

struct AssertionResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunReport {
    std::string scenario_digest;
    MetricsReport metrics;
    std::vector<std::string> outputs;
    std::vector<AssertionResult> assertions;

    bool all_passed() const {
        return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
    }
};

inline nlohmann::json to_json(const MetricsReport& m) {
    using nlohmann::json;
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    json pairs = json::array();
    for (const auto& p : m.pairs) {
        pairs.push_back({{"agents", {p.pair.i + 1, p.pair.j + 1}},
                         {"min_h", p.min_h},
                         {"min_h_step", p.min_h_step},
                         {"min_h_r0", p.min_h_r0},
                         {"min_h_r0_sum_sq", p.min_h_r0_sum_sq},
                         {"max_constraint_violation", p.max_constraint_violation},
                         {"left_reduced_set", p.left_reduced_set},
                         {"first_exit_step", opt(p.first_exit_step)},
                         {"estimate_identity_residual", opt(p.estimate_identity_residual)},
                         {"residual_bound_slack", opt(p.residual_bound_slack)},
                         {"beta", p.beta},
                         {"baseline_rate", p.baseline_rate}});
    }
    return {{"pairs", pairs}, {"max_baseline_norm", m.max_baseline_norm}, {"braking_samples", m.braking_samples}};
}

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json asserts = nlohmann::json::array();
    for (const auto& a : r.assertions) asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    return {{"scenario_digest", r.scenario_digest},
            {"metrics", to_json(r.metrics)},
            {"outputs", r.outputs},
            {"assertions", asserts},
            {"passed", r.all_passed()}};
}

// ---------------------------------------------------------------------------
// SVG figures
// ---------------------------------------------------------------------------

namespace detail {

inline const char* agent_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[i % 6];
}

struct Frame {
    double x0, x1, y0, y1;  // world bounds
    double w, h, pad;

    double sx(double x) const { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); }
    double sy(double y) const { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); }
};

}  // namespace detail

/// Agent paths with start markers and contact circles at the final sample.
inline void write_trajectory_svg(std::ostream& os, const Trace& t) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300, rmax = 0.0;
    for (const auto& row : t.states)
        for (const auto& s : row) {
            x0 = std::min(x0, s.position.x());
            x1 = std::max(x1, s.position.x());
            y0 = std::min(y0, s.position.y());
            y1 = std::max(y1, s.position.y());
        }
    for (const double r : t.radii) rmax = std::max(rmax, r);
    x0 -= rmax, x1 += rmax, y0 -= rmax, y1 += rmax;
    // Equal axis scaling.
    const double span = std::max(x1 - x0, y1 - y0);
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    const detail::Frame f{cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2, 640, 640, 20};
    const double scale = (f.w - 2 * f.pad) / span;

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.w << "\" height=\"" << f.h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < t.agents(); ++i) {
        os << "<polyline fill=\"none\" stroke=\"" << detail::agent_color(i) << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& row : t.states) os << f.sx(row[i].position.x()) << "," << f.sy(row[i].position.y()) << " ";
        os << "\"/>\n";
        if (t.samples() == 0) continue;
        const auto& first = t.states.front()[i].position;
        const auto& last = t.states.back()[i].position;
        os << "<circle cx=\"" << f.sx(first.x()) << "\" cy=\"" << f.sy(first.y()) << "\" r=\"3\" fill=\""
           << detail::agent_color(i) << "\"/>\n"
           << "<circle cx=\"" << f.sx(last.x()) << "\" cy=\"" << f.sy(last.y()) << "\" r=\"" << t.radii[i] * scale
           << "\" fill=\"none\" stroke=\"" << detail::agent_color(i) << "\"/>\n";
    }
    os << "</svg>\n";
}

/// Contact barrier h_r0 (solid) and controller barrier h (dashed) against time, per pair.
inline void write_barrier_svg(std::ostream& os, const Trace& t) {
    double lo = 0.0, hi = 1.0;
    for (std::size_t k = 0; k < t.samples(); ++k)
        for (std::size_t q = 0; q < t.pairs.size(); ++q) {
            lo = std::min({lo, t.h[k][q], t.h_r0[k][q]});
            hi = std::max({hi, t.h[k][q], t.h_r0[k][q]});
        }
    const double tmax = t.samples() > 1 ? t.times.back() : 1.0;
    const detail::Frame f{0.0, tmax, lo, hi, 720, 360, 30};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.w << "\" height=\"" << f.h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<line x1=\"" << f.sx(0) << "\" y1=\"" << f.sy(0) << "\" x2=\"" << f.sx(tmax) << "\" y2=\"" << f.sy(0)
       << "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    for (std::size_t q = 0; q < t.pairs.size(); ++q) {
        for (const bool contact : {true, false}) {
            os << "<polyline fill=\"none\" stroke=\"" << detail::agent_color(q) << "\" stroke-width=\"1.2\""
               << (contact ? "" : " stroke-dasharray=\"4 3\"") << " points=\"";
            for (std::size_t k = 0; k < t.samples(); ++k)
                os << f.sx(t.times[k]) << "," << f.sy(contact ? t.h_r0[k][q] : t.h[k][q]) << " ";
            os << "\"/>\n";
        }
    }
    os << "</svg>\n";
}

}  // namespace pcca
