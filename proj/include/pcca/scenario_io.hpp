#pragma once

// Scenario text format: INI-style sections.
//
//   [scenario]   dt, horizon, accel_mode, symmetry_perturbation, lqr_q, lqr_r, brake_decel
//   [barrier]    r, l0, l1, lambda1 (optional, derived from l0/l1 when absent)
//   [agentN]     controller, radius, position, velocity, destination, chi, target
//
// Agent sections are numbered 1..N without gaps. Vectors are written "x, y".
// Comments start with '#' or ';', on their own line or after whitespace
// following a value.

#include "pcca/core.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace pcca {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    if (!t.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || t.empty()) throw ParseError(field, 0, "expected a number, got '" + t + "'");
    return value;
}

inline Vec2 parse_vec2(const std::string& field, const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos)
        throw ParseError(field, 0, "expected 'x, y', got '" + trim(text) + "'");
    return {parse_number(field, text.substr(0, comma)), parse_number(field, text.substr(comma + 1))};
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_vec2(const Vec2& v) { return format_number(v.x()) + ", " + format_number(v.y()); }

/// Parses "agentN" into N (1-based); 0 if the name is not an agent section.
inline std::size_t agent_section_number(const std::string& name) {
    if (name.rfind("agent", 0) != 0 || name.size() == 5) return 0;
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(name.data() + 5, name.data() + name.size(), n);
    if (ec != std::errc{} || ptr != name.data() + name.size()) return 0;
    return n;
}

using Ptree = boost::property_tree::ptree;

inline void reject_unknown_keys(const std::string& section, const Ptree& tree, const std::set<std::string>& known) {
    for (const auto& [key, child] : tree) {
        if (!known.count(key)) throw ParseError(section + "." + key, 0, "unknown field");
    }
}

/// Drops a trailing "  # ..." or "  ; ..." from a value.
inline std::string strip_inline_comment(const std::string& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if ((v[k] == '#' || v[k] == ';') && std::isspace(static_cast<unsigned char>(v[k - 1]))) return trim(v.substr(0, k));
    return v;
}

template <typename F>
void with_value(const std::string& section, const Ptree& tree, const char* key, F&& f) {
    if (const auto v = tree.get_optional<std::string>(key)) f(section + "." + key, *v);
}

}  // namespace detail

/// Parses a scenario document and validates it. Throws ParseError or ValidationError.
inline Scenario load_scenario(const std::string& text) {
    using namespace detail;
    Ptree root;
    try {
        std::istringstream in(text);
        boost::property_tree::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError("", e.line(), e.message());
    }
    for (auto& [name, section] : root)
        for (auto& [key, child] : section) child.data() = strip_inline_comment(child.data());

    Scenario s;
    std::map<std::size_t, const Ptree*> agent_sections;
    for (const auto& [name, section] : root) {
        if (section.empty() && !section.data().empty()) throw ParseError(name, 0, "key outside of any section");
        if (name == "scenario") {
            reject_unknown_keys(name, section, {"dt", "horizon", "accel_mode", "symmetry_perturbation", "lqr_q",
                                                "lqr_r", "brake_decel"});
            with_value(name, section, "dt", [&](auto f, auto v) { s.dt = parse_number(f, v); });
            with_value(name, section, "horizon", [&](auto f, auto v) { s.horizon = parse_number(f, v); });
            with_value(name, section, "symmetry_perturbation",
                       [&](auto f, auto v) { s.symmetry_perturbation = parse_number(f, v); });
            with_value(name, section, "lqr_q", [&](auto f, auto v) { s.lqr_state_weight = parse_number(f, v); });
            with_value(name, section, "lqr_r", [&](auto f, auto v) { s.lqr_control_weight = parse_number(f, v); });
            with_value(name, section, "brake_decel", [&](auto f, auto v) { s.brake_decel = parse_number(f, v); });
            with_value(name, section, "accel_mode", [&](auto f, auto v) {
                const auto t = trim(v);
                if (t == "exact") s.accel_mode = AccelObservation::Exact;
                else if (t == "finite-difference") s.accel_mode = AccelObservation::FiniteDifference;
                else throw ParseError(f, 0, "unknown accel_mode '" + t + "' (exact | finite-difference)");
            });
        } else if (name == "barrier") {
            reject_unknown_keys(name, section, {"r", "l0", "l1", "lambda1"});
            double r = s.barrier.r, l0 = s.barrier.l0, l1 = s.barrier.l1;
            with_value(name, section, "r", [&](auto f, auto v) { r = parse_number(f, v); });
            with_value(name, section, "l0", [&](auto f, auto v) { l0 = parse_number(f, v); });
            with_value(name, section, "l1", [&](auto f, auto v) { l1 = parse_number(f, v); });
            s.barrier = BarrierParams::from_gains(r, l0, l1);
            with_value(name, section, "lambda1", [&](auto f, auto v) { s.barrier.lambda1 = parse_number(f, v); });
        } else if (const auto n = agent_section_number(name); n > 0) {
            agent_sections[n] = &section;
        } else {
            throw ParseError(name, 0, "unknown section");
        }
    }

    std::size_t expected = 1;
    for (const auto& [n, section] : agent_sections) {
        if (n != expected) throw ParseError("agent" + std::to_string(expected), 0, "agent sections must be numbered 1..N");
        ++expected;
    }

    for (const auto& [n, sectionp] : agent_sections) {
        const auto& section = *sectionp;
        const std::string name = "agent" + std::to_string(n);
        reject_unknown_keys(name, section,
                            {"controller", "radius", "position", "velocity", "destination", "chi", "target"});
        AgentSpec a;
        const auto controller = section.get_optional<std::string>("controller");
        if (!controller) throw ParseError(name + ".controller", 0, "missing field");
        const auto kind = controller_from_string(trim(*controller));
        if (!kind)
            throw ParseError(name + ".controller", 0,
                             "unknown controller '" + trim(*controller) +
                                 "' (centralized-member | decentralized | pcca | non-interacting | pursuer)");
        a.config.controller = *kind;
        if (!section.get_optional<std::string>("position")) throw ParseError(name + ".position", 0, "missing field");
        if (*kind != ControllerKind::Pursuer && !section.get_optional<std::string>("destination"))
            throw ParseError(name + ".destination", 0, "missing field");
        with_value(name, section, "radius", [&](auto f, auto v) { a.config.radius = parse_number(f, v); });
        with_value(name, section, "position", [&](auto f, auto v) { a.initial.position = parse_vec2(f, v); });
        with_value(name, section, "velocity", [&](auto f, auto v) { a.initial.velocity = parse_vec2(f, v); });
        with_value(name, section, "destination", [&](auto f, auto v) { a.config.destination = parse_vec2(f, v); });
        with_value(name, section, "chi", [&](auto f, auto v) { a.config.chi = parse_number(f, v); });
        with_value(name, section, "target", [&](auto f, auto v) {
            const auto t = agent_section_number(trim(v));
            if (t == 0) throw ParseError(f, 0, "expected an agent section name like 'agent1'");
            a.config.pursuit_target = t - 1;
        });
        s.agents.push_back(std::move(a));
    }

    if (auto violations = validate_scenario(s); !violations.empty()) throw ValidationError(std::move(violations));
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("", 0, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

/// Canonical text form; load_scenario(save_scenario(s)) reproduces s exactly.
inline std::string save_scenario(const Scenario& s) {
    using detail::format_number;
    using detail::format_vec2;
    std::ostringstream os;
    os << "[scenario]\n"
       << "dt = " << format_number(s.dt) << "\n"
       << "horizon = " << format_number(s.horizon) << "\n"
       << "accel_mode = " << to_string(s.accel_mode) << "\n"
       << "symmetry_perturbation = " << format_number(s.symmetry_perturbation) << "\n"
       << "lqr_q = " << format_number(s.lqr_state_weight) << "\n"
       << "lqr_r = " << format_number(s.lqr_control_weight) << "\n"
       << "brake_decel = " << format_number(s.brake_decel) << "\n\n"
       << "[barrier]\n"
       << "r = " << format_number(s.barrier.r) << "\n"
       << "l0 = " << format_number(s.barrier.l0) << "\n"
       << "l1 = " << format_number(s.barrier.l1) << "\n"
       << "lambda1 = " << format_number(s.barrier.lambda1) << "\n";
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        os << "\n[agent" << i + 1 << "]\n"
           << "controller = " << to_string(a.config.controller) << "\n"
           << "radius = " << format_number(a.config.radius) << "\n"
           << "position = " << format_vec2(a.initial.position) << "\n"
           << "velocity = " << format_vec2(a.initial.velocity) << "\n"
           << "destination = " << format_vec2(a.config.destination) << "\n"
           << "chi = " << format_number(a.config.chi) << "\n";
        if (a.config.pursuit_target) os << "target = agent" << *a.config.pursuit_target + 1 << "\n";
    }
    return os.str();
}

}  // namespace pcca
