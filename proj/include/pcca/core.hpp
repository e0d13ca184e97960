#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pcca {

using Vec2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed scenario document. `field` is the dotted key (e.g. "agent2.controller"),
/// `line` is 0 when the location is only known by field.
class ParseError : public Error {
public:
    ParseError(std::string field, std::size_t line, const std::string& what)
        : Error(format(field, line, what)), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, std::size_t line, const std::string& what) {
        std::ostringstream os;
        os << "parse error";
        if (line > 0) os << " at line " << line;
        if (!field.empty()) os << " in field '" << field << "'";
        os << ": " << what;
        return os.str();
    }

    std::string field_;
    std::size_t line_;
};

/// Circles fully overlap (xi == 0); the pair barrier has b == 0 there.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// Active-set working matrix became singular beyond the conditioning threshold.
class NumericalDegeneracy : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct AgentState {
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();

    bool finite() const { return position.allFinite() && velocity.allFinite(); }
};

enum class ControllerKind { CentralizedMember, Decentralized, Pcca, NonInteracting, Pursuer };

inline std::string_view to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::CentralizedMember: return "centralized-member";
        case ControllerKind::Decentralized: return "decentralized";
        case ControllerKind::Pcca: return "pcca";
        case ControllerKind::NonInteracting: return "non-interacting";
        case ControllerKind::Pursuer: return "pursuer";
    }
    return "unknown";
}

inline std::optional<ControllerKind> controller_from_string(std::string_view name) {
    for (auto kind : {ControllerKind::CentralizedMember, ControllerKind::Decentralized, ControllerKind::Pcca,
                      ControllerKind::NonInteracting, ControllerKind::Pursuer}) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

struct AgentConfig {
    double radius = 2.0;  // r0
    Vec2 destination = Vec2::Zero();
    ControllerKind controller = ControllerKind::Pcca;
    double chi = 1.0;  // decentralized responsibility share, 1 or 1/2
    /// Agent index chased by a pursuer. Unset means the first agent that is not a pursuer.
    std::optional<std::size_t> pursuit_target;
};

/// Roots of s^2 + l1 s + l0, more negative first.
inline std::pair<double, double> characteristic_roots(double l0, double l1) {
    const double disc = std::sqrt(std::max(0.0, l1 * l1 - 4.0 * l0));
    return {(-l1 - disc) / 2.0, (-l1 + disc) / 2.0};
}

struct BarrierParams {
    double r = 4.0;  // separation radius including margin
    double l0 = 6.0;
    double l1 = 5.0;
    double lambda1 = -3.0;  // more negative root of s^2 + l1 s + l0

    /// Builds params with lambda1 taken from the gains.
    static BarrierParams from_gains(double r, double l0, double l1) {
        return {r, l0, l1, characteristic_roots(l0, l1).first};
    }
};

enum class AccelObservation { Exact, FiniteDifference };

inline std::string_view to_string(AccelObservation mode) {
    return mode == AccelObservation::Exact ? "exact" : "finite-difference";
}

struct AgentSpec {
    AgentConfig config;
    AgentState initial;
};

struct Scenario {
    std::vector<AgentSpec> agents;
    BarrierParams barrier;
    double dt = 0.05;
    double horizon = 30.0;
    AccelObservation accel_mode = AccelObservation::Exact;
    double symmetry_perturbation = 0.0;  // added once to agent 1's initial y
    double lqr_state_weight = 4.0;       // Q = q I4
    double lqr_control_weight = 1.0;     // R = r I2
    double brake_decel = 10.0;           // decentralized braking fallback, m/s^2

    std::size_t steps() const { return static_cast<std::size_t>(std::floor(horizon / dt + 1e-9)); }

    double max_radius() const {
        double m = 0.0;
        for (const auto& a : agents) m = std::max(m, a.config.radius);
        return m;
    }

    /// Resolved pursuit target of agent `i` (only meaningful for pursuers).
    std::optional<std::size_t> pursuit_target(std::size_t i) const {
        if (agents[i].config.pursuit_target) return agents[i].config.pursuit_target;
        for (std::size_t j = 0; j < agents.size(); ++j) {
            if (j != i && agents[j].config.controller != ControllerKind::Pursuer) return j;
        }
        return std::nullopt;
    }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    std::string field;
    std::string message;
};

namespace detail {

inline void check_scenario(const Scenario& s, bool require_pair, std::vector<Violation>& out) {
    auto add = [&out](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };
    auto agent_field = [](std::size_t i, const char* key) { return "agent" + std::to_string(i + 1) + "." + key; };

    if (require_pair && s.agents.size() < 2) add("agents", "at least two agents required");
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) add("scenario.dt", "dt must be positive");
    if (!(s.dt < s.horizon)) add("scenario.horizon", "dt must be smaller than horizon");
    if (!(s.symmetry_perturbation >= 0.0)) add("scenario.symmetry_perturbation", "perturbation must be >= 0");
    if (!(s.lqr_state_weight > 0.0) || !(s.lqr_control_weight > 0.0))
        add("scenario.lqr", "LQR weights must be positive");
    if (!(s.brake_decel > 0.0)) add("scenario.brake_decel", "braking deceleration must be positive");

    const auto& p = s.barrier;
    if (!(p.l0 > 0.0)) add("barrier.l0", "l0 must be positive");
    if (!(p.l1 > 0.0)) add("barrier.l1", "l1 must be positive");
    if (p.l1 * p.l1 < 4.0 * p.l0) add("barrier.l1", "l1² < 4·l0: characteristic roots are not real");
    else if (p.l0 > 0.0 && p.l1 > 0.0) {
        const double expected = characteristic_roots(p.l0, p.l1).first;
        if (!(std::abs(p.lambda1 - expected) <= 1e-12 * std::max(1.0, std::abs(expected))))
            add("barrier.lambda1", "lambda1 must equal the more negative root " + std::to_string(expected));
    }
    if (!(p.r >= 2.0 * s.max_radius())) add("barrier.r", "r must be at least 2·max(r0)");

    bool any_central = false, all_central = true;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        if (!(a.config.radius > 0.0)) add(agent_field(i, "radius"), "r0 must be positive");
        if (a.config.chi != 1.0 && a.config.chi != 0.5) add(agent_field(i, "chi"), "chi must be 1 or 0.5");
        if (!a.initial.finite()) add(agent_field(i, "position"), "initial state must be finite");
        if (!a.config.destination.allFinite()) add(agent_field(i, "destination"), "destination must be finite");
        const bool central = a.config.controller == ControllerKind::CentralizedMember;
        any_central = any_central || central;
        all_central = all_central && central;
        if (a.config.controller == ControllerKind::Pursuer) {
            const auto target = s.pursuit_target(i);
            if (!target || *target >= s.agents.size() || *target == i)
                add(agent_field(i, "target"), "pursuer needs a valid target agent other than itself");
        }
    }
    if (any_central && !all_central)
        add("agents", "centralized-member agents cannot be mixed with other controller kinds");

    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        for (std::size_t j = i + 1; j < s.agents.size(); ++j) {
            const double d = (s.agents[i].initial.position - s.agents[j].initial.position).norm();
            if (!(d > p.r))
                add("agents", "initial distance not > r between agent" + std::to_string(i + 1) + " and agent" +
                                  std::to_string(j + 1));
        }
    }
}

}  // namespace detail

/// Every invariant violation of the scenario; empty means valid.
inline std::vector<Violation> validate_scenario(const Scenario& s) {
    std::vector<Violation> out;
    detail::check_scenario(s, true, out);
    return out;
}

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(describe(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string describe(const std::vector<Violation>& v) {
        std::string s = "invalid scenario:";
        for (const auto& x : v) s += "\n  " + x.field + ": " + x.message;
        return s;
    }

    std::vector<Violation> violations_;
};

}  // namespace pcca
