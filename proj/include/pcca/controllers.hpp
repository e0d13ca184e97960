#pragma once

#include "pcca/barrier.hpp"
#include "pcca/lqr.hpp"
#include "pcca/qp.hpp"

#include <span>

namespace pcca {

namespace detail {

inline void require_agent(std::size_t host, std::size_t n) {
    if (host >= n) throw std::out_of_range("host index out of range");
}

inline Vec2 slot(const Eigen::VectorXd& u, std::size_t i) { return u.segment<2>(static_cast<Eigen::Index>(2 * i)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Centralized: one QP over every agent's control, all baselines known.
// ---------------------------------------------------------------------------

inline QpProblem centralized_problem(std::span<const AgentState> states, std::span<const Vec2> u0,
                                     const BarrierParams& p) {
    const std::size_t n = states.size();
    if (u0.size() != n) throw std::invalid_argument("one baseline per agent required");
    QpProblem qp{Eigen::VectorXd(static_cast<Eigen::Index>(2 * n)), {}};
    for (std::size_t i = 0; i < n; ++i) qp.u_ref.segment<2>(static_cast<Eigen::Index>(2 * i)) = u0[i];
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) qp.rows.push_back(pair_row(pair_barrier(states[j], states[k], p), j, k, n));
    return qp;
}

/// Controls for all agents, or nullopt when the centralized QP is infeasible.
inline std::optional<std::vector<Vec2>> centralized_step(std::span<const AgentState> states, std::span<const Vec2> u0,
                                                         const BarrierParams& p) {
    const auto sol = solve(centralized_problem(states, u0, p));
    if (!sol.optimal()) return std::nullopt;
    std::vector<Vec2> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) out[i] = detail::slot(sol.u_star, i);
    return out;
}

// ---------------------------------------------------------------------------
// Decentralized: host control only, chi share of each pair's responsibility.
// ---------------------------------------------------------------------------

struct DecentralizedResult {
    Vec2 accel = Vec2::Zero();
    bool braking = false;  // QP infeasible, braking fallback applied
};

/// Full deceleration against the current velocity; zero at rest.
inline Vec2 braking_action(const Vec2& velocity, double decel) {
    const double speed = velocity.norm();
    if (speed == 0.0) return Vec2::Zero();
    return -decel * velocity / speed;
}

inline QpProblem decentralized_problem(std::size_t host, std::span<const AgentState> states, const Vec2& u0_host,
                                       double chi, const BarrierParams& p) {
    detail::require_agent(host, states.size());
    QpProblem qp{u0_host, {}};
    for (std::size_t j = 0; j < states.size(); ++j) {
        if (j == host) continue;
        const auto t = pair_barrier(states[host], states[j], p);
        qp.rows.push_back({t.b, chi * t.a});
    }
    return qp;
}

inline DecentralizedResult decentralized_step(std::size_t host, std::span<const AgentState> states,
                                              const Vec2& u0_host, double chi, const BarrierParams& p,
                                              double brake_decel = 10.0) {
    const auto sol = solve(decentralized_problem(host, states, u0_host, chi, p));
    if (!sol.optimal()) return {braking_action(states[host].velocity, brake_decel), true};
    return {sol.u_star, false};
}

// ---------------------------------------------------------------------------
// PCCA: host solves for everyone with zeros for unknown baselines, treating the
// gap between predicted and observed target accelerations as a known disturbance.
// ---------------------------------------------------------------------------

/// Per-host controller state: previous-sample predictions u*_ij and estimates w_ij.
struct PccaMemory {
    std::vector<Vec2> prev_u_star;
    std::vector<Vec2> w_hat;

    PccaMemory() = default;
    explicit PccaMemory(std::size_t n_agents)
        : prev_u_star(n_agents, Vec2::Zero()), w_hat(n_agents, Vec2::Zero()) {}
};

inline QpProblem pcca_problem(std::size_t host, std::span<const AgentState> states, const Vec2& u0_host,
                              std::span<const Vec2> w_hat, const BarrierParams& p) {
    const std::size_t n = states.size();
    detail::require_agent(host, n);
    if (w_hat.size() != n) throw std::invalid_argument("one disturbance estimate per agent required");
    QpProblem qp{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * n)), {}};
    qp.u_ref.segment<2>(static_cast<Eigen::Index>(2 * host)) = u0_host;
    auto w = [&](std::size_t j) -> Vec2 { return j == host ? Vec2::Zero() : w_hat[j]; };
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            const auto t = pair_barrier(states[j], states[k], p);
            auto row = pair_row(t, j, k, n);
            row.offset += t.b.dot(w(j) - w(k));
            qp.rows.push_back(std::move(row));
        }
    }
    return qp;
}

struct PccaStep {
    Vec2 accel = Vec2::Zero();  // u_ii*, the only component applied
    PccaMemory memory;
};

/// One PCCA sample for `host`. `observed_accels[j]` is target j's acceleration over
/// the previous interval (the host's own entry is ignored). Nullopt when infeasible.
inline std::optional<PccaStep> pcca_step(std::size_t host, std::span<const AgentState> states, const Vec2& u0_host,
                                         const PccaMemory& mem, std::span<const Vec2> observed_accels,
                                         const BarrierParams& p) {
    const std::size_t n = states.size();
    detail::require_agent(host, n);
    if (mem.prev_u_star.size() != n || mem.w_hat.size() != n || observed_accels.size() != n)
        throw std::invalid_argument("PCCA memory and observations must cover every agent");

    PccaStep step;
    step.memory.w_hat.resize(n);
    step.memory.prev_u_star.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        step.memory.w_hat[j] = j == host ? Vec2::Zero() : Vec2(observed_accels[j] - mem.prev_u_star[j]);

    const auto sol = solve(pcca_problem(host, states, u0_host, step.memory.w_hat, p));
    if (!sol.optimal()) return std::nullopt;
    for (std::size_t j = 0; j < n; ++j) step.memory.prev_u_star[j] = detail::slot(sol.u_star, j);
    step.accel = step.memory.prev_u_star[host];
    return step;
}

struct ClosedFormPair {
    Vec2 host = Vec2::Zero();
    Vec2 other = Vec2::Zero();
};

/// Closed-form two-agent PCCA solution. `terms` belongs to the ordered pair
/// (first, second); `w_hat_other` is the host's estimate for the other agent.
inline ClosedFormPair two_agent_closed_form(const BarrierTerms& terms, const Vec2& u0_host, const Vec2& w_hat_other,
                                            bool host_is_first) {
    const double bb = terms.b.squaredNorm();
    if (bb == 0.0) throw DegenerateGeometry("closed form needs b != 0");
    const Vec2 dir = terms.b / (2.0 * bb);
    if (host_is_first) {
        const double mu = terms.a + terms.b.dot(u0_host) - terms.b.dot(w_hat_other);
        const double m = std::min(0.0, mu);
        return {u0_host - m * dir, m * dir};
    }
    const double mu = terms.a - terms.b.dot(u0_host) + terms.b.dot(w_hat_other);
    const double m = std::min(0.0, mu);
    return {u0_host + m * dir, -m * dir};
}

}  // namespace pcca
