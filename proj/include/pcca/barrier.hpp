#pragma once

#include "pcca/core.hpp"

#include <variant>

namespace pcca {

/// Relative-degree-two pair barrier h = xi'xi - r^2 and the coefficients of
///   hddot + l1 hdot + l0 h = a + b (u_i - u_j) >= 0.
struct BarrierTerms {
    double h = 0.0;
    double hdot = 0.0;
    double a = 0.0;
    Vec2 b = Vec2::Zero();  // row vector 2 xi'
};

/// Linear constraint coeffs . u + offset >= 0 over the stacked decision variable.
struct ConstraintRow {
    Eigen::VectorXd coeffs;
    double offset = 0.0;

    double evaluate(const Eigen::VectorXd& u) const { return coeffs.dot(u) + offset; }
};

/// Barrier terms for the ordered pair (i, j): xi = X_i - X_j, v = V_i - V_j.
inline BarrierTerms pair_barrier(const AgentState& xi, const AgentState& xj, const BarrierParams& p) {
    const Vec2 rel = xi.position - xj.position;
    const Vec2 vel = xi.velocity - xj.velocity;
    if (rel.squaredNorm() == 0.0) throw DegenerateGeometry("pair barrier undefined: agent centers coincide");
    BarrierTerms t;
    t.h = rel.squaredNorm() - p.r * p.r;
    t.hdot = 2.0 * rel.dot(vel);
    t.a = 2.0 * vel.squaredNorm() + 2.0 * p.l1 * rel.dot(vel) + p.l0 * t.h;
    t.b = 2.0 * rel;
    return t;
}

/// Stacked row a + b u_i - b u_j over `n_agents` 2-vector slots.
inline ConstraintRow pair_row(const BarrierTerms& t, std::size_t i, std::size_t j, std::size_t n_agents) {
    ConstraintRow row{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * n_agents)), t.a};
    row.coeffs.segment<2>(static_cast<Eigen::Index>(2 * i)) = t.b;
    row.coeffs.segment<2>(static_cast<Eigen::Index>(2 * j)) = -t.b;
    return row;
}

/// Disturbance handling for robust rows: a worst-case norm bound (F1) or a known estimate (F2).
struct WorstCaseBound {
    double bound = 0.0;
};

struct KnownDisturbance {
    Eigen::VectorXd estimate;
};

using Disturbance = std::variant<WorstCaseBound, KnownDisturbance>;

namespace detail {

inline double disturbance_term(const Eigen::RowVectorXd& lp, const Disturbance& dist) {
    if (const auto* w = std::get_if<WorstCaseBound>(&dist)) {
        if (!(w->bound >= 0.0)) throw std::invalid_argument("worst-case disturbance bound must be >= 0");
        return -lp.norm() * w->bound;
    }
    const auto& est = std::get<KnownDisturbance>(dist).estimate;
    if (est.size() != lp.size()) throw std::invalid_argument("disturbance estimate has wrong dimension");
    return lp.dot(est.transpose());
}

}  // namespace detail

/// Relative-degree-one robust barrier row with linear class-K function alpha(h) = gain * h:
///   Lfh + {-|Lph| wbar | Lph what} + Lgh u + gain h >= 0.
inline ConstraintRow rcbf_row_rel1(double lfh, const Eigen::RowVectorXd& lgh, const Eigen::RowVectorXd& lph,
                                   double h, double alpha_gain, const Disturbance& dist) {
    if (!(alpha_gain > 0.0)) throw std::invalid_argument("alpha gain must be positive");
    return {lgh.transpose(), lfh + detail::disturbance_term(lph, dist) + alpha_gain * h};
}

/// Relative-degree-two robust barrier row:
///   Lf^2 h + {-|LpLfh| wbar | LpLfh what} + LgLfh u + l1 Lfh + l0 h >= 0.
inline ConstraintRow rcbf_row_rel2(double lf2h, const Eigen::RowVectorXd& lglfh, const Eigen::RowVectorXd& lplfh,
                                   double lfh, double h, double l0, double l1, const Disturbance& dist) {
    if (!(l0 > 0.0) || !(l1 > 0.0) || l1 * l1 < 4.0 * l0)
        throw std::invalid_argument("l0, l1 must be positive with real characteristic roots");
    return {lglfh.transpose(), lf2h + detail::disturbance_term(lplfh, dist) + l1 * lfh + l0 * h};
}

/// Membership in C* = {h >= 0, hdot - lambda1 h >= 0}.
inline bool in_reduced_admissible_set(const BarrierTerms& t, const BarrierParams& p) {
    return t.h >= 0.0 && t.hdot - p.lambda1 * t.h >= 0.0;
}

}  // namespace pcca
