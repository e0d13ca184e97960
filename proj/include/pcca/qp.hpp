#pragma once

// Least-distance quadratic programs
//
//     min_u |u - u_ref|^2   s.t.   G u + d >= 0
//
// solved with a dual active-set method (Goldfarb-Idnani specialised to an
// identity Hessian). The iterate starts at the unconstrained optimum u_ref and
// the most violated constraint enters the working set on each major iteration,
// lowest index first on ties. Infeasibility surfaces as a Farkas certificate
// y >= 0 with y'G = 0 and y'd < 0.

#include "pcca/barrier.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace pcca {

struct QpProblem {
    Eigen::VectorXd u_ref;
    std::vector<ConstraintRow> rows;

    Eigen::Index dim() const { return u_ref.size(); }
};

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
    QpStatus status = QpStatus::Optimal;
    Eigen::VectorXd u_star;             // optimal only
    std::vector<std::size_t> active_set;  // ascending row indices
    std::vector<double> multipliers;      // aligned with active_set, for the |u - u_ref|^2 objective
    Eigen::VectorXd certificate;          // infeasible only, one entry per row

    bool optimal() const { return status == QpStatus::Optimal; }
};

namespace detail {

inline void check_problem(const QpProblem& p) {
    if (!p.u_ref.allFinite()) throw std::invalid_argument("QP reference must be finite");
    for (const auto& row : p.rows) {
        if (row.coeffs.size() != p.dim()) throw std::invalid_argument("QP row has wrong dimension");
        if (!row.coeffs.allFinite() || !std::isfinite(row.offset))
            throw std::invalid_argument("QP row entries must be finite");
    }
}

/// Violation threshold for a row at point x, relative to the magnitudes involved.
inline double violation_threshold(const ConstraintRow& row, const Eigen::VectorXd& x, double tol) {
    return tol * (1.0 + std::abs(row.offset) + row.coeffs.norm() * x.norm());
}

}  // namespace detail

inline QpSolution solve(const QpProblem& p, double tol = 1e-9) {
    detail::check_problem(p);
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    const Eigen::Index n = p.dim();
    const std::size_t m = p.rows.size();
    Eigen::VectorXd x = p.u_ref;
    std::vector<std::size_t> active;  // working set, insertion order
    std::vector<double> lambda;       // multipliers for the 1/2-scaled objective
    std::vector<bool> in_active(m, false);

    const std::size_t max_iterations = 50 * (m + static_cast<std::size_t>(n)) + 100;
    std::size_t iterations = 0;

    for (;;) {
        // Most violated inactive constraint; strict comparison keeps the lowest index on ties.
        std::optional<std::size_t> entering;
        double worst = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (in_active[k]) continue;
            const double s = p.rows[k].evaluate(x);
            if (s < -detail::violation_threshold(p.rows[k], x, tol) && s < worst) {
                worst = s;
                entering = k;
            }
        }
        if (!entering) break;

        const std::size_t ep = *entering;
        const Eigen::VectorXd& np = p.rows[ep].coeffs;
        double lambda_p = 0.0;

        for (;;) {
            if (++iterations > max_iterations) throw NumericalDegeneracy("active-set iteration limit exceeded");

            const Eigen::Index q = static_cast<Eigen::Index>(active.size());
            Eigen::VectorXd z = np;
            Eigen::VectorXd r(q);
            if (q > 0) {
                Eigen::MatrixXd N(n, q);
                for (Eigen::Index c = 0; c < q; ++c) N.col(c) = p.rows[active[static_cast<std::size_t>(c)]].coeffs;
                const Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
                const Eigen::MatrixXd R = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
                const Eigen::VectorXd diag = R.diagonal().cwiseAbs();
                if (diag.minCoeff() <= 1e-12 * diag.maxCoeff())
                    throw NumericalDegeneracy("working-set constraints are linearly dependent");
                const Eigen::MatrixXd Q1 = qr.householderQ() * Eigen::MatrixXd::Identity(n, q);
                const Eigen::VectorXd proj = Q1.transpose() * np;
                r = R.triangularView<Eigen::Upper>().solve(proj);
                z = np - Q1 * proj;
            }

            // Dual step length: first working-set multiplier driven to zero.
            double t_dual = std::numeric_limits<double>::infinity();
            std::optional<Eigen::Index> leaving;
            const double r_eps = 1e-13 * std::max(1.0, q > 0 ? r.cwiseAbs().maxCoeff() : 0.0);
            for (Eigen::Index c = 0; c < q; ++c) {
                if (r(c) > r_eps) {
                    const double ratio = lambda[static_cast<std::size_t>(c)] / r(c);
                    if (ratio < t_dual) {
                        t_dual = ratio;
                        leaving = c;
                    }
                }
            }

            // Primal step length: entering constraint becomes active.
            double t_primal = std::numeric_limits<double>::infinity();
            const double zz = z.squaredNorm();
            if (std::sqrt(zz) > 1e-10 * std::max(np.norm(), std::numeric_limits<double>::min())) {
                t_primal = -p.rows[ep].evaluate(x) / z.dot(np);
            }

            if (!std::isfinite(t_dual) && !std::isfinite(t_primal)) {
                QpSolution out;
                out.status = QpStatus::Infeasible;
                out.certificate = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
                out.certificate(static_cast<Eigen::Index>(ep)) = 1.0;
                for (Eigen::Index c = 0; c < q; ++c)
                    out.certificate(static_cast<Eigen::Index>(active[static_cast<std::size_t>(c)])) =
                        std::max(0.0, -r(c));
                return out;
            }

            const double t = std::min(t_dual, t_primal);
            if (std::isfinite(t_primal)) x += t * z;
            for (Eigen::Index c = 0; c < q; ++c) lambda[static_cast<std::size_t>(c)] -= t * r(c);
            lambda_p += t;

            if (t_primal <= t_dual) {
                active.push_back(ep);
                lambda.push_back(lambda_p);
                in_active[ep] = true;
                break;
            }
            const auto drop = static_cast<std::size_t>(*leaving);
            in_active[active[drop]] = false;
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
            lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(drop));
        }
    }

    QpSolution out;
    out.u_star = std::move(x);
    std::vector<std::size_t> order(active.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return active[a] < active[b]; });
    for (const auto idx : order) {
        out.active_set.push_back(active[idx]);
        out.multipliers.push_back(2.0 * std::max(0.0, lambda[idx]));
    }
    return out;
}

/// Projection of u_ref onto the half-space {coeffs . u + offset >= 0}.
inline Eigen::VectorXd solve_single_row_closed_form(const Eigen::VectorXd& u_ref, const ConstraintRow& row) {
    if (row.coeffs.size() != u_ref.size()) throw std::invalid_argument("row has wrong dimension");
    const double gg = row.coeffs.squaredNorm();
    if (gg == 0.0) throw std::invalid_argument("closed-form projection needs nonzero coefficients");
    const double mu = row.evaluate(u_ref);
    return u_ref - std::min(0.0, mu) * row.coeffs / gg;
}

/// Largest KKT residual of an optimal solution: primal infeasibility, stationarity,
/// dual sign and complementary slackness. Zero means exact.
inline double kkt_residual(const QpProblem& p, const QpSolution& s) {
    double worst = 0.0;
    for (const auto& row : p.rows) worst = std::max(worst, -row.evaluate(s.u_star));
    Eigen::VectorXd grad = 2.0 * (s.u_star - p.u_ref);
    for (std::size_t k = 0; k < s.active_set.size(); ++k) {
        const auto& row = p.rows[s.active_set[k]];
        grad -= s.multipliers[k] * row.coeffs;
        worst = std::max(worst, -s.multipliers[k]);
        worst = std::max(worst, std::abs(s.multipliers[k] * row.evaluate(s.u_star)));
    }
    return grad.size() == 0 ? worst : std::max(worst, grad.cwiseAbs().maxCoeff());
}

/// True when y >= 0, y'G = 0 and y'd < 0 hold to `tol` (relative to the row magnitudes).
inline bool is_farkas_certificate(const QpProblem& p, const Eigen::VectorXd& y, double tol = 1e-9) {
    if (y.size() != static_cast<Eigen::Index>(p.rows.size()) || y.size() == 0) return false;
    Eigen::VectorXd yg = Eigen::VectorXd::Zero(p.dim());
    double yd = 0.0;
    double scale = 1.0;
    for (std::size_t k = 0; k < p.rows.size(); ++k) {
        const double yk = y(static_cast<Eigen::Index>(k));
        if (yk < -tol) return false;
        yg += yk * p.rows[k].coeffs;
        yd += yk * p.rows[k].offset;
        scale = std::max(scale, std::abs(yk) * (p.rows[k].coeffs.lpNorm<Eigen::Infinity>() + std::abs(p.rows[k].offset)));
    }
    const bool balanced = p.dim() == 0 || yg.cwiseAbs().maxCoeff() <= tol * scale;
    return balanced && yd < -tol * scale;
}

}  // namespace pcca
