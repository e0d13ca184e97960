#pragma once

// Exhaustive reference solver for small least-distance QPs. Every subset of
// rows is tried as an equality-constrained active set; the feasible stationary
// point with nonnegative multipliers is the optimum. When none exists, basic
// solutions of {y >= 0, G'y = 0, d'y = -1} are enumerated for a Farkas
// certificate. Exponential in the row count; test use only.

#include "pcca/qp.hpp"

namespace pcca {

inline constexpr std::size_t kOracleMaxRows = 12;

inline QpSolution brute_force_oracle(const QpProblem& p, double tol = 1e-9) {
    detail::check_problem(p);
    const std::size_t m = p.rows.size();
    if (m > kOracleMaxRows) throw std::length_error("brute-force oracle limited to 12 rows");
    const Eigen::Index n = p.dim();

    auto subset_rows = [&](unsigned mask) {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < m; ++k)
            if (mask & (1u << k)) idx.push_back(k);
        return idx;
    };

    std::optional<QpSolution> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        const auto idx = subset_rows(mask);
        const auto q = static_cast<Eigen::Index>(idx.size());
        if (q > n) continue;
        Eigen::MatrixXd N(n, q);
        Eigen::VectorXd d(q);
        for (Eigen::Index c = 0; c < q; ++c) {
            N.col(c) = p.rows[idx[static_cast<std::size_t>(c)]].coeffs;
            d(c) = p.rows[idx[static_cast<std::size_t>(c)]].offset;
        }
        Eigen::VectorXd u = p.u_ref;
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(q);
        if (q > 0) {
            // u = u_ref + N lam with N'u + d = 0.
            const Eigen::MatrixXd gram = N.transpose() * N;
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
            if (lu.rank() < q) continue;
            lam = lu.solve(-(N.transpose() * p.u_ref + d));
            u = p.u_ref + N * lam;
        }
        if (q > 0 && (lam.array() < -tol * (1.0 + lam.cwiseAbs().maxCoeff())).any()) continue;
        bool feasible = true;
        for (const auto& row : p.rows) {
            if (row.evaluate(u) < -tol * (1.0 + std::abs(row.offset) + row.coeffs.norm() * u.norm())) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;
        const double cost = (u - p.u_ref).squaredNorm();
        if (cost < best_cost) {
            best_cost = cost;
            QpSolution s;
            s.u_star = u;
            for (Eigen::Index c = 0; c < q; ++c) {
                s.active_set.push_back(idx[static_cast<std::size_t>(c)]);
                s.multipliers.push_back(2.0 * std::max(0.0, lam(c)));
            }
            best = std::move(s);
        }
    }
    if (best) return *best;

    // No KKT point: look for a basic Farkas certificate.
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        const auto idx = subset_rows(mask);
        const auto q = static_cast<Eigen::Index>(idx.size());
        if (q > n + 1) continue;
        Eigen::MatrixXd A(n + 1, q);
        for (Eigen::Index c = 0; c < q; ++c) {
            const auto& row = p.rows[idx[static_cast<std::size_t>(c)]];
            A.col(c).head(n) = row.coeffs;
            A(n, c) = row.offset;
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
        rhs(n) = -1.0;
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.rank() < q) continue;
        const Eigen::VectorXd y_sub = lu.solve(rhs);
        if ((A * y_sub - rhs).norm() > 1e-9 * (1.0 + A.norm() * y_sub.norm())) continue;
        if ((y_sub.array() < -tol).any()) continue;
        QpSolution s;
        s.status = QpStatus::Infeasible;
        s.certificate = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
        for (Eigen::Index c = 0; c < q; ++c)
            s.certificate(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)])) = std::max(0.0, y_sub(c));
        return s;
    }
    throw std::logic_error("brute-force oracle found neither a KKT point nor a Farkas certificate");
}

}  // namespace pcca
