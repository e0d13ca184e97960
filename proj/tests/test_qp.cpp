#include "pcca/qp_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pcca;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}

QpProblem random_problem(std::mt19937_64& rng, int max_dim = 8, int max_rows = 6) {
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    const int n = 1 + static_cast<int>(rng() % max_dim);
    const int m = static_cast<int>(rng() % (max_rows + 1));
    QpProblem p{Eigen::VectorXd(n), {}};
    for (int i = 0; i < n; ++i) p.u_ref(i) = d(rng);
    for (int r = 0; r < m; ++r) {
        ConstraintRow row{Eigen::VectorXd(n), d(rng)};
        for (int i = 0; i < n; ++i) row.coeffs(i) = d(rng);
        p.rows.push_back(row);
    }
    return p;
}

}  // namespace

TEST(Qp, NoRowsReturnsReference) {
    const QpProblem p{vec({1, -2, 3}), {}};
    const auto s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_EQ(s.u_star, p.u_ref);
    EXPECT_TRUE(s.active_set.empty());
}

TEST(Qp, SlackRowsLeaveReferenceUntouched) {
    const QpProblem p{vec({1, 1}), {{vec({1, 0}), 5.0}, {vec({0, 1}), 0.0}}};
    const auto s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_EQ(s.u_star, p.u_ref);
    EXPECT_TRUE(s.active_set.empty());
}

// Two stacked agents, row 10 (u1x - u2x) - 114 >= 0 and u_ref = 0.
TEST(Qp, SingleActiveRow) {
    const QpProblem p{Eigen::VectorXd::Zero(4), {{vec({10, 0, -10, 0}), -114.0}}};
    const auto s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.u_star(0), 5.7, 1e-12);
    EXPECT_NEAR(s.u_star(1), 0.0, 1e-12);
    EXPECT_NEAR(s.u_star(2), -5.7, 1e-12);
    EXPECT_NEAR(s.u_star(3), 0.0, 1e-12);
    ASSERT_EQ(s.active_set, std::vector<std::size_t>{0});
    // Multiplier of |u|^2: 2 u* = lambda g -> lambda = 1.14
    EXPECT_NEAR(s.multipliers[0], 1.14, 1e-12);
    EXPECT_LE(kkt_residual(p, s), 1e-12);
}

TEST(Qp, InfeasibleOneDimensional) {
    // u >= 1 and -u - 1 >= 0  (u <= -1)
    const QpProblem p{vec({0}), {{vec({1}), -1.0}, {vec({-1}), -1.0}}};
    const auto s = solve(p);
    ASSERT_EQ(s.status, QpStatus::Infeasible);
    ASSERT_EQ(s.certificate.size(), 2);
    EXPECT_TRUE(is_farkas_certificate(p, s.certificate));
    // Direction of the certificate is (1, 1).
    EXPECT_NEAR(s.certificate(0) / s.certificate(1), 1.0, 1e-12);
}

TEST(Qp, RejectsMalformedProblems) {
    QpProblem p{vec({0, 0}), {{vec({1}), 0.0}}};
    EXPECT_THROW(solve(p), std::invalid_argument);
    p = {vec({0, std::nan("")}), {}};
    EXPECT_THROW(solve(p), std::invalid_argument);
    EXPECT_THROW(solve(QpProblem{vec({0}), {}}, -1.0), std::invalid_argument);
}

TEST(Qp, ClosedFormAgreesWithSolver) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        auto p = random_problem(rng, 6, 1);
        if (p.rows.empty()) continue;
        const auto s = solve(p);
        ASSERT_TRUE(s.optimal());
        EXPECT_LE((solve_single_row_closed_form(p.u_ref, p.rows[0]) - s.u_star).norm(), 1e-12 * (1.0 + s.u_star.norm()));
    }
}

TEST(Qp, MatchesBruteForceOracle) {
    std::mt19937_64 rng(2024);
    int infeasible = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = random_problem(rng);
        const auto s = solve(p);
        const auto o = brute_force_oracle(p);
        ASSERT_EQ(s.status, o.status) << "trial " << trial;
        if (s.optimal()) {
            EXPECT_LE((s.u_star - o.u_star).norm(), 1e-7) << "trial " << trial;
            EXPECT_LE(kkt_residual(p, s), 1e-7 * (1.0 + s.u_star.norm()));
        } else {
            ++infeasible;
            EXPECT_TRUE(is_farkas_certificate(p, s.certificate, 1e-7)) << "trial " << trial;
        }
    }
    EXPECT_GT(infeasible, 0);
}

// Scaling a row by a positive factor does not change the feasible set or u*.
TEST(Qp, RowScalingInvariance) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int trial = 0; trial < 300; ++trial) {
        auto p = random_problem(rng);
        const auto s = solve(p);
        for (auto& row : p.rows) {
            const double c = scale(rng);
            row.coeffs *= c;
            row.offset *= c;
        }
        const auto t = solve(p);
        ASSERT_EQ(s.status, t.status);
        if (s.optimal()) {
            EXPECT_LE((s.u_star - t.u_star).norm(), 1e-7 * (1.0 + s.u_star.norm()));
        }
    }
}

// Projection onto a fixed convex set is 1-Lipschitz in u_ref.
TEST(Qp, ProjectionIsNonexpansive) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nudge(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        auto p = random_problem(rng);
        const auto s = solve(p);
        if (!s.optimal()) continue;
        auto q = p;
        for (Eigen::Index i = 0; i < q.u_ref.size(); ++i) q.u_ref(i) += nudge(rng);
        const auto t = solve(q);
        ASSERT_TRUE(t.optimal());
        EXPECT_LE((s.u_star - t.u_star).norm(), (p.u_ref - q.u_ref).norm() * (1.0 + 1e-9) + 1e-9);
    }
}

TEST(Qp, Deterministic) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_problem(rng);
        const auto a = solve(p);
        const auto b = solve(p);
        ASSERT_EQ(a.status, b.status);
        EXPECT_EQ(a.active_set, b.active_set);
        if (a.optimal()) {
            EXPECT_EQ(a.u_star, b.u_star);
        } else {
            EXPECT_EQ(a.certificate, b.certificate);
        }
    }
}

// Parallel duplicate rows must not break the working-set factorization.
TEST(Qp, DuplicateRows) {
    const QpProblem p{vec({0, 0}), {{vec({1, 1}), -2.0}, {vec({1, 1}), -2.0}, {vec({2, 2}), -4.0}}};
    const auto s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.u_star(0), 1.0, 1e-12);
    EXPECT_NEAR(s.u_star(1), 1.0, 1e-12);
}

TEST(QpOracle, RefusesLargeProblems) {
    QpProblem p{vec({0}), {}};
    for (std::size_t k = 0; k <= kOracleMaxRows; ++k) p.rows.push_back({vec({1}), -1.0});
    EXPECT_THROW(brute_force_oracle(p), std::length_error);
}
