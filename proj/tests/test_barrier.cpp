#include "pcca/barrier.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pcca;

namespace {

const BarrierParams kParams = BarrierParams::from_gains(4.0, 6.0, 5.0);

AgentState at(Vec2 p, Vec2 v = Vec2::Zero()) { return {p, v}; }

// Independent route to a: evaluate h(t) = |xi(t)|^2 - r^2 along the relative
// motion with constant relative acceleration and finite-difference it twice.
double a_plus_bu_by_finite_differences(const Vec2& xi, const Vec2& v, const Vec2& rel_accel, double r, double l0,
                                       double l1, double step) {
    auto h = [&](double t) {
        const Vec2 x = xi + v * t + 0.5 * rel_accel * t * t;
        return x.squaredNorm() - r * r;
    };
    // h is a quartic in t, so one Richardson step removes the whole truncation error.
    auto combo = [&](double s) {
        const double hd = (h(s) - h(-s)) / (2 * s);
        const double hdd = (h(s) - 2 * h(0.0) + h(-s)) / (s * s);
        return hdd + l1 * hd;
    };
    return (4.0 * combo(step / 2) - combo(step)) / 3.0 + l0 * h(0.0);
}

}  // namespace

TEST(PairBarrier, RestingPair) {
    const auto t = pair_barrier(at({10, 0}), at({0, 0}), kParams);
    EXPECT_DOUBLE_EQ(t.h, 84.0);
    EXPECT_DOUBLE_EQ(t.hdot, 0.0);
    EXPECT_DOUBLE_EQ(t.a, 504.0);
    EXPECT_EQ(t.b, Vec2(20, 0));
}

TEST(PairBarrier, ClosingPairMatchesFiniteDifferences) {
    const auto t = pair_barrier(at({5, 0}, {-4, 0}), at({0, 0}), kParams);
    // Expected values come from the finite-difference oracle, not the closed form.
    const double oracle = a_plus_bu_by_finite_differences({5, 0}, {-4, 0}, Vec2::Zero(), 4.0, 6.0, 5.0, 1e-3);
    EXPECT_NEAR(oracle, -114.0, 1e-6);
    EXPECT_DOUBLE_EQ(t.h, 9.0);
    EXPECT_DOUBLE_EQ(t.hdot, -40.0);
    EXPECT_DOUBLE_EQ(t.a, -114.0);
    EXPECT_EQ(t.b, Vec2(10, 0));
}

TEST(PairBarrier, CoincidentCentersAreDegenerate) {
    EXPECT_THROW(pair_barrier(at({1, 1}), at({1, 1}, {3, 0}), kParams), DegenerateGeometry);
}

// hddot + l1 hdot + l0 h = a + b(u_i - u_j) along the double-integrator motion.
TEST(PairBarrier, SecondOrderIdentityProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        const AgentState xi = at({d(rng), d(rng)}, {d(rng), d(rng)});
        const AgentState xj = at({d(rng), d(rng)}, {d(rng), d(rng)});
        if ((xi.position - xj.position).norm() < 0.5) continue;
        const Vec2 ui(d(rng), d(rng)), uj(d(rng), d(rng));
        const auto t = pair_barrier(xi, xj, kParams);
        const double fd = a_plus_bu_by_finite_differences(xi.position - xj.position, xi.velocity - xj.velocity,
                                                          ui - uj, 4.0, 6.0, 5.0, 1e-3);
        const double exact = t.a + t.b.dot(ui - uj);
        EXPECT_NEAR(fd, exact, 1e-5 * (1.0 + std::abs(exact)));
    }
}

TEST(PairBarrier, SwapNegatesBOnly) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const AgentState xi = at({d(rng), d(rng)}, {d(rng), d(rng)});
        const AgentState xj = at({d(rng), d(rng)}, {d(rng), d(rng)});
        const auto ij = pair_barrier(xi, xj, kParams);
        const auto ji = pair_barrier(xj, xi, kParams);
        EXPECT_DOUBLE_EQ(ij.h, ji.h);
        EXPECT_DOUBLE_EQ(ij.a, ji.a);
        EXPECT_EQ(ij.b, Vec2(-ji.b));
        // |b|^2 = 4 xi'xi, so non-overlapping circles of radius r0 give |b|^2 >= 16 r0^2.
        EXPECT_NEAR(ij.b.squaredNorm(), 4.0 * (xi.position - xj.position).squaredNorm(), 1e-9);
    }
}

TEST(PairRow, StackedLayout) {
    const auto t = pair_barrier(at({5, 0}, {-4, 0}), at({0, 0}), kParams);
    const auto row = pair_row(t, 0, 2, 3);
    Eigen::VectorXd expected(6);
    expected << 10, 0, 0, 0, -10, 0;
    EXPECT_EQ(row.coeffs, expected);
    EXPECT_EQ(row.offset, -114.0);
}

TEST(RcbfRel1, WorstCaseAndKnownDisturbance) {
    Eigen::RowVectorXd lgh(2), lph(2);
    lgh << 1, 0;
    lph << 1, 0;
    const auto f1 = rcbf_row_rel1(1.0, lgh, lph, 3.0, 1.0, WorstCaseBound{2.0});
    EXPECT_DOUBLE_EQ(f1.offset, 2.0);
    EXPECT_EQ(f1.coeffs, lgh.transpose());

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    const auto a = rcbf_row_rel1(1.0, lgh, lph, 3.0, 1.0, WorstCaseBound{0.0});
    const auto b = rcbf_row_rel1(1.0, lgh, lph, 3.0, 1.0, KnownDisturbance{zero});
    EXPECT_EQ(a.offset, b.offset);

    const Eigen::RowVectorXd no_channel = Eigen::RowVectorXd::Zero(2);
    Eigen::VectorXd w(2);
    w << 5, -7;
    EXPECT_EQ(rcbf_row_rel1(1.0, lgh, no_channel, 3.0, 2.0, WorstCaseBound{9.0}).offset,
              rcbf_row_rel1(1.0, lgh, no_channel, 3.0, 2.0, KnownDisturbance{w}).offset);

    EXPECT_THROW(rcbf_row_rel1(1.0, lgh, lph, 3.0, 0.0, WorstCaseBound{1.0}), std::invalid_argument);
    EXPECT_THROW(rcbf_row_rel1(1.0, lgh, lph, 3.0, 1.0, WorstCaseBound{-1.0}), std::invalid_argument);
}

// The worst-case row is never less conservative than the known-disturbance row.
TEST(RcbfRel1, WorstCaseDominatesProperty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    for (int trial = 0; trial < 500; ++trial) {
        Eigen::RowVectorXd lgh(3), lph(3);
        lgh << d(rng), d(rng), d(rng);
        lph << d(rng), d(rng), d(rng);
        Eigen::VectorXd w(3);
        w << d(rng), d(rng), d(rng);
        const double bound = w.norm() * (1.0 + std::abs(d(rng)));
        const double lfh = d(rng), h = d(rng);
        const auto f1 = rcbf_row_rel1(lfh, lgh, lph, h, 2.0, WorstCaseBound{bound});
        const auto f2 = rcbf_row_rel1(lfh, lgh, lph, h, 2.0, KnownDisturbance{w});
        EXPECT_LE(f1.offset, f2.offset + 1e-9);
    }
}

// The generic relative-degree-two row reproduces the pair specialization with
// f the relative double integrator, g = [I, -I] and the disturbance entering v.
TEST(RcbfRel2, ReproducesPairBarrier) {
    const Vec2 xi(5, 0), v(-4, 0);
    const double r = 4.0;
    const double h = xi.squaredNorm() - r * r;
    const double lfh = 2.0 * xi.dot(v);
    const double lf2h = 2.0 * v.squaredNorm();
    Eigen::RowVectorXd lglfh(4);
    lglfh << 2 * xi.x(), 2 * xi.y(), -2 * xi.x(), -2 * xi.y();
    Eigen::RowVectorXd lplfh(2);
    lplfh << 2 * xi.x(), 2 * xi.y();

    const auto row = rcbf_row_rel2(lf2h, lglfh, lplfh, lfh, h, 6.0, 5.0, KnownDisturbance{Eigen::Vector2d::Zero()});
    const auto pr = pair_row(pair_barrier(at(xi, v), at({0, 0}), kParams), 0, 1, 2);
    EXPECT_DOUBLE_EQ(row.offset, pr.offset);
    EXPECT_EQ(row.coeffs, pr.coeffs);
    EXPECT_DOUBLE_EQ(row.offset, -114.0);

    const auto shifted = rcbf_row_rel2(lf2h, lglfh, lplfh, lfh, h, 6.0, 5.0, KnownDisturbance{Eigen::Vector2d(1, 0)});
    EXPECT_DOUBLE_EQ(shifted.offset - row.offset, 10.0);

    const auto worst = rcbf_row_rel2(lf2h, lglfh, lplfh, lfh, h, 6.0, 5.0, WorstCaseBound{0.0});
    EXPECT_EQ(worst.offset, row.offset);
    EXPECT_EQ(worst.coeffs, row.coeffs);

    EXPECT_THROW(rcbf_row_rel2(lf2h, lglfh, lplfh, lfh, h, 7.0, 5.0, WorstCaseBound{0.0}), std::invalid_argument);
}

TEST(ReducedAdmissibleSet, Membership) {
    const auto p = BarrierParams::from_gains(4.0, 6.0, 5.0);
    EXPECT_TRUE(in_reduced_admissible_set({84, 0, 0, Vec2::Zero()}, p));
    EXPECT_FALSE(in_reduced_admissible_set({9, -40, 0, Vec2::Zero()}, p));
    EXPECT_TRUE(in_reduced_admissible_set({0, 0, 0, Vec2::Zero()}, p));
    EXPECT_FALSE(in_reduced_admissible_set({-1, 10, 0, Vec2::Zero()}, p));
}
