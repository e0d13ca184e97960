#pragma once

#include "pcca/core.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace pcca {

/// Stabilizing solution of A'P + PA - PBR^-1B'P + Q = 0 from the stable
/// invariant subspace of the Hamiltonian matrix.
inline Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                                  const Eigen::MatrixXd& R) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd H(2 * n, 2 * n);
    H << A, -B * R.ldlt().solve(B.transpose()), -Q, -A.transpose();

    const Eigen::EigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw NumericalDegeneracy("Hamiltonian eigen-decomposition failed");
    Eigen::MatrixXcd stable(2 * n, n);
    Eigen::Index found = 0;
    for (Eigen::Index k = 0; k < 2 * n; ++k) {
        if (es.eigenvalues()(k).real() < 0.0) {
            if (found == n) throw NumericalDegeneracy("Hamiltonian has too many stable eigenvalues");
            stable.col(found++) = es.eigenvectors().col(k);
        }
    }
    if (found != n) throw NumericalDegeneracy("no stabilizing Riccati solution (eigenvalues on the imaginary axis)");

    const Eigen::MatrixXcd X1 = stable.topRows(n);
    const Eigen::MatrixXcd X2 = stable.bottomRows(n);
    Eigen::MatrixXd P = (X2 * X1.inverse()).real();
    P = 0.5 * (P + P.transpose());

    // Newton-Kleinman refinement: repeated Hamiltonian eigenvalues (the double
    // integrator has them) leave the subspace estimate accurate to only ~1e-8.
    const Eigen::MatrixXd Rinv_Bt = R.ldlt().solve(B.transpose());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    for (int iter = 0; iter < 8; ++iter) {
        const Eigen::MatrixXd K = Rinv_Bt * P;
        const Eigen::MatrixXd Ak = A - B * K;
        const Eigen::MatrixXd rhs = -(Q + K.transpose() * R * K);
        // Ak' P + P Ak = rhs, vectorized column-major.
        const Eigen::MatrixXd L = Eigen::kroneckerProduct(I, Ak.transpose()) + Eigen::kroneckerProduct(Ak.transpose(), I);
        const Eigen::VectorXd vec_rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * n);
        const Eigen::VectorXd vec_p = L.fullPivLu().solve(vec_rhs);
        Eigen::MatrixXd next = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), n, n);
        next = 0.5 * (next + next.transpose());
        const double step = (next - P).cwiseAbs().maxCoeff();
        P = next;
        if (step <= 1e-15 * (1.0 + P.cwiseAbs().maxCoeff())) break;
    }
    return P;
}

/// Per-axis state feedback u = -kp (x - dest) - kv v.
struct LqrGains {
    double kp = 0.0;
    double kv = 0.0;
};

/// LQR gains of the planar double integrator with Q = q I4, R = r I2. The axes
/// decouple, so one 2x2 Riccati equation covers both.
inline LqrGains lqr_gains(double q = 4.0, double r = 1.0) {
    Eigen::Matrix2d A;
    A << 0.0, 1.0, 0.0, 0.0;
    const Eigen::Vector2d B(0.0, 1.0);
    const Eigen::MatrixXd P = solve_care(A, B, q * Eigen::Matrix2d::Identity(), Eigen::MatrixXd::Constant(1, 1, r));
    const Eigen::RowVectorXd K = B.transpose() * P / r;
    return {K(0), K(1)};
}

inline Vec2 lqr_baseline(const AgentState& x, const Vec2& dest, const LqrGains& g) {
    return -g.kp * (x.position - dest) - g.kv * x.velocity;
}

/// Chases the evader's current position with zero velocity target; no avoidance term.
inline Vec2 pursuer_controller(const AgentState& pursuer, const Vec2& evader_position, const LqrGains& g) {
    return lqr_baseline(pursuer, evader_position, g);
}

}  // namespace pcca
