#include "modediag/h2_norm.hpp"

#include <cmath>

#include "modediag/errors.hpp"
#include "modediag/system_model.hpp"

namespace modediag {

Eigen::MatrixXd controllability_gramian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows()) throw DimensionError("gramian: inconsistent A, B");
    if (!spectral_radius_stable(A)) throw Unstable("gramian requires a stable A");

    // Squared Smith iteration: P_{k+1} = P_k + A_k P_k A_k',  A_{k+1} = A_k^2.
    // Each sweep doubles the number of summed terms of sum_t A^t B B' A'^t.
    const Eigen::MatrixXd Q = B * B.transpose();
    Eigen::MatrixXd P = Q;
    Eigen::MatrixXd Ak = A;
    const double scale = std::max(1.0, Q.norm());
    for (int it = 0; it < 10000; ++it) {
        const Eigen::MatrixXd residual = A * P * A.transpose() + Q - P;
        if (residual.norm() <= 1e-12 * std::max(scale, P.norm())) return 0.5 * (P + P.transpose());
        P += Ak * P * Ak.transpose();
        Ak = Ak * Ak;
        if (!P.allFinite()) break;
    }
    throw NumericalFailure("gramian fixed-point iteration did not converge");
}

double h2_norm_oracle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C) {
    if (C.cols() != A.rows()) throw DimensionError("h2 norm: inconsistent C");
    const Eigen::MatrixXd P = controllability_gramian(A, B);
    return std::sqrt(std::max(0.0, (C * P * C.transpose()).trace()));
}

}  // namespace modediag
