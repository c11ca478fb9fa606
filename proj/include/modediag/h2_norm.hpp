#pragma once

#include <Eigen/Dense>

namespace modediag {

/// Solves P = A P A' + B B' by squared fixed-point (Smith) iteration.
/// Throws Unstable when rho(A) >= 1, NumericalFailure if the residual does not reach 1e-12.
Eigen::MatrixXd controllability_gramian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// H2 norm of C (qI - A)^{-1} B, computed as sqrt(trace(C P C')) from the Gramian.
double h2_norm_oracle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C);

}  // namespace modediag
