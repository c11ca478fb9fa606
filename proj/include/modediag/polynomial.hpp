#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace modediag {

/// Polynomial matrix sum_m Q_m q^m, coefficients in ascending degree.
using PolyMatrix = std::vector<Eigen::MatrixXd>;

/// Banded block-Toeplitz stacking of Q2 for a left factor of degree `left_degree`:
/// block row r holds Q2_0 .. Q2_d2 starting at block column r.
Eigen::MatrixXd stack_toeplitz(const PolyMatrix& Q2, int left_degree);

/// [Q1_0 Q1_1 ... Q1_d1]
Eigen::MatrixXd stack_row(const PolyMatrix& Q1);

struct StackedProduct {
    Eigen::MatrixXd toeplitz;  ///< stacked Q2
    Eigen::MatrixXd product;   ///< [P_0 ... P_{d1+d2}] with Q1(q) Q2(q) = sum P_m q^m
};

/// Coefficients of Q1 Q2 through the block-Toeplitz stacking of Q2.
StackedProduct stack_poly_product(const PolyMatrix& Q1, const PolyMatrix& Q2);

/// Direct convolution of coefficient sequences; used as the reference for the stacked form.
PolyMatrix poly_multiply(const PolyMatrix& Q1, const PolyMatrix& Q2);

Eigen::MatrixXd poly_evaluate(const PolyMatrix& Q, double q);

/// Monic polynomial prod (q - root) as ascending coefficients a_0 .. a_{n-1}, 1.
Eigen::VectorXd monic_from_roots(std::span<const double> roots);

/// Observable companion matrix of a monic polynomial (ascending coefficients, leading 1):
/// ones on the subdiagonal, last column -[a_0 .. a_{n-1}].
Eigen::MatrixXd companion_matrix(const Eigen::VectorXd& monic);

double poly_value(const Eigen::VectorXd& coeffs, double q);

}  // namespace modediag
