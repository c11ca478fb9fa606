#include "modediag/polynomial.hpp"

#include <cmath>

#include "modediag/errors.hpp"

namespace modediag {

namespace {

void check_blocks(const PolyMatrix& Q, const char* what) {
    if (Q.empty()) throw DimensionError(std::string(what) + " has no coefficients");
    for (const auto& M : Q)
        if (M.rows() != Q.front().rows() || M.cols() != Q.front().cols())
            throw DimensionError(std::string(what) + " coefficients differ in shape");
}

}  // namespace

Eigen::MatrixXd stack_toeplitz(const PolyMatrix& Q2, int left_degree) {
    check_blocks(Q2, "Q2");
    if (left_degree < 0) throw DimensionError("negative degree");
    const auto r = Q2.front().rows();
    const auto c = Q2.front().cols();
    const int d2 = static_cast<int>(Q2.size()) - 1;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero((left_degree + 1) * r, (left_degree + d2 + 1) * c);
    for (int row = 0; row <= left_degree; ++row)
        for (int m = 0; m <= d2; ++m) out.block(row * r, (row + m) * c, r, c) = Q2[static_cast<std::size_t>(m)];
    return out;
}

Eigen::MatrixXd stack_row(const PolyMatrix& Q1) {
    check_blocks(Q1, "Q1");
    const auto r = Q1.front().rows();
    const auto c = Q1.front().cols();
    Eigen::MatrixXd out(r, c * static_cast<Eigen::Index>(Q1.size()));
    for (std::size_t m = 0; m < Q1.size(); ++m) out.middleCols(static_cast<Eigen::Index>(m) * c, c) = Q1[m];
    return out;
}

StackedProduct stack_poly_product(const PolyMatrix& Q1, const PolyMatrix& Q2) {
    check_blocks(Q1, "Q1");
    check_blocks(Q2, "Q2");
    if (Q1.front().cols() != Q2.front().rows()) throw DimensionError("Q1 and Q2 are not conformable");
    StackedProduct sp;
    sp.toeplitz = stack_toeplitz(Q2, static_cast<int>(Q1.size()) - 1);
    sp.product = stack_row(Q1) * sp.toeplitz;
    return sp;
}

PolyMatrix poly_multiply(const PolyMatrix& Q1, const PolyMatrix& Q2) {
    check_blocks(Q1, "Q1");
    check_blocks(Q2, "Q2");
    if (Q1.front().cols() != Q2.front().rows()) throw DimensionError("Q1 and Q2 are not conformable");
    PolyMatrix out(Q1.size() + Q2.size() - 1, Eigen::MatrixXd::Zero(Q1.front().rows(), Q2.front().cols()));
    for (std::size_t a = 0; a < Q1.size(); ++a)
        for (std::size_t b = 0; b < Q2.size(); ++b) out[a + b] += Q1[a] * Q2[b];
    return out;
}

Eigen::MatrixXd poly_evaluate(const PolyMatrix& Q, double q) {
    check_blocks(Q, "Q");
    Eigen::MatrixXd acc = Q.back();
    for (auto it = Q.rbegin() + 1; it != Q.rend(); ++it) acc = acc * q + *it;
    return acc;
}

Eigen::VectorXd monic_from_roots(std::span<const double> roots) {
    Eigen::VectorXd p = Eigen::VectorXd::Ones(1);
    for (double r : roots) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(p.size() + 1);
        next.tail(p.size()) += p;         // q * p
        next.head(p.size()) -= r * p;     // -r * p
        p = next;
    }
    return p;
}

Eigen::MatrixXd companion_matrix(const Eigen::VectorXd& monic) {
    const auto n = monic.size() - 1;
    if (n < 1) throw DimensionError("companion matrix needs degree >= 1");
    if (std::abs(monic(n) - 1.0) > 1e-15) throw DimensionError("polynomial is not monic");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    if (n > 1) A.bottomLeftCorner(n - 1, n - 1).setIdentity();
    A.col(n - 1) = -monic.head(n);
    return A;
}

double poly_value(const Eigen::VectorXd& coeffs, double q) {
    double acc = 0.0;
    for (auto k = coeffs.size(); k-- > 0;) acc = acc * q + coeffs(k);
    return acc;
}

}  // namespace modediag
