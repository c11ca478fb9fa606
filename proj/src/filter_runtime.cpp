#include "modediag/filter_runtime.hpp"

#include "modediag/errors.hpp"
#include "modediag/polynomial.hpp"

namespace modediag {

Realization realize(const Matrix& N, const Vector& denominator, int ny) {
    if (denominator.size() != N.rows() + 1) throw DimensionError("denominator degree must be d_N + 1");
    if (ny < 1 || N.cols() <= ny) throw DimensionError("numerator width does not match n_x + n_y");
    Realization r;
    r.A_r = companion_matrix(denominator);
    r.B_r = -N.rightCols(ny);
    r.C_r = Matrix::Zero(1, N.rows());
    r.C_r(0, N.rows() - 1) = 1.0;
    return r;
}

Realization realize(const ResidualFilter& filter) {
    return realize(filter.N, filter.denominator, static_cast<int>(filter.B_r.cols()));
}

ResidualOutput residual_step(const FilterState& state, const ResidualFilter& filter, const Vector& y) {
    if (state.xbar.size() != filter.A_r.rows()) throw DimensionError("filter state has wrong size");
    if (y.size() != filter.B_r.cols()) throw DimensionError("measurement has wrong size");
    ResidualOutput out;
    out.r = (filter.C_r * state.xbar)(0);
    out.state = state;
    out.state.xbar = filter.A_r * state.xbar + filter.B_r * y;
    return out;
}

AugmentedSystem augmented(const SwitchedAffineSystem& system, const ResidualFilter& filter, int controller,
                          int plant) {
    const ClosedLoopMode clm = closed_loop(system, controller, plant);
    const auto nx = clm.A_cl.rows();
    const auto nf = filter.A_r.rows();
    AugmentedSystem aug;
    aug.A = Matrix::Zero(nx + nf, nx + nf);
    aug.A.topLeftCorner(nx, nx) = clm.A_cl;
    aug.A.bottomLeftCorner(nf, nx) = filter.B_r * clm.C;
    aug.A.bottomRightCorner(nf, nf) = filter.A_r;
    aug.E = Matrix::Zero(nx + nf, clm.E.cols());
    aug.E.topRows(nx) = clm.E;
    aug.D.resize(nx + nf, clm.W_noise.cols());
    aug.D << clm.W_noise, filter.B_r * clm.D;
    aug.C = Matrix::Zero(1, nx + nf);
    aug.C.rightCols(nf) = filter.C_r;
    return aug;
}

AugmentedSystem augmented(const SwitchedAffineSystem& system, const FilterBank& bank, int i, int j, int h) {
    return augmented(system, bank.filter(i, j), i, h);
}

Vector augmented_steady_state(const AugmentedSystem& aug, const Vector& reference) {
    if (!spectral_radius_stable(aug.A)) throw Unstable("augmented loop is not stable");
    return solve_shifted(aug.A, aug.E * reference);
}

}  // namespace modediag
