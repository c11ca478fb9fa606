#include "modediag/system_model.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "modediag/errors.hpp"

namespace modediag {

namespace {

void expect_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
    if (M.rows() != rows || M.cols() != cols) {
        throw DimensionError(what + " is " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()) +
                             ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

}  // namespace

SwitchedAffineSystem::SwitchedAffineSystem(std::vector<ModeMatrices> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) throw DimensionError("system needs at least one mode");
    const auto& m0 = modes_.front();
    dims_.nx = static_cast<int>(m0.A.rows());
    dims_.nu = static_cast<int>(m0.B.cols());
    dims_.ny = static_cast<int>(m0.C.rows());
    dims_.nd = static_cast<int>(m0.E.cols());
    dims_.nw = static_cast<int>(m0.W.cols());
    if (dims_.nx < 1 || dims_.ny < 1) throw DimensionError("n_x and n_y must be positive");
    if (dims_.nd < 1) throw DimensionError("n_d must be at least 1");

    for (std::size_t k = 0; k < modes_.size(); ++k) {
        const auto& m = modes_[k];
        const std::string tag = "mode " + std::to_string(k + 1) + ": ";
        expect_shape(m.A, dims_.nx, dims_.nx, tag + "A");
        expect_shape(m.B, dims_.nx, dims_.nu, tag + "B");
        expect_shape(m.E, dims_.nx, dims_.nd, tag + "E");
        expect_shape(m.W, dims_.nx, dims_.nw, tag + "W");
        expect_shape(m.C, dims_.ny, dims_.nx, tag + "C");
        expect_shape(m.D, dims_.ny, dims_.nw, tag + "D");
        expect_shape(m.K, dims_.nu, dims_.ny, tag + "K");
        if (m.E.isZero(0.0)) throw DimensionError(tag + "E must be nonzero");
    }
}

const ModeMatrices& SwitchedAffineSystem::mode(int index) const {
    check_index(index);
    return modes_[static_cast<std::size_t>(index - 1)];
}

void SwitchedAffineSystem::check_index(int index) const {
    if (index < 1 || index > n_modes()) {
        throw IndexError("mode index " + std::to_string(index) + " outside 1.." + std::to_string(n_modes()));
    }
}

bool SwitchedAffineSystem::autonomous() const {
    for (const auto& m : modes_) {
        if (m.B.size() > 0 && m.K.size() > 0 && !(m.B * m.K).isZero(0.0)) return false;
    }
    return true;
}

ClosedLoopMode closed_loop(const SwitchedAffineSystem& system, int controller, int plant) {
    const auto& ctrl = system.mode(controller);
    const auto& pl = system.mode(plant);
    ClosedLoopMode clm;
    clm.controller = controller;
    clm.plant = plant;
    clm.A_cl = pl.A + pl.B * ctrl.K * pl.C;
    clm.E = pl.E;
    clm.W_noise = pl.W + pl.B * ctrl.K * pl.D;
    clm.C = pl.C;
    clm.D = pl.D;
    return clm;
}

DaeMatrices dae_matrices(const ClosedLoopMode& clm) {
    const auto nx = clm.A_cl.rows();
    const auto ny = clm.C.rows();
    const auto nd = clm.E.cols();
    const auto nw = clm.W_noise.cols();
    if (clm.A_cl.cols() != nx || clm.E.rows() != nx || clm.C.cols() != nx || clm.D.rows() != ny ||
        clm.W_noise.rows() != nx || clm.D.cols() != nw) {
        throw DimensionError("inconsistent closed-loop matrices");
    }

    DaeMatrices dae;
    dae.H1 = Matrix::Zero(nx + ny, nx + nd);
    dae.H1.topLeftCorner(nx, nx) = -Matrix::Identity(nx, nx);

    dae.H0 = Matrix::Zero(nx + ny, nx + nd);
    dae.H0.topLeftCorner(nx, nx) = clm.A_cl;
    dae.H0.topRightCorner(nx, nd) = clm.E;
    dae.H0.bottomLeftCorner(ny, nx) = clm.C;

    dae.L0 = Matrix::Zero(nx + ny, ny);
    dae.L0.bottomRows(ny) = -Matrix::Identity(ny, ny);

    dae.G0.resize(nx + ny, nw);
    dae.G0.topRows(nx) = clm.W_noise;
    dae.G0.bottomRows(ny) = clm.D;
    return dae;
}

double spectral_radius(const Matrix& M) {
    if (M.rows() != M.cols()) throw DimensionError("spectral radius of a non-square matrix");
    if (M.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool spectral_radius_stable(const Matrix& M) {
    return spectral_radius(M) <= 1.0 - kStabilityMargin;
}

Matrix solve_shifted(const Matrix& A, const Matrix& B) {
    const Matrix shifted = Matrix::Identity(A.rows(), A.cols()) - A;
    Eigen::FullPivLU<Matrix> lu(shifted);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw NearSingular("I - A is numerically singular");
    const Matrix X = lu.solve(B);
    const double scale = std::max(1.0, B.norm());
    if (!X.allFinite() || (shifted * X - B).norm() > 1e-9 * scale * std::max(1.0, X.norm())) {
        throw NearSingular("I - A solve is inaccurate");
    }
    return X;
}

Vector steady_state(const ClosedLoopMode& clm, const Vector& reference) {
    if (reference.size() != clm.E.cols()) throw DimensionError("reference has wrong dimension");
    if (!spectral_radius_stable(clm.A_cl)) {
        throw Unstable("closed loop (" + std::to_string(clm.controller) + "," + std::to_string(clm.plant) +
                       ") is not stable; no steady state");
    }
    return solve_shifted(clm.A_cl, clm.E * reference);
}

}  // namespace modediag
