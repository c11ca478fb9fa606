#pragma once

#include <Eigen/Dense>
#include <vector>

namespace modediag {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Spectral radius at or above this value counts as not stable.
inline constexpr double kStabilityMargin = 1e-9;

/// Plant and controller matrices of one mode.
struct ModeMatrices {
    Matrix A, B, E, W, C, D;
    Matrix K;  ///< static output-feedback gain, n_u x n_y
};

struct Dimensions {
    int nx = 0, nu = 0, ny = 0, nd = 0, nw = 0;
};

/// Discrete-time switched affine plant
///   x+ = A x + B u + E d + W w,   y = C x + D w,   u = K y
/// with one set of matrices per mode. Mode indices are 1-based.
class SwitchedAffineSystem {
public:
    /// Validates dimensions and that every E is nonzero.
    explicit SwitchedAffineSystem(std::vector<ModeMatrices> modes);

    int n_modes() const noexcept { return static_cast<int>(modes_.size()); }
    const Dimensions& dims() const noexcept { return dims_; }
    const ModeMatrices& mode(int index) const;
    const std::vector<ModeMatrices>& modes() const noexcept { return modes_; }

    /// True when no mode has a control channel (B = 0 or K = 0 everywhere).
    bool autonomous() const;

    void check_index(int index) const;

private:
    std::vector<ModeMatrices> modes_;
    Dimensions dims_;
};

/// Status S_ih: controller of mode i driving plant mode h.
struct ClosedLoopMode {
    int controller = 0;
    int plant = 0;
    Matrix A_cl;     ///< A_h + B_h K_i C_h
    Matrix E;        ///< E_h
    Matrix W_noise;  ///< W_h + B_h K_i D_h
    Matrix C;        ///< C_h
    Matrix D;        ///< D_h
};

/// H(q)[x; d] + L0 y + G0 w = 0 with H(q) = H1 q + H0.
struct DaeMatrices {
    Matrix H1;  ///< (nx+ny) x (nx+nd)
    Matrix H0;  ///< (nx+ny) x (nx+nd)
    Matrix L0;  ///< (nx+ny) x ny
    Matrix G0;  ///< (nx+ny) x nw
};

ClosedLoopMode closed_loop(const SwitchedAffineSystem& system, int controller, int plant);

DaeMatrices dae_matrices(const ClosedLoopMode& clm);

double spectral_radius(const Matrix& M);

/// rho(M) <= 1 - kStabilityMargin. Throws DimensionError for non-square input.
bool spectral_radius_stable(const Matrix& M);

/// Solves (I - A) X = B. Throws NearSingular when I - A is numerically singular.
Matrix solve_shifted(const Matrix& A, const Matrix& B);

/// Steady plant state (I - A_cl)^{-1} E d for a constant reference.
Vector steady_state(const ClosedLoopMode& clm, const Vector& reference);

}  // namespace modediag
