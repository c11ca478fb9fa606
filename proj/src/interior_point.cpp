#include "modediag/interior_point.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace modediag {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Cone vectors are laid out as [nonnegative orthant | svec(block 1) | svec(block 2) | ...].
// svec stacks the lower triangle column by column with off-diagonals scaled by sqrt(2),
// so the Euclidean inner product equals the trace inner product.
struct Cones {
    int lp = 0;
    std::vector<int> order;
    std::vector<int> offset;
    int dim = 0;
    int degree = 0;
};

Matrix smat(const Vector& v, int offset, int k) {
    Matrix M(k, k);
    int idx = offset;
    for (int c = 0; c < k; ++c)
        for (int r = c; r < k; ++r) {
            const double val = (r == c) ? v(idx) : v(idx) / kSqrt2;
            M(r, c) = M(c, r) = val;
            ++idx;
        }
    return M;
}

void svec_into(const Matrix& M, Vector& v, int offset) {
    const auto k = static_cast<int>(M.rows());
    int idx = offset;
    for (int c = 0; c < k; ++c)
        for (int r = c; r < k; ++r) {
            v(idx++) = (r == c) ? M(r, c) : 0.5 * kSqrt2 * (M(r, c) + M(c, r));
        }
}

Vector identity(const Cones& K) {
    Vector e = Vector::Zero(K.dim);
    e.head(K.lp).setOnes();
    for (std::size_t b = 0; b < K.order.size(); ++b) svec_into(Matrix::Identity(K.order[b], K.order[b]), e, K.offset[b]);
    return e;
}

// Smallest "eigenvalue" of a cone vector; positive iff strictly interior.
double min_eig(const Cones& K, const Vector& u) {
    double m = kInf;
    if (K.lp > 0) m = u.head(K.lp).minCoeff();
    for (std::size_t b = 0; b < K.order.size(); ++b) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(smat(u, K.offset[b], K.order[b]), Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
}

Vector jordan(const Cones& K, const Vector& u, const Vector& v) {
    Vector out(K.dim);
    out.head(K.lp) = u.head(K.lp).cwiseProduct(v.head(K.lp));
    for (std::size_t b = 0; b < K.order.size(); ++b) {
        const Matrix U = smat(u, K.offset[b], K.order[b]);
        const Matrix V = smat(v, K.offset[b], K.order[b]);
        svec_into(0.5 * (U * V + V * U), out, K.offset[b]);
    }
    return out;
}

// Nesterov-Todd scaling W with W z = W^{-T} s = lambda.
// Orthant: W = diag(d), d = sqrt(s / z). PSD block: W(U) = R' U R.
struct Scaling {
    Vector d;
    std::vector<Matrix> R, Rinv;
    Vector lam_lp;
    std::vector<Vector> lam;
};

bool compute_scaling(const Cones& K, const Vector& s, const Vector& z, Scaling& W) {
    const auto sl = s.head(K.lp).array();
    const auto zl = z.head(K.lp).array();
    if ((sl <= 0.0).any() || (zl <= 0.0).any()) return false;
    W.d = (sl / zl).sqrt().matrix();
    W.lam_lp = (sl * zl).sqrt().matrix();
    W.R.clear();
    W.Rinv.clear();
    W.lam.clear();
    for (std::size_t b = 0; b < K.order.size(); ++b) {
        const int k = K.order[b];
        Eigen::LLT<Matrix> ls(smat(s, K.offset[b], k));
        Eigen::LLT<Matrix> lz(smat(z, K.offset[b], k));
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        const Matrix L1 = ls.matrixL();
        const Matrix L2 = lz.matrixL();
        Eigen::JacobiSVD<Matrix> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vector lam = svd.singularValues();
        if (!(lam.minCoeff() > 0.0)) return false;
        const Vector isq = lam.cwiseSqrt().cwiseInverse();
        W.R.push_back(L1 * svd.matrixV() * isq.asDiagonal());
        W.Rinv.push_back(isq.asDiagonal() * svd.matrixU().transpose() * L2.transpose());
        W.lam.push_back(lam);
    }
    return true;
}

enum class Op { W, Wt, Winv, WinvT };

Vector apply(const Cones& K, const Scaling& W, Op op, const Vector& u) {
    Vector out(K.dim);
    if (op == Op::W || op == Op::Wt) {
        out.head(K.lp) = W.d.cwiseProduct(u.head(K.lp));
    } else {
        out.head(K.lp) = u.head(K.lp).cwiseQuotient(W.d);
    }
    for (std::size_t b = 0; b < K.order.size(); ++b) {
        const Matrix U = smat(u, K.offset[b], K.order[b]);
        Matrix V;
        switch (op) {
            case Op::W: V = W.R[b].transpose() * U * W.R[b]; break;
            case Op::Wt: V = W.R[b] * U * W.R[b].transpose(); break;
            case Op::Winv: V = W.Rinv[b].transpose() * U * W.Rinv[b]; break;
            case Op::WinvT: V = W.Rinv[b] * U * W.Rinv[b].transpose(); break;
        }
        svec_into(V, out, K.offset[b]);
    }
    return out;
}

Vector lambda_vec(const Cones& K, const Scaling& W) {
    Vector out = Vector::Zero(K.dim);
    out.head(K.lp) = W.lam_lp;
    for (std::size_t b = 0; b < K.order.size(); ++b) svec_into(Matrix(W.lam[b].asDiagonal()), out, K.offset[b]);
    return out;
}

// Solves lambda o x = v.
Vector lambda_solve(const Cones& K, const Scaling& W, const Vector& v) {
    Vector out(K.dim);
    out.head(K.lp) = v.head(K.lp).cwiseQuotient(W.lam_lp);
    for (std::size_t b = 0; b < K.order.size(); ++b) {
        const int k = K.order[b];
        Matrix V = smat(v, K.offset[b], k);
        for (int c = 0; c < k; ++c)
            for (int r = 0; r < k; ++r) V(r, c) *= 2.0 / (W.lam[b](r) + W.lam[b](c));
        svec_into(V, out, K.offset[b]);
    }
    return out;
}

// Largest alpha with lambda + alpha * delta in the cone (delta in scaled coordinates).
double max_step(const Cones& K, const Scaling& W, const Vector& delta) {
    double alpha = kInf;
    for (int i = 0; i < K.lp; ++i)
        if (delta(i) < 0.0) alpha = std::min(alpha, -W.lam_lp(i) / delta(i));
    for (std::size_t b = 0; b < K.order.size(); ++b) {
        const Vector isq = W.lam[b].cwiseSqrt().cwiseInverse();
        const Matrix M = isq.asDiagonal() * smat(delta, K.offset[b], K.order[b]) * isq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
        const double e = es.eigenvalues().minCoeff();
        if (e < 0.0) alpha = std::min(alpha, -1.0 / e);
    }
    return alpha;
}

struct StandardForm {
    Matrix A;  // p x n
    Vector b;
    Matrix G;  // m x n
    Vector h;
    Vector c;
    Cones K;
    bool inconsistent_equalities = false;
};

StandardForm build_standard_form(const ConicProgram& prog) {
    StandardForm sf;
    const int n = prog.num_variables();
    sf.c = Vector::Zero(n);
    for (const auto& [i, v] : prog.objective().terms()) sf.c(i) = v;

    // Equalities, with redundant rows removed by a rank-revealing QR of A'.
    const auto& eqs = prog.equalities();
    Matrix A = Matrix::Zero(static_cast<Eigen::Index>(eqs.size()), n);
    Vector b(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t r = 0; r < eqs.size(); ++r) {
        for (const auto& [i, v] : eqs[r].expr.terms()) A(static_cast<Eigen::Index>(r), i) = v;
        b(static_cast<Eigen::Index>(r)) = -eqs[r].expr.constant();
    }
    if (A.rows() > 0) {
        // Row equilibration keeps the rank threshold meaningful.
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            const double nr = A.row(r).norm();
            if (nr > 0.0) {
                A.row(r) /= nr;
                b(r) /= nr;
            } else if (std::abs(b(r)) > 1e-12) {
                sf.inconsistent_equalities = true;
            }
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
        qr.setThreshold(1e-10);
        const auto rank = qr.rank();
        Matrix Ar(rank, n);
        Vector br(rank);
        for (Eigen::Index k = 0; k < rank; ++k) {
            const auto row = qr.colsPermutation().indices()(k);
            Ar.row(k) = A.row(row);
            br(k) = b(row);
        }
        if (rank > 0) {
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Ar);
            const Vector x0 = cod.solve(br);
            if ((A * x0 - b).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
                sf.inconsistent_equalities = true;
            }
        }
        sf.A = std::move(Ar);
        sf.b = std::move(br);
    } else {
        sf.A = Matrix::Zero(0, n);
        sf.b = Vector::Zero(0);
    }

    const auto& ineqs = prog.inequalities();
    sf.K.lp = static_cast<int>(ineqs.size());
    int dim = sf.K.lp;
    for (const auto& blk : prog.psd_blocks()) {
        sf.K.order.push_back(static_cast<int>(blk.size));
        sf.K.offset.push_back(dim);
        dim += static_cast<int>(blk.size * (blk.size + 1) / 2);
    }
    sf.K.dim = dim;
    sf.K.degree = sf.K.lp;
    for (int k : sf.K.order) sf.K.degree += k;

    sf.G = Matrix::Zero(dim, n);
    sf.h = Vector::Zero(dim);
    for (int r = 0; r < sf.K.lp; ++r) {
        const auto& e = ineqs[static_cast<std::size_t>(r)].expr;
        for (const auto& [i, v] : e.terms()) sf.G(r, i) = -v;
        sf.h(r) = e.constant();
    }
    for (std::size_t bidx = 0; bidx < prog.psd_blocks().size(); ++bidx) {
        const auto& blk = prog.psd_blocks()[bidx];
        int idx = sf.K.offset[bidx];
        for (Eigen::Index c = 0; c < blk.size; ++c)
            for (Eigen::Index r = c; r < blk.size; ++r) {
                const auto& e = blk.at(r, c);
                const double scale = (r == c) ? 1.0 : kSqrt2;
                for (const auto& [i, v] : e.terms()) sf.G(idx, i) = -scale * v;
                sf.h(idx) = scale * e.constant();
                ++idx;
            }
    }
    return sf;
}

// KKT system
//   [ 0  A'  G'    ] [dx]   [bx]
//   [ A  0   0     ] [dy] = [by]
//   [ G  0  -W'W   ] [dz]   [bz]
// solved in the scaled unknown w = W dz, which gives the symmetric indefinite matrix
//   [ 0  A'  Gs' ; A  0  0 ; Gs  0  -I ],  Gs = W^{-T} G,
// factored by LU with a small static regularization and refined against the unscaled system.
class KktSolver {
public:
    KktSolver(const StandardForm& sf, const Cones& K, const Scaling& W) : sf_(sf), K_(K), W_(W) {
        const auto n = sf.G.cols();
        const auto p = sf.A.rows();
        const auto m = sf.G.rows();
        Gs_.resize(m, n);
        for (Eigen::Index j = 0; j < n; ++j) Gs_.col(j) = apply(K, W, Op::WinvT, sf.G.col(j));
        M_ = Matrix::Zero(n + p + m, n + p + m);
        M_.block(0, n, n, p) = sf.A.transpose();
        M_.block(0, n + p, n, m) = Gs_.transpose();
        M_.block(n, 0, p, n) = sf.A;
        M_.block(n + p, 0, m, n) = Gs_;
        M_.bottomRightCorner(m, m) = -Matrix::Identity(m, m);
        const double delta = 1e-13 * std::max(1.0, M_.cwiseAbs().maxCoeff());
        Matrix Mreg = M_;
        Mreg.topLeftCorner(n, n).diagonal().array() += delta;
        Mreg.block(n, n, p, p).diagonal().array() -= delta;
        lu_.compute(Mreg);
    }

    // Returns dx, dy, dz and the scaled W dz.
    void solve(const Vector& bx, const Vector& by, const Vector& bz, Vector& dx, Vector& dy, Vector& dz,
               Vector& Wdz) const {
        const auto n = sf_.G.cols();
        const auto p = sf_.A.rows();
        const auto m = sf_.G.rows();
        Vector rhs(n + p + m);
        rhs << bx, by, apply(K_, W_, Op::WinvT, bz);
        Vector sol = lu_.solve(rhs);
        for (int it = 0; it < 3; ++it) {
            const Vector res = rhs - M_ * sol;
            if (res.norm() <= 1e-15 * std::max(1.0, rhs.norm())) break;
            sol += lu_.solve(res);
        }
        dx = sol.head(n);
        dy = sol.segment(n, p);
        Wdz = sol.tail(m);
        dz = apply(K_, W_, Op::Winv, Wdz);
    }

private:
    const StandardForm& sf_;
    const Cones& K_;
    const Scaling& W_;
    Matrix Gs_;
    Matrix M_;
    Eigen::PartialPivLU<Matrix> lu_;
};

}  // namespace

SolveReport InteriorPointSolver::solve_raw(const ConicProgram& program, double tol) {
    SolveReport rep;
    rep.tolerance = tol;
    const StandardForm sf = build_standard_form(program);
    const Cones& K = sf.K;
    const auto n = sf.G.cols();

    if (sf.inconsistent_equalities) {
        rep.status = SolveStatus::Infeasible;
        rep.message = "inconsistent equality constraints";
        return rep;
    }

    if (K.dim == 0) {
        // Only equalities: the objective must be constant on the affine set.
        Vector x = Vector::Zero(n);
        if (sf.A.rows() > 0) x = Eigen::CompleteOrthogonalDecomposition<Matrix>(sf.A).solve(sf.b);
        Vector proj = sf.c;
        if (sf.A.rows() > 0) {
            const Vector y = Eigen::CompleteOrthogonalDecomposition<Matrix>(sf.A.transpose()).solve(sf.c);
            proj = sf.c - sf.A.transpose() * y;
        }
        rep.x = x;
        rep.status = proj.norm() <= 1e-12 * std::max(1.0, sf.c.norm()) ? SolveStatus::Optimal : SolveStatus::Unbounded;
        return rep;
    }

    const double feastol = tol * options_.tightening;
    const double abstol = tol * options_.tightening;
    const double reltol = tol * options_.tightening;
    const double resx0 = std::max(1.0, sf.c.norm());
    const double resy0 = std::max(1.0, sf.b.norm());
    const double resz0 = std::max(1.0, sf.h.norm());
    const Vector e = identity(K);

    // Starting point from two least-squares problems with W = I.
    Scaling Wid;
    Wid.d = Vector::Ones(K.lp);
    Wid.lam_lp = Vector::Ones(K.lp);
    for (int k : K.order) {
        Wid.R.push_back(Matrix::Identity(k, k));
        Wid.Rinv.push_back(Matrix::Identity(k, k));
        Wid.lam.push_back(Vector::Ones(k));
    }
    Vector x, y, z, s, tmp1, tmp2;
    {
        KktSolver kkt(sf, K, Wid);
        Vector zs;
        kkt.solve(Vector::Zero(n), sf.b, sf.h, x, tmp1, zs, tmp2);
        s = -zs;
        kkt.solve(-sf.c, Vector::Zero(sf.A.rows()), Vector::Zero(K.dim), tmp1, y, z, tmp2);
    }
    {
        const double ms = min_eig(K, s);
        if (ms <= 1e-8 * std::max(1.0, s.norm())) s += (1.0 - ms) * e;
        const double mz = min_eig(K, z);
        if (mz <= 1e-8 * std::max(1.0, z.norm())) z += (1.0 - mz) * e;
    }
    double tau = 1.0, kappa = 1.0;

    const double step = options_.step_fraction;
    Scaling W;
    for (int iter = 0; iter <= options_.max_iterations; ++iter) {
        rep.iterations = iter;
        const Vector r1 = sf.A.transpose() * y + sf.G.transpose() * z + sf.c * tau;
        const Vector r2 = sf.A * x - sf.b * tau;
        const Vector r3 = sf.G * x + s - sf.h * tau;
        const double cx = sf.c.dot(x), by = sf.b.dot(y), hz = sf.h.dot(z);
        const double r4 = kappa + cx + by + hz;

        const double pres = std::max(r2.norm() / resy0, r3.norm() / resz0) / tau;
        const double dres = r1.norm() / resx0 / tau;
        const double pcost = cx / tau;
        const double dcost = -(by + hz) / tau;
        const double gap = s.dot(z) / (tau * tau);
        double relgap = kInf;
        if (pcost < 0.0) relgap = gap / -pcost;
        else if (dcost > 0.0) relgap = gap / dcost;

        if (pres <= feastol && dres <= feastol && (gap <= abstol || relgap <= reltol)) {
            rep.status = SolveStatus::Optimal;
            rep.x = x / tau;
            rep.objective = pcost + program.objective().constant();
            rep.message = "converged";
            return rep;
        }
        if (kappa > tau && by + hz < 0.0) {
            const double pinf = (sf.A.transpose() * y + sf.G.transpose() * z).norm() / resx0 / -(by + hz);
            if (pinf <= feastol) {
                rep.status = SolveStatus::Infeasible;
                rep.message = "primal infeasibility certificate";
                return rep;
            }
        }
        if (kappa > tau && cx < 0.0) {
            const double dinf =
                std::max((sf.A * x).norm() / resy0, (sf.G * x + s).norm() / resz0) / -cx;
            if (dinf <= feastol) {
                rep.status = SolveStatus::Unbounded;
                rep.message = "dual infeasibility certificate";
                return rep;
            }
        }
        if (iter == options_.max_iterations) break;

        if (!compute_scaling(K, s, z, W)) {
            rep.message = "lost interiority";
            break;
        }
        const Vector lam = lambda_vec(K, W);
        const double mu = (s.dot(z) + tau * kappa) / (K.degree + 1);

        KktSolver kkt(sf, K, W);
        Vector x1, y1, z1, Wz1;
        kkt.solve(-sf.c, sf.b, sf.h, x1, y1, z1, Wz1);
        const double denom = sf.c.dot(x1) + sf.b.dot(y1) + sf.h.dot(z1) - kappa / tau;

        // One Newton solve for a given complementarity target and residual weight.
        struct Direction {
            Vector dx, dy, dz, Wdz, sds;  // sds = W^{-T} ds
            double dtau = 0.0, dkappa = 0.0;
        };
        auto newton = [&](const Vector& rhs_c, double rhs_t, double weight) {
            Direction d;
            const Vector lr = lambda_solve(K, W, rhs_c);
            const Vector bz = -weight * r3 - apply(K, W, Op::Wt, lr);
            Vector x2, y2, z2, Wz2;
            kkt.solve(-weight * r1, -weight * r2, bz, x2, y2, z2, Wz2);
            d.dtau = (-weight * r4 - rhs_t / tau - sf.c.dot(x2) - sf.b.dot(y2) - sf.h.dot(z2)) / denom;
            d.dx = x2 + d.dtau * x1;
            d.dy = y2 + d.dtau * y1;
            d.dz = z2 + d.dtau * z1;
            d.Wdz = Wz2 + d.dtau * Wz1;
            d.sds = lr - d.Wdz;
            d.dkappa = (rhs_t - kappa * d.dtau) / tau;
            return d;
        };
        auto step_length = [&](const Direction& d) {
            double a = std::min(max_step(K, W, d.sds), max_step(K, W, d.Wdz));
            if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        const Vector lam_sq = jordan(K, lam, lam);
        const Direction aff = newton(-lam_sq, -tau * kappa, 1.0);
        const double a_aff = std::min(1.0, step_length(aff));
        const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);

        const Vector rhs_c = -lam_sq - jordan(K, aff.sds, aff.Wdz) + sigma * mu * e;
        const double rhs_t = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        const Direction dir = newton(rhs_c, rhs_t, 1.0 - sigma);
        const double alpha = std::min(1.0, step * step_length(dir));
        if (!std::isfinite(alpha) || alpha < 1e-12 || !dir.dx.allFinite()) {
            rep.message = "step length collapsed";
            break;
        }

        x += alpha * dir.dx;
        y += alpha * dir.dy;
        z += alpha * dir.dz;
        s += alpha * apply(K, W, Op::Wt, dir.sds);
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
    }

    rep.status = SolveStatus::NumericalFailure;
    if (rep.message.empty()) rep.message = "iteration limit reached";
    rep.x = x / tau;
    return rep;
}

}  // namespace modediag
