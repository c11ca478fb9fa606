#include "modediag/filter_synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "modediag/errors.hpp"
#include "modediag/filter_runtime.hpp"
#include "modediag/h2_norm.hpp"
#include "modediag/polynomial.hpp"

namespace modediag {

namespace {

double min_eigenvalue(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

ExprMatrix expr_block_diag(const ExprMatrix& a, const ExprMatrix& b) {
    return ExprMatrix::blocks({{a, ExprMatrix::zeros(a.rows(), b.cols())},
                               {ExprMatrix::zeros(b.rows(), a.cols()), b}});
}

/// Flattened [N_0 ... N_dN] from the row-per-degree storage.
Matrix flatten_rows(const Matrix& N) {
    Matrix out(1, N.size());
    for (Eigen::Index m = 0; m < N.rows(); ++m) out.middleCols(m * N.cols(), N.cols()) = N.row(m);
    return out;
}

std::string pattern_string(const std::map<int, int>& pattern) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [h, s] : pattern) {
        os << (first ? "" : ", ") << h << ":" << (s > 0 ? "+" : "-");
        first = false;
    }
    os << "}";
    return os.str();
}

}  // namespace

void SynthesisConfig::validate() const {
    if (degree < 0) throw ConfigError("synthesis.degree", "must be nonnegative");
    if (static_cast<int>(roots.size()) != degree + 1)
        throw ConfigError("synthesis.roots", "needs degree + 1 entries");
    for (std::size_t a = 0; a < roots.size(); ++a) {
        if (!(std::abs(roots[a]) < 1.0))
            throw ConfigError("synthesis.roots[" + std::to_string(a) + "]", "must lie in (-1, 1)");
        for (std::size_t b = 0; b < a; ++b)
            if (std::abs(roots[a] - roots[b]) < 1e-9)
                throw ConfigError("synthesis.roots[" + std::to_string(a) + "]", "roots must be distinct");
    }
    if (!(margin > 0.0)) throw ConfigError("synthesis.margin", "must be positive");
    if (!(gamma > 0.0)) throw ConfigError("synthesis.gamma", "must be positive");
    if (!std::isfinite(alpha)) throw ConfigError("synthesis.alpha", "must be finite");
    if (alpha_grid.empty() != gamma_grid.empty())
        throw ConfigError("synthesis.grid", "alpha and gamma grids must both be given");
    for (double g : gamma_grid)
        if (!(g > 0.0)) throw ConfigError("synthesis.grid.gamma", "entries must be positive");
    if (!(tol > 0.0)) throw ConfigError("synthesis.tol", "must be positive");
    if (reference_direction && reference_direction->norm() == 0.0)
        throw ConfigError("synthesis.reference_direction", "must be nonzero");
}

Vector SynthesisConfig::denominator() const { return monic_from_roots(roots); }

double SynthesisConfig::dc_value() const { return poly_value(denominator(), 1.0); }

std::vector<double> default_grid() { return {0.1, 0.3, 1.0, 3.0, 10.0}; }

Matrix build_script_L(const ClosedLoopMode& clm, const SynthesisConfig& cfg) {
    const auto nx = clm.A_cl.rows();
    const auto ny = clm.C.rows();
    const auto nd = clm.E.cols();
    Matrix v = clm.C * solve_shifted(clm.A_cl, clm.E);
    if (cfg.reference_direction) {
        if (cfg.reference_direction->size() != nd) throw DimensionError("reference direction has wrong size");
        v = v * (*cfg.reference_direction / cfg.reference_direction->norm());
    } else if (nd != 1) {
        throw DimensionError("a reference direction is required when n_d > 1");
    }
    Matrix L = Matrix::Zero((cfg.degree + 1) * (nx + ny), v.cols());
    for (int m = 0; m <= cfg.degree; ++m) L.block(m * (nx + ny) + nx, 0, ny, v.cols()) = -v;
    return L;
}

Matrix stacked_H(const ClosedLoopMode& clm, int degree) {
    const DaeMatrices dae = dae_matrices(clm);
    return stack_toeplitz({dae.H0, dae.H1}, degree);
}

int numerical_rank(const Matrix& M) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    return static_cast<int>((s.array() > 1e-9 * s(0)).count());
}

bool FeasibilityReport::passed() const {
    if (!degree_ok || !filter_stable) return false;
    return std::all_of(unmatched.begin(), unmatched.end(),
                       [](const UnmatchedReport& u) { return !u.stable || u.rank_ok; });
}

std::vector<int> FeasibilityReport::enforced() const {
    std::vector<int> out;
    for (const auto& u : unmatched)
        if (u.stable) out.push_back(u.plant);
    return out;
}

std::string FeasibilityReport::summary() const {
    std::ostringstream os;
    os << "pair (" << controller << "," << target << "): degree " << (degree_ok ? "ok" : "FAIL") << " (rows "
       << rows << ", rank " << rank_H << "), filter " << (filter_stable ? "stable" : "UNSTABLE");
    for (const auto& u : unmatched) {
        os << "; h=" << u.plant << " ";
        if (!u.stable)
            os << "unstable (excluded)";
        else
            os << "rank " << (u.rank_ok ? "ok" : "FAIL");
    }
    return os.str();
}

FeasibilityReport check_feasibility(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int i, int j) {
    cfg.validate();
    system.check_index(i);
    system.check_index(j);
    FeasibilityReport rep;
    rep.controller = i;
    rep.target = j;
    const ClosedLoopMode matched = closed_loop(system, i, j);
    const Matrix H = stacked_H(matched, cfg.degree);
    rep.rows = static_cast<int>(H.rows());
    rep.rank_H = numerical_rank(H);
    rep.degree_ok = rep.rows > rep.rank_H;
    rep.filter_stable = spectral_radius_stable(companion_matrix(cfg.denominator()));
    rep.matched_stable = spectral_radius_stable(matched.A_cl);
    for (int h = 1; h <= system.n_modes(); ++h) {
        if (h == j) continue;
        UnmatchedReport u;
        u.plant = h;
        const ClosedLoopMode clm = closed_loop(system, i, h);
        u.stable = spectral_radius_stable(clm.A_cl);
        if (u.stable) {
            Matrix aug(H.rows(), H.cols() + 1);
            aug << H, build_script_L(clm, cfg);
            u.rank_augmented = numerical_rank(aug);
            u.rank_ok = u.rank_augmented > rep.rank_H;
        }
        rep.unmatched.push_back(u);
    }
    return rep;
}

Matrix AssembledProgram::extract_N(const Vector& x) const {
    Matrix N(static_cast<Eigen::Index>(N_vars.size()), static_cast<Eigen::Index>(N_vars.front().size()));
    for (Eigen::Index m = 0; m < N.rows(); ++m)
        for (Eigen::Index c = 0; c < N.cols(); ++c)
            N(m, c) = x(N_vars[static_cast<std::size_t>(m)][static_cast<std::size_t>(c)]);
    return N;
}

std::vector<std::map<int, int>> sign_patterns(const std::vector<int>& enforced) {
    if (enforced.empty()) return {{}};
    const std::size_t free_count = enforced.size() - 1;
    std::vector<std::map<int, int>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << free_count); ++mask) {
        std::map<int, int> p;
        p[enforced.front()] = 1;
        for (std::size_t k = 0; k < free_count; ++k) p[enforced[k + 1]] = (mask >> k) & 1U ? -1 : 1;
        out.push_back(std::move(p));
    }
    return out;
}

AssembledProgram assemble_program(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int i, int j,
                                  const std::map<int, int>& sign_pattern, double alpha, double gamma) {
    cfg.validate();
    system.check_index(i);
    system.check_index(j);
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
    const auto& dm = system.dims();
    const int nf = cfg.degree + 1;
    const int width = dm.nx + dm.ny;

    AssembledProgram ap;
    ap.controller = i;
    ap.target = j;
    ap.signs = sign_pattern;
    ConicProgram& prog = ap.program;

    for (int h = 1; h <= system.n_modes(); ++h)
        if (h != j && spectral_radius_stable(closed_loop(system, i, h).A_cl)) ap.enforced.push_back(h);
    ap.no_stable_unmatched = ap.enforced.empty();
    for (int h : ap.enforced)
        if (!sign_pattern.count(h)) throw DomainError("sign pattern misses plant mode " + std::to_string(h));

    // Numerator coefficients, N_m as row m.
    ExprMatrix N(nf, width);
    ap.N_vars.assign(static_cast<std::size_t>(nf), std::vector<int>(static_cast<std::size_t>(width)));
    for (int m = 0; m < nf; ++m)
        for (int c = 0; c < width; ++c) {
            const int v = prog.add_variable("N" + std::to_string(m) + "_" + std::to_string(c));
            ap.N_vars[static_cast<std::size_t>(m)][static_cast<std::size_t>(c)] = v;
            N(m, c) = prog.var(v);
        }
    ExprMatrix Nbar(1, nf * width);
    for (int m = 0; m < nf; ++m)
        for (int c = 0; c < width; ++c) Nbar(0, m * width + c) = N(m, c);

    const ClosedLoopMode matched = closed_loop(system, i, j);
    const DaeMatrices dae = dae_matrices(matched);
    const ExprMatrix decoupling = Nbar * stacked_H(matched, cfg.degree);
    for (Eigen::Index c = 0; c < decoupling.cols(); ++c)
        prog.add_equality(decoupling(0, c), "decoupling[" + std::to_string(c) + "]");

    const double a1 = cfg.dc_value();
    for (int h : ap.enforced) {
        const ExprMatrix gain = Nbar * build_script_L(closed_loop(system, i, h), cfg);
        prog.add_inequality((sign_pattern.at(h) / a1) * gain(0, 0) - 1.0, "gain h=" + std::to_string(h));
    }

    const Matrix A_r = companion_matrix(cfg.denominator());
    Matrix C_r = Matrix::Zero(1, nf);
    C_r(0, nf - 1) = 1.0;
    const ExprMatrix B_r = N.block(0, dm.nx, nf, dm.ny) * Matrix(-Matrix::Identity(dm.ny, dm.ny));
    const double theta = cfg.margin;
    LinExpr objective;

    // Matched variance bound.
    {
        const int eta = prog.add_variable("eta" + std::to_string(j));
        ap.eta_vars[j] = eta;
        objective += prog.var(eta);
        ExprMatrix P = prog.add_symmetric("P", nf);
        ap.P_matched = P;
        const ExprMatrix Bn = -(N * dae.G0);
        const ExprMatrix AP = A_r * P;
        const auto nw = Bn.cols();
        ExprMatrix lmi = ExprMatrix::blocks({{P, AP, Bn},
                                             {AP.transpose(), P, ExprMatrix::zeros(nf, nw)},
                                             {Bn.transpose(), ExprMatrix::zeros(nw, nf), ExprMatrix::identity(nw)}});
        prog.add_psd(lmi - ExprMatrix::identity(lmi.rows(), theta), "matched lyapunov");
        ExprMatrix etab(1, 1);
        etab(0, 0) = prog.var(eta);
        const ExprMatrix CP = C_r * P;
        ExprMatrix var = ExprMatrix::blocks({{etab, CP}, {CP.transpose(), P}});
        prog.add_psd(var - ExprMatrix::identity(var.rows(), theta), "matched variance");
    }

    for (int h : ap.enforced) {
        const std::string tag = std::to_string(h);
        const ClosedLoopMode clm = closed_loop(system, i, h);
        const int nz = dm.nx + nf;
        const auto nw = clm.W_noise.cols();
        const int eta = prog.add_variable("eta" + tag);
        ap.eta_vars[h] = eta;
        objective += prog.var(eta);
        ExprMatrix P = prog.add_symmetric("P" + tag, nz);
        ap.P_unmatched[h] = P;
        const ExprMatrix G = expr_block_diag(prog.add_matrix("G1_" + tag, nz, nz), prog.add_matrix("G2_" + tag, nw, nw));

        Matrix Ahat = Matrix::Zero(nz, nz + nw);
        Ahat.topLeftCorner(dm.nx, dm.nx) = clm.A_cl;
        Ahat.block(dm.nx, dm.nx, nf, nf) = A_r;
        Ahat.topRightCorner(dm.nx, nw) = clm.W_noise;
        Matrix Dhat = Matrix::Zero(dm.ny, nz + nw);
        Dhat.leftCols(dm.nx) = clm.C;
        Dhat.rightCols(nw) = clm.D;
        const ExprMatrix Bhat = ExprMatrix::blocks({{ExprMatrix::zeros(dm.nx, dm.ny)}, {-B_r}});

        const ExprMatrix AG = Ahat * G;
        const ExprMatrix DG = Dhat * G;
        const ExprMatrix Pi = expr_block_diag(P, ExprMatrix::identity(nw));
        const ExprMatrix Xi = alpha * (G + G.transpose()) - (alpha * alpha) * Pi;
        const auto nb = nz + nw;
        const auto Z = [](Eigen::Index r, Eigen::Index c) { return ExprMatrix::zeros(r, c); };
        ExprMatrix lmi = ExprMatrix::blocks({
            {P, AG, Bhat, Z(nz, dm.ny)},
            {AG.transpose(), Xi, Z(nb, dm.ny), DG.transpose()},
            {Bhat.transpose(), Z(dm.ny, nb), ExprMatrix::identity(dm.ny, 1.0 / gamma), Z(dm.ny, dm.ny)},
            {Z(dm.ny, nz), DG, Z(dm.ny, dm.ny), ExprMatrix::identity(dm.ny, gamma)},
        });
        prog.add_psd(lmi - ExprMatrix::identity(lmi.rows(), theta), "slack lyapunov h=" + tag);

        Matrix Cz = Matrix::Zero(1, nz);
        Cz.rightCols(nf) = C_r;
        ExprMatrix etab(1, 1);
        etab(0, 0) = prog.var(eta);
        const ExprMatrix CP = Cz * P;
        ExprMatrix var = ExprMatrix::blocks({{etab, CP}, {CP.transpose(), P}});
        prog.add_psd(var - ExprMatrix::identity(var.rows(), theta), "variance h=" + tag);
    }
    prog.set_objective(objective);
    return ap;
}

FilterCertificates certify(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, const ResidualFilter& f,
                           const std::map<int, Matrix>& P) {
    FilterCertificates cert;
    const int i = f.controller;
    const int j = f.target;
    const ClosedLoopMode matched = closed_loop(system, i, j);
    const DaeMatrices dae = dae_matrices(matched);

    PolyMatrix Npoly;
    for (Eigen::Index m = 0; m < f.N.rows(); ++m) Npoly.push_back(f.N.row(m));
    const PolyMatrix NH = poly_multiply(Npoly, {dae.H0, dae.H1});
    std::mt19937_64 rng(20240611ULL + static_cast<unsigned>(31 * i + j));
    std::uniform_real_distribution<double> uq(-2.0, 2.0);
    for (int s = 0; s < 20; ++s)
        cert.decoupling = std::max(cert.decoupling, poly_evaluate(NH, uq(rng)).cwiseAbs().maxCoeff());
    cert.stacked_decoupling = (flatten_rows(f.N) * stacked_H(matched, cfg.degree)).cwiseAbs().maxCoeff();

    const double a1 = poly_value(f.denominator, 1.0);
    for (const auto& [h, s] : f.signs)
        cert.steady_gain[h] = s / a1 * (flatten_rows(f.N) * build_script_L(closed_loop(system, i, h), cfg))(0, 0);

    const Matrix Bn = -f.N * dae.G0;
    cert.gramian_h2sq[j] = std::pow(h2_norm_oracle(f.A_r, Bn, f.C_r), 2);
    if (auto it = P.find(j); it != P.end()) {
        const Matrix& Pm = it->second;
        const auto nf = Pm.rows();
        const auto nw = Bn.cols();
        Matrix blk = Matrix::Zero(2 * nf + nw, 2 * nf + nw);
        blk << Pm, f.A_r * Pm, Bn, (f.A_r * Pm).transpose(), Pm, Matrix::Zero(nf, nw), Bn.transpose(),
            Matrix::Zero(nw, nf), Matrix::Identity(nw, nw);
        cert.matched_min_eig = min_eigenvalue(blk);
    }
    for (const auto& [h, s] : f.signs) {
        (void)s;
        const AugmentedSystem aug = augmented(system, f, i, h);
        cert.gramian_h2sq[h] = std::pow(h2_norm_oracle(aug.A, aug.D, aug.C), 2);
        auto it = P.find(h);
        if (it == P.end()) continue;
        const Matrix& Ph = it->second;
        const auto nz = Ph.rows();
        const auto nw = aug.D.cols();
        Matrix blk(2 * nz + nw, 2 * nz + nw);
        blk << Ph, aug.A * Ph, aug.D, (aug.A * Ph).transpose(), Ph, Matrix::Zero(nz, nw), aug.D.transpose(),
            Matrix::Zero(nw, nz), Matrix::Identity(nw, nw);
        cert.nonlinear_min_eig[h] = min_eigenvalue(blk);
    }
    return cert;
}

ResidualFilter synthesize_pair(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int i, int j) {
    const FeasibilityReport feas = check_feasibility(system, cfg, i, j);
    if (!feas.passed()) throw SynthesisInfeasible("infeasible by rank/degree test: " + feas.summary());
    const std::vector<int> enforced = feas.enforced();

    std::vector<std::pair<double, double>> grid;
    if (cfg.alpha_grid.empty() || enforced.empty()) {
        grid.emplace_back(cfg.alpha, cfg.gamma);
    } else {
        for (double a : cfg.alpha_grid)
            for (double g : cfg.gamma_grid) grid.emplace_back(a, g);
    }

    struct Candidate {
        double objective;
        ResidualFilter filter;
        std::map<int, Matrix> P;
    };
    std::vector<Candidate> candidates;
    std::vector<std::string> failures;
    for (const auto& [alpha, gamma] : grid) {
        for (const auto& pattern : sign_patterns(enforced)) {
            const AssembledProgram ap = assemble_program(system, cfg, i, j, pattern, alpha, gamma);
            const SolveReport rep = solve(ap.program, cfg.tol);
            std::ostringstream where;
            where << "pair (" << i << "," << j << ") signs " << pattern_string(pattern) << " alpha " << alpha
                  << " gamma " << gamma;
            if (rep.status == SolveStatus::NumericalFailure) {
                failures.push_back(where.str() + ": " + rep.message);
                continue;
            }
            if (!rep.optimal()) continue;

            ResidualFilter f;
            f.controller = i;
            f.target = j;
            f.N = ap.extract_N(rep.x);
            f.denominator = cfg.denominator();
            f.roots = cfg.roots;
            const Realization real = realize(f.N, f.denominator, system.dims().ny);
            f.A_r = real.A_r;
            f.B_r = real.B_r;
            f.C_r = real.C_r;
            for (const auto& [h, v] : ap.eta_vars) f.eta[h] = rep.x(v);
            f.signs = pattern;
            f.alpha = alpha;
            f.gamma = gamma;
            f.no_stable_unmatched = ap.no_stable_unmatched;
            std::map<int, Matrix> P;
            P[j] = ap.P_matched.evaluate(rep.x);
            for (const auto& [h, Pe] : ap.P_unmatched) P[h] = Pe.evaluate(rep.x);
            candidates.push_back({rep.objective, std::move(f), std::move(P)});
        }
    }
    if (candidates.empty()) {
        if (!failures.empty()) throw NumericalFailure(failures.front());
        std::ostringstream os;
        os << "pair (" << i << "," << j << "): no sign pattern or (alpha, gamma) point is feasible";
        throw SynthesisInfeasible(os.str());
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.objective < b.objective; });
    std::string last_reason;
    for (auto& c : candidates) {
        c.filter.certificates = certify(system, cfg, c.filter, c.P);
        if (c.filter.certificates.passed(c.filter.eta, cfg.margin, &last_reason)) {
            c.filter.notes = failures;
            return c.filter;
        }
    }
    std::ostringstream os;
    os << "pair (" << i << "," << j << "): no solution passed certification (" << last_reason << ")";
    throw NumericalFailure(os.str());
}

FilterBank synthesize_bank(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int jobs) {
    cfg.validate();
    const int n = system.n_modes();
    const bool autonomous = system.autonomous();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i <= (autonomous ? 1 : n); ++i)
        for (int j = 1; j <= n; ++j) pairs.emplace_back(i, j);

    std::vector<ResidualFilter> filters(pairs.size());
    std::vector<std::string> errors(pairs.size());
    std::vector<int> kinds(pairs.size(), 0);  // 0 ok, 1 infeasible, 2 numerical
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < pairs.size(); k = next++) {
            try {
                filters[k] = synthesize_pair(system, cfg, pairs[k].first, pairs[k].second);
            } catch (const NumericalFailure& e) {
                kinds[k] = 2;
                errors[k] = e.what();
            } catch (const Error& e) {
                kinds[k] = 1;
                errors[k] = e.what();
            }
        }
    };
    unsigned threads = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(pairs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream os;
    int worst = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k)
        if (kinds[k]) {
            os << errors[k] << "\n";
            worst = worst == 1 ? 1 : kinds[k];
        }
    if (worst == 1) throw SynthesisInfeasible("bank synthesis failed:\n" + os.str());
    if (worst == 2) throw NumericalFailure("bank synthesis failed:\n" + os.str());
    return FilterBank(n, autonomous, std::move(filters));
}

}  // namespace modediag
