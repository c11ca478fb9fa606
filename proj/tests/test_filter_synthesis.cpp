#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "modediag/errors.hpp"
#include "modediag/filter_runtime.hpp"
#include "modediag/filter_synthesis.hpp"
#include "modediag/h2_norm.hpp"
#include "modediag/polynomial.hpp"

using namespace modediag;
using fixtures::mat;

namespace {

SwitchedAffineSystem scalar_system(double a) {
    ModeMatrices m{mat({{a}}), mat({{0.0}}), mat({{1.0}}), mat({{0.0}}), mat({{1.0}}), mat({{0.1}}), mat({{0.0}})};
    return SwitchedAffineSystem({m});
}

SwitchedAffineSystem with_modes(std::vector<ModeMatrices> modes) { return SwitchedAffineSystem(std::move(modes)); }

Matrix simulate_residuals(const AugmentedSystem& aug, const Vector& z0, const Vector& d, int steps) {
    Matrix r(steps, 1);
    Vector z = z0;
    for (int k = 0; k < steps; ++k) {
        r(k, 0) = (aug.C * z)(0);
        z = aug.A * z + aug.E * d;
    }
    return r;
}

}  // namespace

TEST_CASE("script L of a scalar loop with degree 0") {
    SynthesisConfig cfg;
    cfg.degree = 0;
    cfg.roots = {0.1};
    const Matrix L = build_script_L(closed_loop(scalar_system(0.5), 1, 1), cfg);
    REQUIRE(L.rows() == 2);
    REQUIRE(L.cols() == 1);
    CHECK(L(0, 0) == 0.0);
    CHECK(L(1, 0) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("script L vanishes without reference channel") {
    ClosedLoopMode clm = closed_loop(fixtures::three_mode_system(), 1, 2);
    clm.E.setZero();
    CHECK(build_script_L(clm, fixtures::three_mode_config()).isZero());
}

TEST_CASE("script L of status (1,2) matches the simulated steady output") {
    const auto sys = fixtures::three_mode_system();
    const ClosedLoopMode clm = closed_loop(sys, 1, 2);
    Vector x = Vector::Zero(2);
    const Vector d = Vector::Ones(1);
    for (int k = 0; k < 400; ++k) x = clm.A_cl * x + clm.E * d;
    const Vector y = clm.C * x;
    Vector expected = Vector::Zero(8);
    for (int m = 0; m < 2; ++m) expected.segment(4 * m + 2, 2) = -y;
    const Matrix L = build_script_L(clm, fixtures::three_mode_config());
    CHECK((L.col(0) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stacked dimensions for the benchmark") {
    const auto sys = fixtures::three_mode_system();
    const auto cfg = fixtures::three_mode_config();
    const ClosedLoopMode clm = closed_loop(sys, 1, 1);
    CHECK(stacked_H(clm, 1).rows() == 8);
    CHECK(stacked_H(clm, 1).cols() == 9);
    CHECK(build_script_L(clm, cfg).rows() == 8);
    const DaeMatrices dae = dae_matrices(clm);
    const Matrix Lbar = stack_toeplitz({dae.L0}, 1);
    CHECK(Lbar.rows() == 8);
    CHECK(Lbar.cols() == 4);
}

TEST_CASE("benchmark passes the degree and rank conditions for every pair") {
    const auto sys = fixtures::three_mode_system();
    const auto cfg = fixtures::three_mode_config();
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            const FeasibilityReport rep = check_feasibility(sys, cfg, i, j);
            CAPTURE(rep.summary());
            CHECK(rep.degree_ok);
            CHECK(rep.filter_stable);
            CHECK(rep.unmatched.size() == 2);
            for (const auto& u : rep.unmatched)
                if (u.stable) CHECK(u.rank_ok);
            CHECK(rep.passed());
        }
}

TEST_CASE("duplicate modes fail the rank condition") {
    const auto sys = fixtures::duplicate_mode_system();
    const auto cfg = fixtures::three_mode_config();
    const FeasibilityReport rep = check_feasibility(sys, cfg, 1, 1);
    bool found = false;
    for (const auto& u : rep.unmatched)
        if (u.plant == 2) {
            found = true;
            CHECK_FALSE(u.rank_ok);
        }
    CHECK(found);
    CHECK_FALSE(rep.passed());
    CHECK_THROWS_AS(synthesize_pair(sys, cfg, 1, 1), SynthesisInfeasible);
}

TEST_CASE("a high degree keeps the degree condition") {
    SynthesisConfig cfg;
    cfg.degree = 3;
    cfg.roots = {-0.1, -0.2, -0.3, -0.4};
    CHECK(check_feasibility(fixtures::three_mode_system(), cfg, 2, 3).degree_ok);
}

TEST_CASE("synthesis config validation names the field") {
    SynthesisConfig cfg = fixtures::three_mode_config();
    cfg.roots = {-0.1, 1.0};
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "synthesis.roots[1]");
    }
    cfg.roots = {-0.1, -0.1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.roots = {-0.1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("program of pair (1,1) has the expected variables") {
    const auto sys = fixtures::three_mode_system();
    const AssembledProgram ap =
        assemble_program(sys, fixtures::three_mode_config(), 1, 1, {{2, 1}, {3, -1}}, 1.0, 1.0);
    REQUIRE(ap.N_vars.size() == 2);
    for (const auto& row : ap.N_vars) CHECK(row.size() == 4);
    CHECK(ap.eta_vars.size() == 3);
    CHECK(ap.P_matched.rows() == 2);
    REQUIRE(ap.P_unmatched.size() == 2);
    for (const auto& [h, P] : ap.P_unmatched) CHECK(P.rows() == 4);
    CHECK_FALSE(ap.no_stable_unmatched);
}

TEST_CASE("a single mode gives the matched program only") {
    ModeMatrices m = fixtures::three_mode_system().mode(1);
    const auto sys = with_modes({m});
    const AssembledProgram ap = assemble_program(sys, fixtures::three_mode_config(), 1, 1, {}, 1.0, 1.0);
    CHECK(ap.P_unmatched.empty());
    CHECK(ap.eta_vars.size() == 1);
    CHECK(ap.no_stable_unmatched);
    CHECK(ap.program.inequalities().empty());
    CHECK(ap.program.psd_blocks().size() == 2);
    const FilterBank bank = synthesize_bank(sys, fixtures::three_mode_config(), 1);
    CHECK(bank.filters().size() == 1);
}

TEST_CASE("sign patterns fix the first enforced mode") {
    CHECK(sign_patterns({}).size() == 1);
    const auto pats = sign_patterns({1, 3, 4});
    CHECK(pats.size() == 4);
    for (const auto& p : pats) CHECK(p.at(1) == 1);
}

TEST_CASE("negating N and the sign pattern keeps feasibility and the objective") {
    const auto sys = fixtures::three_mode_system();
    const auto cfg = fixtures::three_mode_config();
    const AssembledProgram ap = assemble_program(sys, cfg, 1, 2, {{1, 1}, {3, 1}}, 1.0, 1.0);
    const SolveReport rep = solve(ap.program, cfg.tol);
    REQUIRE(rep.optimal());
    const AssembledProgram neg = assemble_program(sys, cfg, 1, 2, {{1, -1}, {3, -1}}, 1.0, 1.0);
    Vector x = rep.x;
    for (const auto& row : ap.N_vars)
        for (int v : row) x(v) = -x(v);
    CHECK(neg.program.check(x).max_violation() <= 2 * cfg.tol);
    CHECK(neg.program.objective().evaluate(x) == doctest::Approx(rep.objective).epsilon(1e-12));
}

TEST_CASE("noiseless plant gives a vanishing matched bound") {
    auto modes = fixtures::three_mode_system().modes();
    for (auto& m : modes) {
        m.D.setZero();
        m.W.setZero();
    }
    const ResidualFilter f = synthesize_pair(with_modes(modes), fixtures::three_mode_config(), 2, 2);
    CHECK(f.eta_matched() <= 1e-5);
}

TEST_CASE("benchmark bank has nine filters and three bounds") {
    const FilterBank& bank = fixtures::three_mode_bank();
    CHECK(bank.filters().size() == 9);
    CHECK(bank.eta_bar().size() == 3);
    CHECK_FALSE(bank.autonomous());
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            CHECK(bank.filter(i, j).controller == i);
            CHECK(bank.filter(i, j).target == j);
        }
}

TEST_CASE("autonomous system needs one filter per mode") {
    auto modes = fixtures::three_mode_system().modes();
    for (auto& m : modes) m.B.setZero();
    const auto sys = with_modes(modes);
    REQUIRE(sys.autonomous());
    const FilterBank bank = synthesize_bank(sys, fixtures::three_mode_config());
    CHECK(bank.autonomous());
    CHECK(bank.filters().size() == 3);
    CHECK(&bank.filter(2, 1) == &bank.filter(1, 1));
}

TEST_CASE("bank certificates hold under independent checks") {
    const auto sys = fixtures::three_mode_system();
    const auto cfg = fixtures::three_mode_config();
    const FilterBank& bank = fixtures::three_mode_bank();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uq(-2.0, 2.0);
    const Vector d = Vector::Constant(1, 0.5);
    for (const auto& f : bank.filters()) {
        const int i = f.controller, j = f.target;
        CAPTURE(i);
        CAPTURE(j);
        const DaeMatrices dae = dae_matrices(closed_loop(sys, i, j));
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            const double q = uq(rng);
            Matrix Nq = Matrix::Zero(1, f.N.cols());
            for (Eigen::Index m = 0; m < f.N.rows(); ++m) Nq += std::pow(q, static_cast<double>(m)) * f.N.row(m);
            worst = std::max(worst, (Nq * (dae.H1 * q + dae.H0)).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-7);

        const Matrix Bn = -f.N * dae.G0;
        CHECK(std::pow(h2_norm_oracle(f.A_r, Bn, f.C_r), 2) <= f.eta.at(j) + 1e-6);

        const AugmentedSystem matched = augmented(sys, f, i, j);
        Vector z0 = Vector::Zero(matched.A.rows());
        z0.head(2) = steady_state(closed_loop(sys, i, j), d);
        const Matrix rm = simulate_residuals(matched, z0, d, 120);
        CHECK(rm.bottomRows(60).cwiseAbs().maxCoeff() <= 1e-8);

        for (const auto& [h, s] : f.signs) {
            const AugmentedSystem aug = augmented(sys, f, i, h);
            CHECK(std::pow(h2_norm_oracle(aug.A, aug.D, aug.C), 2) <= f.eta.at(h) + 1e-6);
            const Matrix ru = simulate_residuals(aug, Vector::Zero(aug.A.rows()), d, 600);
            CHECK(std::abs(ru(599, 0)) >= d.norm() * (1.0 - 1e-6));
            CHECK(s * ru(599, 0) > 0.0);
        }
    }
}

TEST_CASE("returned points satisfy the nonlinear unmatched inequality") {
    const auto sys = fixtures::three_mode_system();
    const auto cfg = fixtures::three_mode_config();
    for (const auto& f : fixtures::three_mode_bank().filters()) {
        const AssembledProgram ap = assemble_program(sys, cfg, f.controller, f.target, f.signs, f.alpha, f.gamma);
        const SolveReport rep = solve(ap.program, cfg.tol);
        REQUIRE(rep.optimal());
        ResidualFilter g = f;
        g.N = ap.extract_N(rep.x);
        const Realization real = realize(g.N, g.denominator, sys.dims().ny);
        g.A_r = real.A_r;
        g.B_r = real.B_r;
        for (const auto& [h, Pexpr] : ap.P_unmatched) {
            const Matrix P = Pexpr.evaluate(rep.x);
            const AugmentedSystem aug = augmented(sys, g, f.controller, h);
            const auto nz = P.rows(), nw = aug.D.cols();
            Matrix blk(2 * nz + nw, 2 * nz + nw);
            blk << P, aug.A * P, aug.D, (aug.A * P).transpose(), P, Matrix::Zero(nz, nw), aug.D.transpose(),
                Matrix::Zero(nw, nz), Matrix::Identity(nw, nw);
            const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(blk).eigenvalues().minCoeff();
            CAPTURE(f.controller);
            CAPTURE(f.target);
            CAPTURE(h);
            CHECK(lmin >= cfg.margin - 1e-7);
        }
        CHECK(f.certificates.passed(f.eta, cfg.margin));
    }
}
