#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "modediag/filter_runtime.hpp"
#include "modediag/polynomial.hpp"

using namespace modediag;
using fixtures::mat;

namespace {

Vector random_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return Vector::NullaryExpr(n, [&](Eigen::Index) { return g(rng); });
}

}  // namespace

TEST_CASE("companion realization of (q + 0.1)(q + 0.2)") {
    const Vector a = monic_from_roots(std::vector<double>{-0.1, -0.2});
    const Matrix N = Matrix::Ones(2, 4);
    const Realization r = realize(N, a, 2);
    CHECK((r.A_r - mat({{0.0, -0.02}, {1.0, -0.3}})).norm() <= 1e-15);
    CHECK(r.C_r == mat({{0.0, 1.0}}));
    CHECK(r.B_r.rows() == 2);
    CHECK(r.B_r.cols() == 2);
}

TEST_CASE("first-order realization is the root itself") {
    const Vector a = monic_from_roots(std::vector<double>{0.35});
    const Realization r = realize(Matrix::Ones(1, 3), a, 1);
    REQUIRE(r.A_r.rows() == 1);
    CHECK(r.A_r(0, 0) == doctest::Approx(0.35));
}

TEST_CASE("input rows are the output part of N with L0 = [0; -I]") {
    const FilterBank& bank = fixtures::three_mode_bank();
    for (const auto& f : bank.filters()) {
        const DaeMatrices dae = dae_matrices(closed_loop(fixtures::three_mode_system(), f.controller, f.target));
        CHECK((f.B_r - f.N * dae.L0).norm() <= 1e-15);
    }
}

TEST_CASE("residual step from zero state") {
    const ResidualFilter& f = fixtures::three_mode_bank().filter(1, 2);
    FilterState s{1, 2, Vector::Zero(2)};
    Vector y(2);
    y << 0.7, -1.1;
    const ResidualOutput out = residual_step(s, f, y);
    CHECK(out.r == 0.0);
    CHECK((out.state.xbar - f.B_r * y).norm() <= 1e-15);
}

TEST_CASE("impulse response starts at zero") {
    std::mt19937_64 rng(4);
    for (const auto& f : fixtures::three_mode_bank().filters()) {
        FilterState s{f.controller, f.target, Vector::Zero(2)};
        CHECK(residual_step(s, f, random_vector(2, rng)).r == 0.0);
    }
}

TEST_CASE("constant output converges to the static gain") {
    std::mt19937_64 rng(8);
    for (const auto& f : fixtures::three_mode_bank().filters()) {
        const Vector y = random_vector(2, rng);
        FilterState s{f.controller, f.target, Vector::Zero(2)};
        double r = 0.0;
        for (int k = 0; k < 200; ++k) {
            const ResidualOutput o = residual_step(s, f, y);
            s = o.state;
            r = o.r;
        }
        const double expected = (f.B_r * y).sum() / poly_value(f.denominator, 1.0);
        CHECK(std::abs(r - expected) <= 1e-9);
    }
}

TEST_CASE("free response decays at the slowest root") {
    const ResidualFilter& f = fixtures::three_mode_bank().filter(3, 1);
    const Eigen::EigenSolver<Matrix> es(f.A_r);
    const Eigen::MatrixXcd V = es.eigenvectors();
    const double c = V.norm() * V.inverse().norm();
    const double lmax = 0.2;
    FilterState s{3, 1, Vector::Ones(2)};
    const double x0 = s.xbar.norm();
    for (int k = 1; k <= 40; ++k) {
        s = residual_step(s, f, Vector::Zero(2)).state;
        CHECK(s.xbar.norm() <= x0 * c * std::pow(lmax, k) * (1 + 1e-9));
    }
}

TEST_CASE("augmented system equals plant and filter co-simulation") {
    const auto sys = fixtures::three_mode_system();
    const FilterBank& bank = fixtures::three_mode_bank();
    std::mt19937_64 rng(21);
    for (int i = 1; i <= 3; ++i)
        for (int h = 1; h <= 3; ++h) {
            const ResidualFilter& f = bank.filter(i, 2);
            const ClosedLoopMode clm = closed_loop(sys, i, h);
            const AugmentedSystem aug = augmented(sys, bank, i, 2, h);
            Vector x = random_vector(2, rng);
            FilterState s{i, 2, random_vector(2, rng)};
            Vector z(4);
            z << x, s.xbar;
            double worst = 0.0;
            for (int k = 0; k < 100; ++k) {
                const Vector d = random_vector(1, rng);
                const Vector w = random_vector(2, rng);
                const Vector y = clm.C * x + clm.D * w;
                const ResidualOutput o = residual_step(s, f, y);
                worst = std::max(worst, std::abs(o.r - (aug.C * z)(0)));
                CHECK((aug.C * z)(0) == (f.C_r * z.tail(2))(0));
                x = clm.A_cl * x + clm.E * d + clm.W_noise * w;
                s = o.state;
                z = aug.A * z + aug.E * d + aug.D * w;
                worst = std::max(worst, (z - (Vector(4) << x, s.xbar).finished()).cwiseAbs().maxCoeff());
            }
            CHECK(worst <= 1e-9);
        }
}

TEST_CASE("residuals are linear in the output sequence") {
    const ResidualFilter& f = fixtures::three_mode_bank().filter(2, 3);
    std::mt19937_64 rng(13);
    FilterState a{2, 3, Vector::Zero(2)}, b = a, ab = a;
    for (int k = 0; k < 100; ++k) {
        const Vector ya = random_vector(2, rng), yb = random_vector(2, rng);
        const ResidualOutput oa = residual_step(a, f, ya), ob = residual_step(b, f, yb),
                             oab = residual_step(ab, f, ya + yb);
        CHECK(std::abs(oab.r - oa.r - ob.r) <= 1e-12);
        a = oa.state;
        b = ob.state;
        ab = oab.state;
    }
}

TEST_CASE("matched augmented loop has zero static gain from the reference") {
    const auto sys = fixtures::three_mode_system();
    const FilterBank& bank = fixtures::three_mode_bank();
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            const AugmentedSystem aug = augmented(sys, bank, i, j, j);
            const Vector z = augmented_steady_state(aug, Vector::Ones(1));
            CHECK(std::abs((aug.C * z)(0)) <= 1e-12);
        }
}
