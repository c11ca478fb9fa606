#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "modediag/errors.hpp"
#include "modediag/filter_runtime.hpp"
#include "modediag/noise.hpp"
#include "modediag/simulation.hpp"

using namespace modediag;

namespace {

Scenario benchmark_scenario(double noise) {
    Scenario sc;
    sc.horizon = 350;
    sc.initial_mode = 1;
    sc.switches = {{50, 2}, {100, 3}, {150, 1}, {200, 3}, {250, 2}, {300, 1}};
    sc.reference = fixtures::three_mode_inputs().reference;
    sc.noise.parameter = noise;
    sc.seed = 5;
    return sc;
}

}  // namespace

TEST_CASE("rademacher samples take two values") {
    std::mt19937_64 rng(1);
    const NoiseFamily fam{NoiseKind::Rademacher, 0.3};
    int plus = 0;
    for (int k = 0; k < 2000; ++k) {
        const Vector w = noise_sample(fam, 3, rng);
        for (Eigen::Index c = 0; c < 3; ++c) {
            CHECK((w(c) == 0.3 || w(c) == -0.3));
            plus += w(c) > 0;
        }
    }
    CHECK(plus > 2700);
    CHECK(plus < 3300);
}

TEST_CASE("gaussian samples have zero mean") {
    std::mt19937_64 rng(2);
    const NoiseFamily fam{NoiseKind::Gaussian, 1.0};
    const int n = 100000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += noise_sample(fam, 1, rng)(0);
    CHECK(std::abs(sum / n) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("bounded uniform tails respect the sub-Gaussian bound") {
    std::mt19937_64 rng(3);
    const NoiseFamily fam{NoiseKind::UniformBounded, 1.0};
    const int n = 100000;
    std::vector<double> s(n);
    for (auto& v : s) v = noise_sample(fam, 1, rng)(0);
    for (double e : {0.5, 1.0, 2.0}) {
        const double frac =
            static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return std::abs(v) > e; })) / n;
        CHECK(frac <= 2.0 * std::exp(-e * e / 2.0));
    }
    CHECK(std::all_of(s.begin(), s.end(), [](double v) { return std::abs(v) <= 1.0; }));
}

TEST_CASE("noise names and seeds") {
    CHECK(noise_kind_from_string("uniform") == NoiseKind::UniformBounded);
    CHECK(std::string(to_string(NoiseKind::Rademacher)) == "rademacher");
    CHECK_THROWS_AS(noise_kind_from_string("cauchy"), DomainError);
    CHECK(run_seed(7, 0) == run_seed(7, 0));
    CHECK(run_seed(7, 0) != run_seed(7, 1));
    CHECK(run_seed(7, 0) != run_seed(8, 0));
}

TEST_CASE("noise-free run without switches keeps the matched residual at zero") {
    const auto sys = fixtures::three_mode_system();
    for (int mode = 1; mode <= 3; ++mode) {
        Scenario sc;
        sc.horizon = 200;
        sc.initial_mode = mode;
        sc.reference = fixtures::three_mode_inputs().reference;
        sc.noise.parameter = 0.0;
        const SimulationTrace tr =
            simulate(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc);
        CHECK(tr.residuals.col(mode - 1).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(tr.isolations.empty());
        for (int e : tr.estimate) CHECK(e == mode);
    }
}

TEST_CASE("switch to mode 2 lifts the mode 1 residual within two ticks") {
    const SimulationTrace tr = simulate(fixtures::three_mode_system(), fixtures::three_mode_bank(),
                                        fixtures::three_mode_params(), benchmark_scenario(0.0));
    const double eps1 = fixtures::three_mode_params().epsilon(0);
    CHECK(tr.estimate[50] == 1);
    CHECK(std::max(std::abs(tr.residuals(51, 0)), std::abs(tr.residuals(52, 0))) > eps1);
}

TEST_CASE("equal seeds give identical traces") {
    const auto sys = fixtures::three_mode_system();
    const Scenario sc = benchmark_scenario(1.0);
    const SimulationTrace a = simulate(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc);
    const SimulationTrace b = simulate(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc);
    CHECK(a.residuals == b.residuals);
    CHECK(a.estimate == b.estimate);
    CHECK(a.isolations == b.isolations);
    for (std::size_t k = 0; k < a.x.size(); ++k) CHECK(a.x[k] == b.x[k]);
}

TEST_CASE("noise-free Monte Carlo is exact") {
    const MonteCarloReport rep = monte_carlo(fixtures::three_mode_system(), fixtures::three_mode_bank(),
                                             fixtures::three_mode_params(), benchmark_scenario(0.0), 8, 3, 2);
    for (const auto& t : rep.transitions) {
        CHECK(t.wdp() == 0.0);
        CHECK(t.runs == 8);
        CHECK(t.correct == 8);
        CHECK(t.histogram.size() == 1);
    }
}

TEST_CASE("one Monte Carlo run equals a single simulation") {
    const auto sys = fixtures::three_mode_system();
    Scenario sc = benchmark_scenario(1.0);
    const MonteCarloReport rep =
        monte_carlo(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc, 1, 42, 1);
    sc.seed = run_seed(42, 0);
    const MonteCarloReport one =
        analyze(sc, simulate(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc));
    REQUIRE(rep.transitions.size() == one.transitions.size());
    for (std::size_t s = 0; s < rep.transitions.size(); ++s) {
        CHECK(rep.transitions[s].correct == one.transitions[s].correct);
        CHECK(rep.transitions[s].wrong == one.transitions[s].wrong);
        CHECK(rep.transitions[s].delay_sum == one.transitions[s].delay_sum);
        CHECK(rep.transitions[s].histogram == one.transitions[s].histogram);
    }
}

TEST_CASE("Monte Carlo does not depend on the thread count") {
    const auto sys = fixtures::three_mode_system();
    const Scenario sc = benchmark_scenario(1.0);
    const auto a = monte_carlo(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc, 40, 9, 1);
    const auto b = monte_carlo(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc, 40, 9, 4);
    for (std::size_t s = 0; s < a.transitions.size(); ++s) {
        CHECK(a.transitions[s].delay_sum == b.transitions[s].delay_sum);
        CHECK(a.transitions[s].wrong == b.transitions[s].wrong);
    }
}

TEST_CASE("long dwell times visit the scheduled modes in order") {
    const DiagnosisParams& p = fixtures::three_mode_params();
    const long dwell = p.T.maxCoeff() + p.tau.maxCoeff() + 20;
    Scenario sc;
    sc.initial_mode = 1;
    sc.reference = fixtures::three_mode_inputs().reference;
    sc.noise.parameter = 0.0;
    const std::vector<int> order{2, 3, 1, 3, 2, 1};
    for (std::size_t s = 0; s < order.size(); ++s)
        sc.switches.push_back({dwell * static_cast<long>(s + 1), order[s]});
    sc.horizon = dwell * static_cast<long>(order.size() + 1);
    const SimulationTrace tr = simulate(fixtures::three_mode_system(), fixtures::three_mode_bank(), p, sc);
    REQUIRE(tr.isolations.size() == order.size());
    for (std::size_t s = 0; s < order.size(); ++s) {
        CHECK(tr.estimate[static_cast<std::size_t>(tr.isolations[s])] == order[s]);
        CHECK(tr.isolations[s] > sc.switches[s].time);
    }
}

TEST_CASE("residuals superpose the noise-free and noise-only runs") {
    const auto sys = fixtures::three_mode_system();
    Scenario noisy = benchmark_scenario(1.0);
    noisy.forced_estimate.resize(350);
    for (long k = 0; k < 350; ++k) noisy.forced_estimate[static_cast<std::size_t>(k)] = noisy.mode_at(std::max(0L, k - 3));
    Scenario clean = noisy;
    clean.noise.parameter = 0.0;
    Scenario noise_only = noisy;
    noise_only.reference = Vector::Zero(1);
    const auto& bank = fixtures::three_mode_bank();
    const auto& p = fixtures::three_mode_params();
    const SimulationTrace a = simulate(sys, bank, p, noisy);
    const SimulationTrace b = simulate(sys, bank, p, clean);
    const SimulationTrace c = simulate(sys, bank, p, noise_only);
    CHECK((a.residuals - b.residuals - c.residuals).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("filter states persist across isolations") {
    const auto sys = fixtures::three_mode_system();
    Scenario sc = benchmark_scenario(1.0);
    sc.forced_estimate.assign(350, 1);
    for (long k = 100; k < 350; ++k) sc.forced_estimate[static_cast<std::size_t>(k)] = 2;
    const SimulationTrace tr = simulate(sys, fixtures::three_mode_bank(), fixtures::three_mode_params(), sc);
    for (int h = 1; h <= 3; ++h) {
        const ResidualFilter& f = fixtures::three_mode_bank().filter(2, h);
        FilterState s{2, h, augmented_steady_state(augmented(sys, f, 1, 1), sc.reference).tail(2)};
        double worst = 0.0;
        for (long k = 0; k < 120; ++k) {
            const ResidualOutput o = residual_step(s, f, tr.y[static_cast<std::size_t>(k)]);
            if (k >= 100) worst = std::max(worst, std::abs(o.r - tr.residuals(k, h - 1)));
            s = o.state;
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("scenario validation names the field") {
    Scenario sc = benchmark_scenario(1.0);
    sc.switches[2].mode = 4;
    try {
        sc.validate(3, 2, 1);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "scenario.switches[2].mode");
    }
    sc = benchmark_scenario(1.0);
    sc.switches[3].time = 120;
    CHECK_THROWS_AS(sc.validate(3, 2, 1), ConfigError);
    CHECK(benchmark_scenario(0.0).mode_at(49) == 1);
    CHECK(benchmark_scenario(0.0).mode_at(50) == 2);
}
