#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "modediag/diagnosis.hpp"
#include "modediag/noise.hpp"

namespace modediag {

struct Switch {
    long time = 0;
    int mode = 1;
};

struct Scenario {
    long horizon = 0;
    int initial_mode = 1;
    std::vector<Switch> switches;          ///< strictly increasing times in (0, horizon)
    Vector reference;                      ///< d̄
    std::optional<Vector> initial_state;   ///< explicit plant state (filters start at zero); else steady state
    NoiseFamily noise;
    std::uint64_t seed = 0;
    std::vector<int> forced_estimate;      ///< optional sigma hat per tick, bypasses the isolation rule

    /// Throws ConfigError naming the offending field.
    void validate(int n_modes, int nx, int nd) const;
    int mode_at(long k) const;
};

struct SimulationTrace {
    std::vector<Vector> x, y;
    std::vector<int> sigma, estimate;
    Matrix residuals;                 ///< row k: r_{sigma hat(k), h}(k), h = 1..n
    std::vector<long> isolations;     ///< ticks at which sigma hat changed

    long horizon() const noexcept { return static_cast<long>(sigma.size()); }
    bool isolated_at(long k) const;
};

SimulationTrace simulate(const SwitchedAffineSystem& system, const FilterBank& bank, const DiagnosisParams& params,
                         const Scenario& scenario, std::mt19937_64& rng);

/// Uses a generator seeded from `scenario.seed`.
SimulationTrace simulate(const SwitchedAffineSystem& system, const FilterBank& bank, const DiagnosisParams& params,
                         const Scenario& scenario);

struct TransitionStats {
    int from = 0, to = 0;
    long switch_time = 0;
    int runs = 0;
    int correct = 0;           ///< first isolation after the switch picked the new mode
    int wrong = 0;             ///< first isolation picked another mode
    int missed = 0;            ///< no isolation before the next switch or the horizon
    double delay_sum = 0.0;    ///< over correct first isolations
    std::map<long, int> histogram;  ///< delay of the first isolation, correct or not

    double adt() const { return correct ? delay_sum / correct : 0.0; }
    double wdp() const { return runs ? static_cast<double>(wrong) / runs : 0.0; }
    void merge(const TransitionStats& other);
};

struct MonteCarloReport {
    int runs = 0;
    std::uint64_t seed = 0;
    std::vector<TransitionStats> transitions;
};

/// Statistics of a single trace.
MonteCarloReport analyze(const Scenario& scenario, const SimulationTrace& trace);

/// Runs `runs` independent simulations; run r uses run_seed(seed, r). `jobs` = 0 uses all cores.
MonteCarloReport monte_carlo(const SwitchedAffineSystem& system, const FilterBank& bank,
                             const DiagnosisParams& params, const Scenario& scenario, int runs, std::uint64_t seed,
                             int jobs = 0);

}  // namespace modediag
