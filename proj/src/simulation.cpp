#include "modediag/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "modediag/errors.hpp"
#include "modediag/filter_runtime.hpp"

namespace modediag {

void Scenario::validate(int n_modes, int nx, int nd) const {
    if (horizon < 1) throw ConfigError("scenario.horizon", "must be positive");
    if (initial_mode < 1 || initial_mode > n_modes) throw ConfigError("scenario.initial_mode", "invalid mode index");
    long last = 0;
    for (std::size_t s = 0; s < switches.size(); ++s) {
        const std::string path = "scenario.switches[" + std::to_string(s) + "]";
        if (switches[s].time <= last || switches[s].time >= horizon)
            throw ConfigError(path + ".time", "switch times must increase strictly within the horizon");
        if (switches[s].mode < 1 || switches[s].mode > n_modes)
            throw ConfigError(path + ".mode", "invalid mode index " + std::to_string(switches[s].mode));
        last = switches[s].time;
    }
    if (reference.size() != nd) throw ConfigError("scenario.reference", "needs n_d entries");
    if (initial_state && initial_state->size() != nx) throw ConfigError("scenario.initial_state", "needs n_x entries");
    if (!(noise.parameter >= 0.0)) throw ConfigError("scenario.noise.parameter", "must be nonnegative");
    if (!forced_estimate.empty()) {
        if (static_cast<long>(forced_estimate.size()) != horizon)
            throw ConfigError("scenario.forced_estimate", "needs one entry per tick");
        for (int m : forced_estimate)
            if (m < 1 || m > n_modes) throw ConfigError("scenario.forced_estimate", "invalid mode index");
    }
}

int Scenario::mode_at(long k) const {
    int mode = initial_mode;
    for (const auto& s : switches) {
        if (s.time > k) break;
        mode = s.mode;
    }
    return mode;
}

bool SimulationTrace::isolated_at(long k) const {
    return std::binary_search(isolations.begin(), isolations.end(), k);
}

namespace {

std::size_t filter_slot(const FilterBank& bank, int controller, int target) {
    const int n = bank.n_modes();
    return static_cast<std::size_t>(bank.autonomous() ? target - 1 : (controller - 1) * n + target - 1);
}

}  // namespace

SimulationTrace simulate(const SwitchedAffineSystem& system, const FilterBank& bank, const DiagnosisParams& params,
                         const Scenario& scenario, std::mt19937_64& rng) {
    const auto& dm = system.dims();
    const int n = system.n_modes();
    scenario.validate(n, dm.nx, dm.nd);
    if (bank.n_modes() != n || params.n_modes() != n) throw DimensionError("bank or parameters do not match the system");

    const auto& filters = bank.filters();
    std::vector<Vector> xbar(filters.size());
    Vector x;
    DiagnosisState state;
    state.estimate = scenario.forced_estimate.empty() ? scenario.initial_mode : scenario.forced_estimate.front();
    if (scenario.initial_state) {
        x = *scenario.initial_state;
        for (std::size_t f = 0; f < filters.size(); ++f) xbar[f] = Vector::Zero(filters[f].A_r.rows());
    } else {
        const int i = state.estimate;
        const int h = scenario.initial_mode;
        x = steady_state(closed_loop(system, i, h), scenario.reference);
        for (std::size_t f = 0; f < filters.size(); ++f) {
            const Vector X = augmented_steady_state(augmented(system, filters[f], i, h), scenario.reference);
            xbar[f] = X.tail(filters[f].A_r.rows());
        }
    }

    SimulationTrace tr;
    const auto K = scenario.horizon;
    tr.x.reserve(static_cast<std::size_t>(K));
    tr.y.reserve(static_cast<std::size_t>(K));
    tr.sigma.reserve(static_cast<std::size_t>(K));
    tr.estimate.reserve(static_cast<std::size_t>(K));
    tr.residuals.resize(K, n);
    std::vector<double> row(static_cast<std::size_t>(n));

    for (long k = 0; k < K; ++k) {
        if (!scenario.forced_estimate.empty()) state.estimate = scenario.forced_estimate[static_cast<std::size_t>(k)];
        const int sigma = scenario.mode_at(k);
        const int est = state.estimate;
        const ModeMatrices& plant = system.mode(sigma);
        const Vector w = noise_sample(scenario.noise, dm.nw, rng);
        const Vector y = plant.C * x + plant.D * w;

        for (int h = 1; h <= n; ++h) {
            const std::size_t slot = filter_slot(bank, est, h);
            row[static_cast<std::size_t>(h - 1)] = (filters[slot].C_r * xbar[slot])(0);
            tr.residuals(k, h - 1) = row[static_cast<std::size_t>(h - 1)];
        }
        tr.x.push_back(x);
        tr.y.push_back(y);
        tr.sigma.push_back(sigma);
        tr.estimate.push_back(est);
        if (k > 0 && est != tr.estimate[static_cast<std::size_t>(k - 1)]) tr.isolations.push_back(k);

        if (scenario.forced_estimate.empty()) {
            for (double& r : row) r = std::abs(r);
            state = diagnosis_step(state, row, params);
        } else {
            state.tick = k + 1;
        }

        const Vector u = system.mode(est).K * y;
        x = plant.A * x + plant.B * u + plant.E * scenario.reference + plant.W * w;
        for (std::size_t f = 0; f < filters.size(); ++f) xbar[f] = filters[f].A_r * xbar[f] + filters[f].B_r * y;
    }
    return tr;
}

SimulationTrace simulate(const SwitchedAffineSystem& system, const FilterBank& bank, const DiagnosisParams& params,
                         const Scenario& scenario) {
    std::mt19937_64 rng(scenario.seed);
    return simulate(system, bank, params, scenario, rng);
}

void TransitionStats::merge(const TransitionStats& other) {
    runs += other.runs;
    correct += other.correct;
    wrong += other.wrong;
    missed += other.missed;
    delay_sum += other.delay_sum;
    for (const auto& [d, c] : other.histogram) histogram[d] += c;
}

MonteCarloReport analyze(const Scenario& scenario, const SimulationTrace& trace) {
    MonteCarloReport rep;
    rep.runs = 1;
    rep.seed = scenario.seed;
    int from = scenario.initial_mode;
    for (std::size_t s = 0; s < scenario.switches.size(); ++s) {
        const Switch& sw = scenario.switches[s];
        const long end = s + 1 < scenario.switches.size() ? scenario.switches[s + 1].time : trace.horizon();
        TransitionStats ts;
        ts.from = from;
        ts.to = sw.mode;
        ts.switch_time = sw.time;
        ts.runs = 1;
        auto it = std::lower_bound(trace.isolations.begin(), trace.isolations.end(), sw.time);
        if (it == trace.isolations.end() || *it >= end) {
            ts.missed = 1;
        } else {
            const long delay = *it - sw.time;
            ts.histogram[delay] = 1;
            if (trace.estimate[static_cast<std::size_t>(*it)] == sw.mode) {
                ts.correct = 1;
                ts.delay_sum = static_cast<double>(delay);
            } else {
                ts.wrong = 1;
            }
        }
        rep.transitions.push_back(ts);
        from = sw.mode;
    }
    return rep;
}

MonteCarloReport monte_carlo(const SwitchedAffineSystem& system, const FilterBank& bank,
                             const DiagnosisParams& params, const Scenario& scenario, int runs, std::uint64_t seed,
                             int jobs) {
    if (runs < 1) throw DomainError("at least one run is required");
    std::vector<MonteCarloReport> per_run(static_cast<std::size_t>(runs));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (int r = next++; r < runs && !failed; r = next++) {
            try {
                Scenario sc = scenario;
                sc.seed = run_seed(seed, static_cast<std::uint64_t>(r));
                per_run[static_cast<std::size_t>(r)] = analyze(sc, simulate(system, bank, params, sc));
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    unsigned threads = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    MonteCarloReport rep = per_run.front();
    rep.runs = runs;
    rep.seed = seed;
    for (std::size_t r = 1; r < per_run.size(); ++r)
        for (std::size_t s = 0; s < rep.transitions.size(); ++s) rep.transitions[s].merge(per_run[r].transitions[s]);
    return rep;
}

}  // namespace modediag
