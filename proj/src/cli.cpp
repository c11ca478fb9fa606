#include "modediag/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <random>

#include "modediag/errors.hpp"
#include "modediag/serialization.hpp"

namespace modediag::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Context {
    ProjectConfig cfg;
    const Options& opt;
    fs::path out_dir;
    std::ostream& out;
    std::ostream& err;

    std::string path(const char* name) const { return (out_dir / name).string(); }
    int jobs() const { return opt.jobs; }
};

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int do_check(Context& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const SwitchedAffineSystem sys = c.cfg.system();
    const int n = sys.n_modes();
    const int rows_i = sys.autonomous() ? 1 : n;
    bool ok = true;
    json pairs = json::array();
    for (int i = 1; i <= rows_i; ++i)
        for (int j = 1; j <= n; ++j) {
            const FeasibilityReport rep = check_feasibility(sys, c.cfg.synthesis, i, j);
            ok = ok && rep.passed();
            c.out << rep.summary() << '\n';
            json u = json::array();
            for (const auto& h : rep.unmatched)
                u.push_back({{"plant", h.plant}, {"stable", h.stable}, {"rank_ok", h.rank_ok},
                             {"rank_augmented", h.rank_augmented}});
            pairs.push_back({{"controller", i}, {"target", j}, {"degree_ok", rep.degree_ok}, {"rows", rep.rows},
                             {"rank_H", rep.rank_H}, {"filter_stable", rep.filter_stable},
                             {"matched_stable", rep.matched_stable}, {"unmatched", u}, {"passed", rep.passed()}});
        }
    json doc = {{"format_version", kFormatVersion}, {"kind", "feasibility_report"},
                {"config_digest", c.cfg.digest}, {"passed", ok}, {"pairs", pairs}};
    write_text(c.path("check.json"), doc.dump(2) + "\n");
    c.out << (ok ? "all pairs feasible" : "infeasible pairs present") << " (" << std::fixed << std::setprecision(3)
          << elapsed(t0) << " s)\n";
    return ok ? kSuccess : kValidation;
}

void print_bank(const FilterBank& bank, std::ostream& os) {
    os << std::scientific << std::setprecision(4);
    for (const auto& f : bank.filters()) {
        os << "filter (" << f.controller << "," << f.target << "): eta";
        for (const auto& [h, v] : f.eta) os << ' ' << h << '=' << v;
        os << ", decoupling " << f.certificates.decoupling << ", matched eig " << f.certificates.matched_min_eig;
        for (const auto& [h, g] : f.certificates.steady_gain) os << ", gain " << h << '=' << g;
        os << '\n';
        for (const auto& note : f.notes) os << "  note: " << note << '\n';
    }
    os << std::defaultfloat;
}

FilterBank synthesize_and_save(Context& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const FilterBank bank = synthesize_bank(c.cfg.system(), c.cfg.synthesis, c.jobs());
    save_bank(c.path("bank.json"), bank, c.cfg.digest);
    print_bank(bank, c.out);
    c.out << "bank written to " << c.path("bank.json") << " (" << std::fixed << std::setprecision(2) << elapsed(t0)
          << " s)\n"
          << std::defaultfloat;
    return bank;
}

FilterBank require_bank(Context& c) {
    const std::string p = c.path("bank.json");
    if (!fs::exists(p)) throw ConfigError(p, "bank file missing; run synthesize first");
    const json j = json::parse(read_text(p));
    if (j.value("config_digest", std::string()) != c.cfg.digest)
        c.err << "warning: " << p << " was synthesized from a different config\n";
    FilterBank bank = bank_from_json(j);
    if (bank.n_modes() != c.cfg.system().n_modes()) throw ConfigError(p, "bank does not match the system");
    return bank;
}

void print_params(const DiagnosisParams& p, std::ostream& os) {
    const int n = p.n_modes();
    os << std::setprecision(6) << "mode    eta_bar       epsilon     tau\n";
    for (int i = 0; i < n; ++i)
        os << std::setw(4) << i + 1 << std::setw(12) << p.eta_bar(i) << std::setw(14) << p.epsilon(i) << std::setw(8)
           << p.tau(i) << '\n';
    os << "matched times T(i,j):\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) os << std::setw(6) << (i == j ? std::string("-") : std::to_string(p.T(i, j)));
        os << '\n';
    }
}

DiagnosisParams params_for(Context& c, const FilterBank& bank) {
    return compute_params(c.cfg.system(), bank, c.cfg.diagnosis);
}

int do_thresholds(Context& c) {
    const FilterBank bank = fs::exists(c.path("bank.json")) ? require_bank(c) : synthesize_and_save(c);
    const DiagnosisParams p = params_for(c, bank);
    print_params(p, c.out);
    const SwitchedAffineSystem sys = c.cfg.system();
    const int n = sys.n_modes();
    bool excited = true;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            for (int h = 1; h <= n; ++h) {
                if (h == j) continue;
                const ExcitationResult e = excitation_check(sys, bank, c.cfg.diagnosis.reference, i, j, h,
                                                            c.cfg.diagnosis.mu_bar, p.epsilon(i - 1), p.eta_bar(i - 1));
                if (!e.passed) {
                    excited = false;
                    c.err << "warning: weak excitation of r_" << i << h << " in status (" << i << "," << j
                          << "): " << e.expected << " < " << e.required << '\n';
                }
            }
    c.out << "excitation " << (excited ? "sufficient" : "insufficient") << " for all unmatched residuals\n";
    write_text(c.path("thresholds.json"), params_to_json(p, c.cfg.digest).dump(2) + "\n");
    return kSuccess;
}

Scenario scenario_of(const Context& c) {
    if (!c.cfg.scenario) throw ConfigError("scenario", "missing required section");
    Scenario s = *c.cfg.scenario;
    if (c.opt.seed) s.seed = *c.opt.seed;
    return s;
}

int do_simulate(Context& c) {
    const Scenario s = scenario_of(c);
    const FilterBank bank = require_bank(c);
    const DiagnosisParams p = params_for(c, bank);
    const SimulationTrace tr = simulate(c.cfg.system(), bank, p, s);
    const std::string trace = c.path("trace.csv");
    write_text(trace, trace_to_csv(tr, p));
    write_text(c.path("plot_trace.py"), export_plot_script(trace));
    c.out << "isolations:";
    for (long k : tr.isolations) c.out << ' ' << k << "->" << tr.estimate[static_cast<std::size_t>(k)];
    c.out << "\ntrace written to " << trace << '\n';
    return kSuccess;
}

int do_montecarlo(Context& c) {
    const Scenario s = scenario_of(c);
    const FilterBank bank = require_bank(c);
    const DiagnosisParams p = params_for(c, bank);
    const int runs = c.opt.runs.value_or(c.cfg.runs);
    if (runs < 1) throw ConfigError("--runs", "must be positive");
    const std::uint64_t seed = c.opt.seed.value_or(c.cfg.seed);
    const auto t0 = std::chrono::steady_clock::now();
    const MonteCarloReport rep = monte_carlo(c.cfg.system(), bank, p, s, runs, seed, c.jobs());
    const std::string report = c.path("report.json");
    write_text(report, report_to_json(rep, c.cfg.digest).dump(2) + "\n");
    write_text(c.path("report.csv"), report_to_csv(rep));
    write_text(c.path("plot_histogram.py"), export_histogram_script(report));
    c.out << "transition  switch     ADT     WDP  missed\n" << std::fixed;
    for (const auto& t : rep.transitions)
        c.out << "  M" << t.from << t.to << std::setw(12) << t.switch_time << std::setw(8) << std::setprecision(3)
              << t.adt() << std::setw(8) << t.wdp() << std::setw(8) << t.missed << '\n';
    c.out << runs << " runs in " << std::setprecision(2) << elapsed(t0) << " s\n" << std::defaultfloat;
    return kSuccess;
}

int do_invalidate(Context& c) {
    if (!c.cfg.invalidation) throw ConfigError("invalidation", "missing required section");
    const InvalidationConfig& ic = *c.cfg.invalidation;
    std::vector<Vector> outputs;
    if (ic.data_file) {
        fs::path p = *ic.data_file;
        if (p.is_relative()) p = fs::path(c.cfg.base_dir) / p;
        outputs = read_output_csv(p.string());
        for (std::size_t k = 0; k < outputs.size(); ++k)
            if (outputs[k].size() != ic.model.C.rows())
                throw ConfigError(p.string() + ":" + std::to_string(k + 1), "expected n_y columns");
    } else {
        const InvalidationDataConfig& g = *ic.generate;
        std::mt19937_64 rng(c.opt.seed.value_or(g.seed));
        outputs = generate_outputs(ic.model, ic.bounds, g.initial_state, g.horizon, g.spread, g.fault, rng);
        std::ostringstream os;
        os << std::setprecision(17);
        for (Eigen::Index r = 0; r < ic.model.C.rows(); ++r) os << (r ? "," : "") << 'y' << r + 1;
        os << '\n';
        for (const auto& y : outputs) {
            for (Eigen::Index r = 0; r < y.size(); ++r) os << (r ? "," : "") << y(r);
            os << '\n';
        }
        write_text(c.path("outputs.csv"), os.str());
    }
    const auto t0 = std::chrono::steady_clock::now();
    const double tol = c.opt.tol.value_or(kDefaultTolerance);
    const std::vector<WindowResult> res = sweep(ic.model, ic.bounds, outputs, ic.window, tol, c.jobs());
    write_text(c.path("sweep.csv"), sweep_to_csv(res));
    long first = -1;
    int flagged = 0, failed = 0;
    for (const auto& w : res) {
        if (w.status == InvalidationStatus::Infeasible) {
            ++flagged;
            if (first < 0) first = w.end;
        }
        if (w.status == InvalidationStatus::NumericalFailure) ++failed;
    }
    c.out << res.size() << " windows, " << flagged << " invalidated";
    if (first >= 0) c.out << ", first at k=" << first;
    c.out << " (" << std::fixed << std::setprecision(2) << elapsed(t0) << " s)\n" << std::defaultfloat;
    if (failed) {
        c.err << failed << " windows hit a numerical failure\n";
        return kNumerical;
    }
    return kSuccess;
}

}  // namespace

int run(const std::string& command, const Options& options, std::ostream& out, std::ostream& err) {
    static const char* const commands[] = {"check", "synthesize", "thresholds", "simulate", "montecarlo", "invalidate"};
    if (std::find(std::begin(commands), std::end(commands), command) == std::end(commands)) {
        err << "unknown command '" << command << "'\n";
        return kValidation;
    }
    try {
        if (options.config.empty()) throw ConfigError("--config", "required");
        ProjectConfig cfg = load_config(options.config);
        if (options.tol) {
            if (!(*options.tol > 0.0)) throw ConfigError("--tol", "must be positive");
            cfg.synthesis.tol = *options.tol;
        }
        if (options.jobs < 0) throw ConfigError("--jobs", "must be nonnegative");
        fs::path dir = options.out ? fs::path(*options.out) : fs::path(cfg.output_dir);
        if (!options.out && dir.is_relative()) dir = (fs::path(cfg.base_dir) / dir).lexically_normal();
        fs::create_directories(dir);
        Context c{std::move(cfg), options, dir, out, err};
        if (command == "check") return do_check(c);
        if (command == "synthesize") {
            synthesize_and_save(c);
            return kSuccess;
        }
        if (command == "thresholds") return do_thresholds(c);
        if (command == "simulate") return do_simulate(c);
        if (command == "montecarlo") return do_montecarlo(c);
        return do_invalidate(c);
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kValidation;
    } catch (const SynthesisInfeasible& e) {
        err << "infeasible: " << e.what() << '\n';
        return kValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const nlohmann::ordered_json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kValidation;
    } catch (const fs::filesystem_error& e) {
        err << "file error: " << e.what() << '\n';
        return kValidation;
    }
}

}  // namespace modediag::cli
