#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "modediag/cli.hpp"
#include "modediag/errors.hpp"
#include "modediag/serialization.hpp"

using namespace modediag;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kSource = MODEDIAG_SOURCE_DIR;

json benchmark_doc() { return json::parse(read_text(kSource + "/configs/three_mode.json")); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("modediag_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_config(const fs::path& dir, const json& doc) {
    const std::string path = (dir / "config.json").string();
    write_text(path, doc.dump(2));
    return path;
}

std::string config_error_path(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

struct CliResult {
    int code;
    std::string out, err;
};

CliResult run_cli(const std::string& cmd, const cli::Options& opt) {
    std::ostringstream out, err;
    const int code = cli::run(cmd, opt, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("benchmark config parses into the fixture system") {
    const ProjectConfig cfg = parse_config(benchmark_doc());
    const auto sys = cfg.system();
    const auto ref = fixtures::three_mode_system();
    REQUIRE(sys.n_modes() == 3);
    for (int i = 1; i <= 3; ++i) {
        CHECK(sys.mode(i).A == ref.mode(i).A);
        CHECK(sys.mode(i).B == ref.mode(i).B);
        CHECK(sys.mode(i).C == ref.mode(i).C);
        CHECK(sys.mode(i).D == ref.mode(i).D);
        CHECK(sys.mode(i).K == ref.mode(i).K);
        CHECK(sys.mode(i).W == ref.mode(i).W);
    }
    CHECK(cfg.synthesis.degree == 1);
    CHECK(cfg.runs == 1000);
    REQUIRE(cfg.scenario);
    CHECK(cfg.scenario->switches.size() == 6);
    CHECK(cfg.scenario->reference(0) == 0.5);
    CHECK(cfg.digest.size() == 16);
    CHECK(cfg.digest == config_digest(benchmark_doc()));
}

TEST_CASE("schema errors name the offending field") {
    json doc = benchmark_doc();
    doc["diagnosis"]["betta"] = 0.1;
    CHECK(config_error_path(doc) == "diagnosis.betta");

    doc = benchmark_doc();
    doc["scenario"]["switches"][2]["mode"] = 9;
    CHECK(config_error_path(doc) == "scenario.switches[2].mode");

    doc = benchmark_doc();
    doc["system"]["modes"][1]["A"][1] = {0.0};
    CHECK(config_error_path(doc) == "system.modes[1].A[1]");

    doc = benchmark_doc();
    doc["synthesis"]["roots"][0] = 1.5;
    CHECK(config_error_path(doc) == "synthesis.roots[0]");

    doc = benchmark_doc();
    doc.erase("format_version");
    CHECK(config_error_path(doc) == "format_version");

    doc = benchmark_doc();
    doc["format_version"] = 2;
    CHECK(config_error_path(doc) == "format_version");

    doc = benchmark_doc();
    doc["scenario"]["noise"]["family"] = "cauchy";
    CHECK(config_error_path(doc) == "scenario.noise.family");

    doc = benchmark_doc();
    doc["extra"] = 1;
    CHECK(config_error_path(doc) == "extra");
}

TEST_CASE("grid and optional matrices") {
    json doc = benchmark_doc();
    doc["synthesis"]["grid"] = "default";
    ProjectConfig cfg = parse_config(doc);
    CHECK(cfg.synthesis.alpha_grid == default_grid());
    doc["synthesis"]["grid"] = {{"alpha", {1.0, 2.0}}, {"gamma", {3.0}}};
    cfg = parse_config(doc);
    CHECK(cfg.synthesis.alpha_grid.size() == 2);
    CHECK(cfg.synthesis.gamma_grid.size() == 1);

    for (auto& m : doc["system"]["modes"]) {
        m.erase("B");
        m.erase("K");
    }
    CHECK(parse_config(doc).system().autonomous());
}

TEST_CASE("bank file round trip reproduces residuals exactly") {
    const fs::path dir = scratch("bank");
    const FilterBank& bank = fixtures::three_mode_bank();
    save_bank((dir / "bank.json").string(), bank, "abc");
    const FilterBank back = load_bank((dir / "bank.json").string());
    REQUIRE(back.filters().size() == bank.filters().size());
    const json j = json::parse(read_text((dir / "bank.json").string()));
    CHECK(j.begin().key() == "format_version");
    CHECK(j["format_version"] == kFormatVersion);
    CHECK(j["config_digest"] == "abc");

    const auto sys = fixtures::three_mode_system();
    Scenario sc;
    sc.horizon = 350;
    sc.switches = {{50, 2}, {100, 3}, {150, 1}, {200, 3}, {250, 2}, {300, 1}};
    sc.reference = fixtures::three_mode_inputs().reference;
    sc.seed = 77;
    const DiagnosisParams p1 = compute_params(sys, bank, fixtures::three_mode_inputs());
    const DiagnosisParams p2 = compute_params(sys, back, fixtures::three_mode_inputs());
    const SimulationTrace a = simulate(sys, bank, p1, sc);
    const SimulationTrace b = simulate(sys, back, p2, sc);
    CHECK((a.residuals - b.residuals).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(a.isolations == b.isolations);
    CHECK(p1.epsilon == p2.epsilon);
    CHECK(p1.T == p2.T);
}

TEST_CASE("parameter file round trip") {
    const DiagnosisParams& p = fixtures::three_mode_params();
    const DiagnosisParams q = params_from_json(params_to_json(p, "d"));
    CHECK(q.epsilon == p.epsilon);
    CHECK(q.eta_bar == p.eta_bar);
    CHECK(q.T == p.T);
    CHECK(q.tau == p.tau);
    CHECK(q.inputs.beta == p.inputs.beta);
}

TEST_CASE("plot scripts bind the trace and report columns") {
    const fs::path dir = scratch("plots");
    Scenario sc;
    sc.horizon = 80;
    sc.switches = {{40, 3}};
    sc.reference = fixtures::three_mode_inputs().reference;
    const SimulationTrace tr =
        simulate(fixtures::three_mode_system(), fixtures::three_mode_bank(), fixtures::three_mode_params(), sc);
    const std::string trace = (dir / "trace.csv").string();
    write_text(trace, trace_to_csv(tr, fixtures::three_mode_params()));
    const std::string script = export_plot_script(trace);
    for (const char* col : {"'r1'", "'r2'", "'r3'", "'eps'", "'isolation'", "'sigma'"})
        CHECK(script.find(col) != std::string::npos);
    CHECK(script.find("'r4'") == std::string::npos);

    const std::string empty = (dir / "empty.csv").string();
    write_text(empty, "");
    CHECK_THROWS_AS(export_plot_script(empty), ConfigError);
    write_text(empty, "k,sigma,sigma_hat,r1,eps,isolation\n");
    CHECK_THROWS_AS(export_plot_script(empty), ConfigError);
    CHECK_THROWS_AS(export_plot_script((dir / "missing.csv").string()), ConfigError);

    MonteCarloReport rep = analyze(sc, tr);
    const std::string report = (dir / "report.json").string();
    write_text(report, report_to_json(rep, "d").dump());
    const std::string hist = export_histogram_script(report);
    CHECK(hist.find("histogram") != std::string::npos);
    CHECK(hist.find("for ax, row in zip") != std::string::npos);
}

TEST_CASE("trace csv has one row per tick") {
    Scenario sc;
    sc.horizon = 30;
    sc.reference = fixtures::three_mode_inputs().reference;
    const SimulationTrace tr =
        simulate(fixtures::three_mode_system(), fixtures::three_mode_bank(), fixtures::three_mode_params(), sc);
    const std::string csv = trace_to_csv(tr, fixtures::three_mode_params());
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,sigma,sigma_hat,x1,x2,y1,y2,r1,r2,r3,eps,isolation");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
}

TEST_CASE("output csv reader") {
    const fs::path dir = scratch("csv");
    const std::string path = (dir / "y.csv").string();
    write_text(path, "y1,y2\n1,2\n3,4.5\n");
    const auto rows = read_output_csv(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1](1) == 4.5);
    write_text(path, "y1,y2\n1,2\n3\n");
    CHECK_THROWS_AS(read_output_csv(path), ConfigError);
    write_text(path, "1,2\nx,4\n");
    CHECK_THROWS_AS(read_output_csv(path), ConfigError);
}

TEST_CASE("command line pipeline") {
    const fs::path dir = scratch("cli");
    cli::Options opt;
    opt.config = (kSource + "/configs/three_mode.json");
    opt.out = (dir / "out").string();
    opt.jobs = 2;

    SUBCASE("simulate without a bank fails with a validation code") {
        const CliResult r = run_cli("simulate", opt);
        CHECK(r.code == cli::kValidation);
        CHECK(r.err.find("bank.json") != std::string::npos);
    }
    SUBCASE("full pipeline") {
        CliResult r = run_cli("check", opt);
        CHECK(r.code == cli::kSuccess);
        CHECK(r.out.find("degree ok") != std::string::npos);
        CHECK(r.out.find("FAIL") == std::string::npos);
        CHECK(fs::exists(dir / "out" / "check.json"));

        CHECK(run_cli("synthesize", opt).code == cli::kSuccess);
        CHECK(fs::exists(dir / "out" / "bank.json"));

        r = run_cli("thresholds", opt);
        CHECK(r.code == cli::kSuccess);
        CHECK(r.out.find("epsilon") != std::string::npos);
        const json th = json::parse(read_text((dir / "out" / "thresholds.json").string()));
        CHECK(th["epsilon"].size() == 3);

        r = run_cli("simulate", opt);
        CHECK(r.code == cli::kSuccess);
        CHECK(fs::exists(dir / "out" / "trace.csv"));
        CHECK(fs::exists(dir / "out" / "plot_trace.py"));

        opt.runs = 20;
        opt.seed = 3;
        r = run_cli("montecarlo", opt);
        CHECK(r.code == cli::kSuccess);
        const json rep = json::parse(read_text((dir / "out" / "report.json").string()));
        CHECK(rep["config_digest"] == parse_config(benchmark_doc()).digest);
        CHECK(rep["runs"] == 20);
        CHECK(rep["transitions"].size() == 6);
        CHECK(fs::exists(dir / "out" / "plot_histogram.py"));

        const std::string first = read_text((dir / "out" / "report.json").string());
        CHECK(run_cli("montecarlo", opt).code == cli::kSuccess);
        CHECK(read_text((dir / "out" / "report.json").string()) == first);
    }
}

TEST_CASE("command line error codes") {
    const fs::path dir = scratch("cli_err");
    json doc = benchmark_doc();
    doc["scenario"]["switches"][1]["mode"] = 4;
    cli::Options opt;
    opt.config = write_config(dir, doc);
    opt.out = (dir / "out").string();
    CliResult r = run_cli("simulate", opt);
    CHECK(r.code == cli::kValidation);
    CHECK(r.err.find("scenario.switches[1].mode") != std::string::npos);

    opt.config = (dir / "nothing.json").string();
    CHECK(run_cli("check", opt).code == cli::kValidation);
    CHECK(run_cli("frobnicate", opt).code == cli::kValidation);

    doc = benchmark_doc();
    doc["system"]["modes"][1] = doc["system"]["modes"][0];
    opt.config = write_config(dir, doc);
    r = run_cli("check", opt);
    CHECK(r.code == cli::kValidation);
    CHECK(run_cli("synthesize", opt).code == cli::kValidation);
}

TEST_CASE("invalidation command") {
    const fs::path dir = scratch("cli_inv");
    cli::Options opt;
    opt.config = kSource + "/configs/invalidation.json";
    opt.out = (dir / "out").string();
    const CliResult r = run_cli("invalidate", opt);
    CHECK(r.code == cli::kSuccess);
    CHECK(r.out.find("first at k=20") != std::string::npos);
    const std::string sweep_csv = read_text((dir / "out" / "sweep.csv").string());
    CHECK(sweep_csv.rfind("k,status,infeasible\n", 0) == 0);
    CHECK(fs::exists(dir / "out" / "outputs.csv"));

    json doc = json::parse(read_text(opt.config));
    doc["invalidation"].erase("generate");
    doc["invalidation"]["data_file"] = (dir / "out" / "outputs.csv").string();
    cli::Options opt2 = opt;
    opt2.config = write_config(dir, doc);
    opt2.out = (dir / "out2").string();
    CHECK(run_cli("invalidate", opt2).code == cli::kSuccess);
    CHECK(read_text((dir / "out2" / "sweep.csv").string()) == sweep_csv);
}
