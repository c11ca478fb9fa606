#include "modediag/serialization.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "modediag/errors.hpp"
#include "modediag/filter_runtime.hpp"

namespace modediag {

using json = nlohmann::ordered_json;

namespace {

/// Typed access to one JSON object with path-aware errors and unknown-key rejection.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& get(const std::string& key) const {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "missing required field");
        return j_.at(key);
    }

    double number(const std::string& key) const {
        const json& v = get(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    long integer(const std::string& key) const {
        const json& v = get(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<long>();
    }
    long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = get(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError(at(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key) const {
        const json& v = get(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }

    Matrix matrix(const std::string& key) const { return matrix_from_json(get(key), at(key)); }

    Vector vector(const std::string& key) const {
        const json& v = get(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array of numbers");
        Vector out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v[k].is_number()) throw ConfigError(at(key) + "[" + std::to_string(k) + "]", "expected a number");
            out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
        }
        return out;
    }

    Node child(const std::string& key) const { return Node(get(key), at(key)); }

    /// Throws on keys that were never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

void check_version(const Node& root) {
    const long v = root.integer("format_version");
    if (v != kFormatVersion) throw ConfigError(root.at("format_version"), "unsupported version " + std::to_string(v));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

ModeMatrices parse_mode(const Node& n) {
    ModeMatrices m;
    m.A = n.matrix("A");
    m.E = n.matrix("E");
    m.C = n.matrix("C");
    m.D = n.matrix("D");
    const auto nx = m.A.rows();
    m.B = n.has("B") ? n.matrix("B") : Matrix::Zero(nx, 1);
    m.K = n.has("K") ? n.matrix("K") : Matrix::Zero(m.B.cols(), m.C.rows());
    m.W = n.has("W") ? n.matrix("W") : Matrix::Zero(nx, m.D.cols());
    n.finish();
    return m;
}

SynthesisConfig parse_synthesis(const Node& n) {
    SynthesisConfig c;
    c.degree = static_cast<int>(n.integer("degree"));
    c.roots = to_std(n.vector("roots"));
    c.margin = n.number("margin", c.margin);
    c.alpha = n.number("alpha", c.alpha);
    c.gamma = n.number("gamma", c.gamma);
    c.tol = n.number("tol", c.tol);
    if (n.has("grid")) {
        const json& g = n.get("grid");
        if (g.is_string()) {
            if (g.get<std::string>() != "default") throw ConfigError(n.at("grid"), "expected \"default\" or an object");
            c.alpha_grid = c.gamma_grid = default_grid();
        } else {
            Node gn(g, n.at("grid"));
            c.alpha_grid = to_std(gn.vector("alpha"));
            c.gamma_grid = to_std(gn.vector("gamma"));
            gn.finish();
        }
    }
    if (n.has("reference_direction")) c.reference_direction = n.vector("reference_direction");
    n.finish();
    c.validate();
    return c;
}

DiagnosisInputs parse_diagnosis(const Node& n) {
    DiagnosisInputs d;
    d.beta = n.number("beta", d.beta);
    d.mu = n.number("mu", d.mu);
    d.mu_bar = n.number("mu_bar", d.mu_bar);
    d.zeta = n.number("zeta", d.zeta);
    d.reference = n.vector("reference");
    n.finish();
    return d;
}

Scenario parse_scenario(const Node& n, const DiagnosisInputs& diag) {
    Scenario s;
    s.horizon = n.integer("horizon");
    s.initial_mode = static_cast<int>(n.integer("initial_mode", 1));
    if (n.has("switches")) {
        const json& arr = n.get("switches");
        if (!arr.is_array()) throw ConfigError(n.at("switches"), "expected an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            Node sw(arr[k], n.at("switches") + "[" + std::to_string(k) + "]");
            s.switches.push_back({sw.integer("time"), static_cast<int>(sw.integer("mode"))});
            sw.finish();
        }
    }
    if (n.has("initial_state")) {
        const json& v = n.get("initial_state");
        if (v.is_string()) {
            if (v.get<std::string>() != "steady") throw ConfigError(n.at("initial_state"), "expected \"steady\" or a vector");
        } else {
            s.initial_state = n.vector("initial_state");
        }
    }
    if (n.has("noise")) {
        Node nn = n.child("noise");
        try {
            s.noise.kind = noise_kind_from_string(nn.string("family"));
        } catch (const DomainError& e) {
            throw ConfigError(nn.at("family"), e.what());
        }
        s.noise.parameter = nn.number("parameter", 1.0);
        nn.finish();
    }
    s.seed = n.unsigned_integer("seed", 1);
    s.reference = diag.reference;
    n.finish();
    return s;
}

InvalidationConfig parse_invalidation(const Node& n, int /*unused*/ = 0) {
    InvalidationConfig c;
    {
        Node m = n.child("model");
        c.model.A = m.matrix("A");
        c.model.E = m.matrix("E");
        c.model.C = m.matrix("C");
        c.model.nominal_input = m.vector("nominal_input");
        c.model.uncertain_input = static_cast<int>(m.integer("uncertain_input", 0));
        m.finish();
        c.model.validate();
    }
    {
        Node b = n.child("bounds");
        c.bounds.x_lo = b.vector("x_lower");
        c.bounds.x_hi = b.vector("x_upper");
        c.bounds.nu_lo = b.number("nu_lower");
        c.bounds.nu_hi = b.number("nu_upper");
        c.bounds.w_lo = b.vector("w_lower");
        c.bounds.w_hi = b.vector("w_upper");
        b.finish();
        c.bounds.validate(static_cast<int>(c.model.A.rows()), static_cast<int>(c.model.C.rows()));
    }
    c.window = static_cast<int>(n.integer("window", 5));
    if (c.window < 2) throw ConfigError(n.at("window"), "must be at least 2");
    if (n.has("data_file")) c.data_file = n.string("data_file");
    if (n.has("generate")) {
        Node g = n.child("generate");
        InvalidationDataConfig d;
        d.horizon = g.integer("horizon", d.horizon);
        d.seed = g.unsigned_integer("seed", d.seed);
        d.spread = g.number("spread", d.spread);
        d.initial_state = g.vector("initial_state");
        if (d.initial_state.size() != c.model.A.rows()) throw ConfigError(g.at("initial_state"), "needs n_x entries");
        if (g.has("fault")) {
            Node f = g.child("fault");
            OutputFault fault;
            fault.onset = f.integer("onset");
            if (f.has("C")) fault.C = f.matrix("C");
            if (f.has("offset")) fault.offset = f.vector("offset");
            f.finish();
            d.fault = fault;
        }
        g.finish();
        c.generate = d;
    }
    if (c.data_file.has_value() == c.generate.has_value())
        throw ConfigError(n.at("data_file"), "give exactly one of data_file and generate");
    n.finish();
    return c;
}

json vec_json(const Vector& v) { return json(to_std(v)); }

}  // namespace

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty list of rows");
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) throw ConfigError(path + "[0]", "expected a nonempty row");
    Matrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(rp, "rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ConfigError(rp + "[" + std::to_string(c) + "]", "expected a number");
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return M;
}

std::string config_digest(const json& doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : doc.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ProjectConfig parse_config(const json& doc, const std::string& base_dir) {
    Node root(doc, "");
    check_version(root);
    ProjectConfig cfg;
    cfg.base_dir = base_dir;
    cfg.digest = config_digest(doc);
    {
        Node sys = root.child("system");
        const json& modes = sys.get("modes");
        if (!modes.is_array() || modes.empty()) throw ConfigError("system.modes", "expected a nonempty array");
        for (std::size_t k = 0; k < modes.size(); ++k)
            cfg.modes.push_back(parse_mode(Node(modes[k], "system.modes[" + std::to_string(k) + "]")));
        sys.finish();
        try {
            (void)cfg.system();
        } catch (const DimensionError& e) {
            throw ConfigError("system.modes", e.what());
        }
    }
    const SwitchedAffineSystem system = cfg.system();
    const auto& dm = system.dims();
    cfg.synthesis = parse_synthesis(root.child("synthesis"));
    cfg.diagnosis = parse_diagnosis(root.child("diagnosis"));
    cfg.diagnosis.validate(dm.nd);
    if (root.has("scenario")) {
        cfg.scenario = parse_scenario(root.child("scenario"), cfg.diagnosis);
        cfg.scenario->validate(system.n_modes(), dm.nx, dm.nd);
    }
    if (root.has("montecarlo")) {
        Node mc = root.child("montecarlo");
        cfg.runs = static_cast<int>(mc.integer("runs", cfg.runs));
        if (cfg.runs < 1) throw ConfigError("montecarlo.runs", "must be positive");
        cfg.seed = mc.unsigned_integer("seed", cfg.seed);
        mc.finish();
    }
    if (root.has("invalidation")) cfg.invalidation = parse_invalidation(root.child("invalidation"));
    if (root.has("output")) cfg.output_dir = root.string("output");
    root.finish();
    return cfg;
}

ProjectConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc, std::filesystem::path(path).parent_path().string());
}

json bank_to_json(const FilterBank& bank, const std::string& digest) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "filter_bank";
    j["config_digest"] = digest;
    j["n_modes"] = bank.n_modes();
    j["autonomous"] = bank.autonomous();
    j["degree"] = bank.degree();
    j["roots"] = bank.roots();
    j["eta_bar"] = vec_json(bank.eta_bar());
    json filters = json::array();
    for (const auto& f : bank.filters()) {
        json fj;
        fj["controller"] = f.controller;
        fj["target"] = f.target;
        fj["N"] = matrix_to_json(f.N);
        fj["ny"] = f.B_r.cols();
        fj["denominator"] = vec_json(f.denominator);
        json eta = json::object();
        for (const auto& [h, v] : f.eta) eta[std::to_string(h)] = v;
        fj["eta"] = eta;
        json signs = json::object();
        for (const auto& [h, s] : f.signs) signs[std::to_string(h)] = s;
        fj["signs"] = signs;
        fj["alpha"] = f.alpha;
        fj["gamma"] = f.gamma;
        fj["no_stable_unmatched"] = f.no_stable_unmatched;
        json cert;
        const auto& c = f.certificates;
        cert["decoupling"] = c.decoupling;
        cert["stacked_decoupling"] = c.stacked_decoupling;
        cert["matched_min_eig"] = c.matched_min_eig;
        auto keyed = [](const std::map<int, double>& m) {
            json o = json::object();
            for (const auto& [h, v] : m) o[std::to_string(h)] = v;
            return o;
        };
        cert["steady_gain"] = keyed(c.steady_gain);
        cert["gramian_h2sq"] = keyed(c.gramian_h2sq);
        cert["nonlinear_min_eig"] = keyed(c.nonlinear_min_eig);
        fj["certificates"] = cert;
        fj["notes"] = f.notes;
        filters.push_back(fj);
    }
    j["filters"] = filters;
    return j;
}

FilterBank bank_from_json(const json& j) {
    Node root(j, "");
    check_version(root);
    if (root.string("kind") != "filter_bank") throw ConfigError("kind", "not a filter bank file");
    const int n = static_cast<int>(root.integer("n_modes"));
    const bool autonomous = root.get("autonomous").get<bool>();
    const json& arr = root.get("filters");
    if (!arr.is_array()) throw ConfigError("filters", "expected an array");
    auto keyed = [](const json& o, const std::string& path) {
        std::map<int, double> m;
        if (!o.is_object()) throw ConfigError(path, "expected an object");
        for (auto it = o.begin(); it != o.end(); ++it) m[std::stoi(it.key())] = it.value().get<double>();
        return m;
    };
    std::vector<ResidualFilter> filters;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string p = "filters[" + std::to_string(k) + "]";
        Node fn(arr[k], p);
        ResidualFilter f;
        f.controller = static_cast<int>(fn.integer("controller"));
        f.target = static_cast<int>(fn.integer("target"));
        f.N = fn.matrix("N");
        f.denominator = fn.vector("denominator");
        const int ny = static_cast<int>(fn.integer("ny"));
        const Realization r = realize(f.N, f.denominator, ny);
        f.A_r = r.A_r;
        f.B_r = r.B_r;
        f.C_r = r.C_r;
        f.eta = keyed(fn.get("eta"), p + ".eta");
        for (const auto& [h, s] : keyed(fn.get("signs"), p + ".signs")) f.signs[h] = static_cast<int>(s);
        f.alpha = fn.number("alpha");
        f.gamma = fn.number("gamma");
        f.no_stable_unmatched = fn.get("no_stable_unmatched").get<bool>();
        Node cn = fn.child("certificates");
        f.certificates.decoupling = cn.number("decoupling");
        f.certificates.stacked_decoupling = cn.number("stacked_decoupling");
        f.certificates.matched_min_eig = cn.number("matched_min_eig");
        f.certificates.steady_gain = keyed(cn.get("steady_gain"), p + ".certificates.steady_gain");
        f.certificates.gramian_h2sq = keyed(cn.get("gramian_h2sq"), p + ".certificates.gramian_h2sq");
        f.certificates.nonlinear_min_eig = keyed(cn.get("nonlinear_min_eig"), p + ".certificates.nonlinear_min_eig");
        cn.finish();
        f.notes = fn.get("notes").get<std::vector<std::string>>();
        fn.finish();
        filters.push_back(std::move(f));
    }
    for (const char* key : {"config_digest", "degree", "eta_bar"}) (void)root.get(key);
    const json& roots = root.get("roots");
    for (auto& f : filters) f.roots = roots.get<std::vector<double>>();
    root.finish();
    try {
        return FilterBank(n, autonomous, std::move(filters));
    } catch (const DimensionError& e) {
        throw ConfigError("filters", e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot write file");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void save_bank(const std::string& path, const FilterBank& bank, const std::string& digest) {
    write_text(path, bank_to_json(bank, digest).dump(2) + "\n");
}

FilterBank load_bank(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("malformed JSON: ") + e.what());
    }
    return bank_from_json(j);
}

json params_to_json(const DiagnosisParams& p, const std::string& digest) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "diagnosis_params";
    j["config_digest"] = digest;
    j["beta"] = p.inputs.beta;
    j["mu"] = p.inputs.mu;
    j["mu_bar"] = p.inputs.mu_bar;
    j["zeta"] = p.inputs.zeta;
    j["reference"] = vec_json(p.inputs.reference);
    j["eta_bar"] = vec_json(p.eta_bar);
    j["epsilon"] = vec_json(p.epsilon);
    j["T"] = matrix_to_json(p.T.cast<double>());
    j["tau"] = vec_json(p.tau.cast<double>());
    return j;
}

DiagnosisParams params_from_json(const json& j) {
    Node root(j, "");
    check_version(root);
    if (root.string("kind") != "diagnosis_params") throw ConfigError("kind", "not a diagnosis parameter file");
    (void)root.get("config_digest");
    DiagnosisParams p;
    p.inputs.beta = root.number("beta");
    p.inputs.mu = root.number("mu");
    p.inputs.mu_bar = root.number("mu_bar");
    p.inputs.zeta = root.number("zeta");
    p.inputs.reference = root.vector("reference");
    p.eta_bar = root.vector("eta_bar");
    p.epsilon = root.vector("epsilon");
    p.T = root.matrix("T").cast<int>();
    p.tau = root.vector("tau").cast<int>();
    root.finish();
    return p;
}

json report_to_json(const MonteCarloReport& r, const std::string& digest) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "montecarlo_report";
    j["config_digest"] = digest;
    j["runs"] = r.runs;
    j["seed"] = r.seed;
    json rows = json::array();
    for (const auto& t : r.transitions) {
        json row;
        row["from"] = t.from;
        row["to"] = t.to;
        row["switch_time"] = t.switch_time;
        row["runs"] = t.runs;
        row["adt"] = t.adt();
        row["wdp"] = t.wdp();
        row["correct"] = t.correct;
        row["wrong"] = t.wrong;
        row["missed"] = t.missed;
        json hist = json::object();
        for (const auto& [d, c] : t.histogram) hist[std::to_string(d)] = c;
        row["histogram"] = hist;
        rows.push_back(row);
    }
    j["transitions"] = rows;
    return j;
}

std::string report_to_csv(const MonteCarloReport& r) {
    std::ostringstream os;
    os << "from,to,switch_time,runs,adt,wdp,correct,wrong,missed\n";
    for (const auto& t : r.transitions)
        os << t.from << ',' << t.to << ',' << t.switch_time << ',' << t.runs << ',' << t.adt() << ',' << t.wdp()
           << ',' << t.correct << ',' << t.wrong << ',' << t.missed << '\n';
    return os.str();
}

std::string trace_to_csv(const SimulationTrace& tr, const DiagnosisParams& params) {
    std::ostringstream os;
    os << std::setprecision(17);
    const auto nx = tr.x.empty() ? 0 : tr.x.front().size();
    const auto ny = tr.y.empty() ? 0 : tr.y.front().size();
    os << "k,sigma,sigma_hat";
    for (Eigen::Index c = 0; c < nx; ++c) os << ",x" << c + 1;
    for (Eigen::Index c = 0; c < ny; ++c) os << ",y" << c + 1;
    for (Eigen::Index c = 0; c < tr.residuals.cols(); ++c) os << ",r" << c + 1;
    os << ",eps,isolation\n";
    for (long k = 0; k < tr.horizon(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        os << k << ',' << tr.sigma[ks] << ',' << tr.estimate[ks];
        for (Eigen::Index c = 0; c < nx; ++c) os << ',' << tr.x[ks](c);
        for (Eigen::Index c = 0; c < ny; ++c) os << ',' << tr.y[ks](c);
        for (Eigen::Index c = 0; c < tr.residuals.cols(); ++c) os << ',' << tr.residuals(k, c);
        os << ',' << params.epsilon(tr.estimate[ks] - 1) << ',' << (tr.isolated_at(k) ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string sweep_to_csv(const std::vector<WindowResult>& results) {
    std::ostringstream os;
    os << "k,status,infeasible\n";
    for (const auto& w : results)
        os << w.end << ',' << to_string(w.status) << ',' << (w.status == InvalidationStatus::Infeasible ? 1 : 0) << '\n';
    return os.str();
}

std::vector<Vector> read_output_csv(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::vector<Vector> rows;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty()) continue;  // header
            throw ConfigError(path + ":" + std::to_string(lineno), "non-numeric cell");
        }
        if (!rows.empty() && static_cast<Eigen::Index>(vals.size()) != rows.front().size())
            throw ConfigError(path + ":" + std::to_string(lineno), "row length differs");
        rows.push_back(Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    }
    return rows;
}

std::string export_plot_script(const std::string& trace_path) {
    std::istringstream in(read_text(trace_path));
    std::string header, first;
    if (!std::getline(in, header) || !std::getline(in, first) || first.empty())
        throw ConfigError(trace_path, "trace file has no samples");
    std::vector<std::string> residuals;
    std::stringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ','))
        if (col.size() > 1 && col[0] == 'r' && std::isdigit(static_cast<unsigned char>(col[1]))) residuals.push_back(col);
    if (residuals.empty()) throw ConfigError(trace_path, "trace file has no residual columns");

    std::ostringstream os;
    os << "import pandas as pd\n"
          "import matplotlib.pyplot as plt\n\n"
       << "df = pd.read_csv(" << std::quoted(std::filesystem::path(trace_path).filename().string()) << ")\n"
       << "fig, ax = plt.subplots(figsize=(9, 4))\n";
    for (const auto& r : residuals)
        os << "ax.plot(df['k'], df['" << r << "'].abs(), label='|" << r << "|')\n";
    os << "ax.step(df['k'], df['eps'], where='post', color='k', linestyle='--', label='threshold')\n"
          "for k in df.loc[df['sigma'].diff().fillna(0) != 0, 'k']:\n"
          "    ax.axvline(k, color='tab:red', alpha=0.4)\n"
          "for k in df.loc[df['isolation'] == 1, 'k']:\n"
          "    ax.axvline(k, color='tab:green', linestyle=':', alpha=0.6)\n"
          "ax.set_xlabel('k')\n"
          "ax.set_yscale('log')\n"
          "ax.legend()\n"
          "fig.tight_layout()\n"
          "fig.savefig('trace.png', dpi=150)\n";
    return os.str();
}

std::string export_histogram_script(const std::string& report_path) {
    const json j = json::parse(read_text(report_path));
    if (!j.contains("transitions") || j["transitions"].empty())
        throw ConfigError(report_path, "report has no transitions");
    std::ostringstream os;
    os << "import json\n"
          "import matplotlib.pyplot as plt\n\n"
       << "with open(" << std::quoted(std::filesystem::path(report_path).filename().string()) << ") as fh:\n"
       << "    report = json.load(fh)\n"
          "rows = report['transitions']\n"
          "fig, axes = plt.subplots(1, len(rows), figsize=(3 * len(rows), 3), squeeze=False)\n"
          "for ax, row in zip(axes[0], rows):\n"
          "    delays = sorted(int(d) for d in row['histogram'])\n"
          "    ax.bar(delays, [row['histogram'][str(d)] for d in delays])\n"
          "    ax.set_title(f\"M{row['from']}{row['to']}  ADT {row['adt']:.2f}\")\n"
          "    ax.set_xlabel('delay')\n"
          "fig.tight_layout()\n"
          "fig.savefig('histogram.png', dpi=150)\n";
    return os.str();
}

}  // namespace modediag
