#include "modediag/invalidation.hpp"

#include <atomic>
#include <thread>

#include "modediag/errors.hpp"

namespace modediag {

void InvalidationModel::validate() const {
    const auto nx = A.rows();
    if (A.cols() != nx || nx < 1) throw ConfigError("invalidation.model.A", "must be square");
    if (E.rows() != nx) throw ConfigError("invalidation.model.E", "needs n_x rows");
    if (C.cols() != nx || C.rows() < 1) throw ConfigError("invalidation.model.C", "needs n_x columns");
    if (nominal_input.size() != E.cols()) throw ConfigError("invalidation.model.nominal_input", "needs one entry per column of E");
    if (uncertain_input < 0 || uncertain_input >= E.cols())
        throw ConfigError("invalidation.model.uncertain_input", "invalid input coordinate");
}

void InvalidationBounds::validate(int nx, int ny) const {
    if (x_lo.size() != nx || x_hi.size() != nx) throw ConfigError("invalidation.bounds.x", "needs n_x entries");
    if (w_lo.size() != ny || w_hi.size() != ny) throw ConfigError("invalidation.bounds.w", "needs n_y entries");
    if ((x_lo.array() > x_hi.array()).any()) throw ConfigError("invalidation.bounds.x", "lower exceeds upper");
    if ((w_lo.array() > w_hi.array()).any()) throw ConfigError("invalidation.bounds.w", "lower exceeds upper");
    if (nu_lo > nu_hi) throw ConfigError("invalidation.bounds.nu", "lower exceeds upper");
}

const char* to_string(InvalidationStatus status) {
    switch (status) {
        case InvalidationStatus::Feasible: return "feasible";
        case InvalidationStatus::Infeasible: return "infeasible";
        case InvalidationStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

namespace {

struct Layout {
    int nx, ny, T;
    int x(int k, int r) const { return k * nx + r; }
    int nu(int k) const { return T * nx + k; }
    int w(int k, int r) const { return T * (nx + 1) + k * ny + r; }
};

Layout layout_of(const InvalidationWindow& win) {
    win.model.validate();
    const int nx = static_cast<int>(win.model.A.rows());
    const int ny = static_cast<int>(win.model.C.rows());
    win.bounds.validate(nx, ny);
    const int T = static_cast<int>(win.outputs.size());
    if (T < 2) throw ConfigError("invalidation.window", "window length must be at least 2");
    for (const auto& y : win.outputs)
        if (y.size() != ny) throw DimensionError("output sample has wrong size");
    return {nx, ny, T};
}

}  // namespace

ConicProgram invalidation_program(const InvalidationWindow& win) {
    const Layout L = layout_of(win);
    const auto& m = win.model;
    const auto& b = win.bounds;
    ConicProgram prog;
    for (int k = 0; k < L.T; ++k)
        for (int r = 0; r < L.nx; ++r) prog.add_variable("x" + std::to_string(k) + "_" + std::to_string(r));
    for (int k = 0; k < L.T; ++k) prog.add_variable("nu" + std::to_string(k));
    for (int k = 0; k < L.T; ++k)
        for (int r = 0; r < L.ny; ++r) prog.add_variable("w" + std::to_string(k) + "_" + std::to_string(r));

    const Vector drive = m.E * m.nominal_input;
    const Vector nu_col = m.E.col(m.uncertain_input);
    for (int k = 0; k + 1 < L.T; ++k)
        for (int r = 0; r < L.nx; ++r) {
            LinExpr e = prog.var(L.x(k + 1, r)) - drive(r) - nu_col(r) * prog.var(L.nu(k));
            for (int c = 0; c < L.nx; ++c)
                if (m.A(r, c) != 0.0) e -= m.A(r, c) * prog.var(L.x(k, c));
            prog.add_equality(e, "dynamics k=" + std::to_string(k));
        }
    for (int k = 0; k < L.T; ++k)
        for (int r = 0; r < L.ny; ++r) {
            LinExpr e = win.outputs[static_cast<std::size_t>(k)](r) - prog.var(L.w(k, r));
            for (int c = 0; c < L.nx; ++c)
                if (m.C(r, c) != 0.0) e -= m.C(r, c) * prog.var(L.x(k, c));
            prog.add_equality(e, "output k=" + std::to_string(k));
        }
    for (int k = 0; k < L.T; ++k) {
        for (int r = 0; r < L.nx; ++r) {
            prog.add_inequality(prog.var(L.x(k, r)) - b.x_lo(r), "x lower");
            prog.add_inequality(b.x_hi(r) - prog.var(L.x(k, r)), "x upper");
        }
        prog.add_inequality(prog.var(L.nu(k)) - b.nu_lo, "nu lower");
        prog.add_inequality(b.nu_hi - prog.var(L.nu(k)), "nu upper");
        for (int r = 0; r < L.ny; ++r) {
            prog.add_inequality(prog.var(L.w(k, r)) - b.w_lo(r), "w lower");
            prog.add_inequality(b.w_hi(r) - prog.var(L.w(k, r)), "w upper");
        }
    }
    return prog;
}

InvalidationResult invalidate(const InvalidationWindow& window, double tol) {
    const Layout L = layout_of(window);
    const SolveReport rep = solve(invalidation_program(window), tol);
    InvalidationResult res;
    res.message = rep.message;
    switch (rep.status) {
        case SolveStatus::Optimal: res.status = InvalidationStatus::Feasible; break;
        case SolveStatus::Infeasible: res.status = InvalidationStatus::Infeasible; return res;
        default: res.status = InvalidationStatus::NumericalFailure; return res;
    }
    for (int k = 0; k < L.T; ++k) {
        Vector x(L.nx), w(L.ny);
        for (int r = 0; r < L.nx; ++r) x(r) = rep.x(L.x(k, r));
        for (int r = 0; r < L.ny; ++r) w(r) = rep.x(L.w(k, r));
        res.x.push_back(x);
        res.w.push_back(w);
        res.nu.push_back(rep.x(L.nu(k)));
    }
    return res;
}

std::vector<WindowResult> sweep(const InvalidationModel& model, const InvalidationBounds& bounds,
                                const std::vector<Vector>& outputs, int length, double tol, int jobs) {
    if (length < 2) throw ConfigError("invalidation.window", "window length must be at least 2");
    const long n = static_cast<long>(outputs.size()) - length + 1;
    if (n < 1) return {};
    std::vector<WindowResult> out(static_cast<std::size_t>(n));
    std::atomic<long> next{0};
    auto worker = [&] {
        for (long s = next++; s < n; s = next++) {
            InvalidationWindow win{model, bounds,
                                   std::vector<Vector>(outputs.begin() + s, outputs.begin() + s + length)};
            out[static_cast<std::size_t>(s)] = {s + length - 1, invalidate(win, tol).status};
        }
    };
    unsigned threads = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

std::vector<Vector> generate_outputs(const InvalidationModel& model, const InvalidationBounds& bounds,
                                     const Vector& x0, long horizon, double spread,
                                     const std::optional<OutputFault>& fault, std::mt19937_64& rng) {
    model.validate();
    bounds.validate(static_cast<int>(model.A.rows()), static_cast<int>(model.C.rows()));
    if (x0.size() != model.A.rows()) throw DimensionError("initial state has wrong size");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double nu_mid = 0.5 * (bounds.nu_lo + bounds.nu_hi);
    const double nu_rad = 0.5 * (bounds.nu_hi - bounds.nu_lo);
    const Vector w_mid = 0.5 * (bounds.w_lo + bounds.w_hi);
    const Vector w_rad = 0.5 * (bounds.w_hi - bounds.w_lo);
    std::vector<Vector> ys;
    Vector x = x0;
    for (long k = 0; k < horizon; ++k) {
        Vector w(model.C.rows());
        for (Eigen::Index r = 0; r < w.size(); ++r) w(r) = w_mid(r) + spread * w_rad(r) * u(rng);
        const bool faulty = fault && k >= fault->onset;
        const Matrix& C = faulty && fault->C ? *fault->C : model.C;
        Vector y = C * x + w;
        if (faulty && fault->offset) y += *fault->offset;
        ys.push_back(y);
        Vector input = model.nominal_input;
        input(model.uncertain_input) += nu_mid + spread * nu_rad * u(rng);
        x = model.A * x + model.E * input;
    }
    return ys;
}

}  // namespace modediag
