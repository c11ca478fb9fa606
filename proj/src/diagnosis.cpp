#include "modediag/diagnosis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modediag/errors.hpp"
#include "modediag/filter_runtime.hpp"
#include "modediag/polynomial.hpp"

namespace modediag {

void DiagnosisInputs::validate(int nd) const {
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("diagnosis.beta", "must lie in (0, 1]");
    if (!(mu > 0.0)) throw ConfigError("diagnosis.mu", "must be positive");
    if (!(mu_bar > 0.0)) throw ConfigError("diagnosis.mu_bar", "must be positive");
    if (!(zeta >= 0.0)) throw ConfigError("diagnosis.zeta", "must be nonnegative");
    if (reference.size() != nd) throw ConfigError("diagnosis.reference", "needs n_d entries");
}

double threshold_multiplier(double mu, double beta, double zeta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
    if (!(mu >= 0.0) || !(zeta >= 0.0)) throw DomainError("mu and zeta must be nonnegative");
    return mu + zeta * std::sqrt(2.0 * std::log(2.0 / beta));
}

double threshold(double eta_bar, double mu, double beta, double zeta) {
    if (!(eta_bar >= 0.0)) throw DomainError("eta_bar must be nonnegative");
    return threshold_multiplier(mu, beta, zeta) * std::sqrt(eta_bar);
}

Matrix partial_fractions(const Matrix& Nhat, std::span<const double> roots) {
    const auto nr = static_cast<Eigen::Index>(roots.size());
    if (Nhat.rows() != nr) throw DimensionError("numerator degree must be one less than the number of roots");
    for (std::size_t a = 0; a < roots.size(); ++a)
        for (std::size_t b = 0; b < a; ++b)
            if (std::abs(roots[a] - roots[b]) < 1e-9) throw RepeatedRoots("denominator roots are not distinct");
    Matrix B(nr, Nhat.cols());
    for (Eigen::Index l = 0; l < nr; ++l) {
        const double lam = roots[static_cast<std::size_t>(l)];
        double denom = 1.0;
        for (Eigen::Index o = 0; o < nr; ++o)
            if (o != l) denom *= roots[static_cast<std::size_t>(o)] - lam;
        for (Eigen::Index h = 0; h < Nhat.cols(); ++h) {
            double num = 0.0;
            double p = 1.0;
            for (Eigen::Index m = 0; m < nr; ++m) {
                num += Nhat(m, h) * p;
                p *= lam;
            }
            B(l, h) = -num / denom;
        }
    }
    return B;
}

int matched_time_from_psi(double psi, double level, double lambda_max) {
    if (!(lambda_max > 0.0 && lambda_max < 1.0)) throw DegenerateRate("lambda_max must lie in (0, 1)");
    if (!(level > 0.0)) throw DomainError("mu sqrt(eta_bar) must be positive");
    if (!(psi >= 0.0)) throw DomainError("psi must be nonnegative");
    if (psi <= level) return 0;
    const double steps = std::log(psi / level) / std::log(1.0 / lambda_max);
    return std::max(0, static_cast<int>(std::ceil(steps - 1e-9)));
}

namespace {

double lambda_max(const std::vector<double>& roots) {
    double m = 0.0;
    for (double r : roots) m = std::max(m, std::abs(r));
    return m;
}

Vector modal_filter_state(const ResidualFilter& filter, const Vector& xbar) {
    const auto nf = static_cast<Eigen::Index>(filter.roots.size());
    Matrix V(nf, nf);
    for (Eigen::Index l = 0; l < nf; ++l) {
        const Matrix shifted = filter.A_r - filter.roots[l] * Matrix::Identity(nf, nf);
        const Matrix kernel = Eigen::FullPivLU<Matrix>(shifted).kernel();
        if (kernel.cols() != 1) throw DegenerateRate("filter poles must be distinct");
        const double scale = (filter.C_r * kernel.col(0))(0);
        if (std::abs(scale) < 1e-14) throw DegenerateRate("filter realization is not observable");
        V.col(l) = kernel.col(0) / scale;
    }
    return V.fullPivLu().solve(xbar);
}

}  // namespace

double transient_bound(const ResidualFilter& filter, const Vector& X) {
    const auto nf = filter.N.rows();
    const auto nx = X.size() - nf;
    if (nx < 1 || filter.N.cols() <= nx) throw DimensionError("augmented state does not match the filter");
    const double lm = lambda_max(filter.roots);
    if (!(lm > 0.0 && lm < 1.0)) throw DegenerateRate("lambda_max must lie in (0, 1)");
    const Matrix B = partial_fractions(filter.N.leftCols(nx), filter.roots);
    const double bnorm = B.size() ? Eigen::JacobiSVD<Matrix>(B).singularValues()(0) : 0.0;
    Vector Xm = X;
    Xm.tail(nf) = modal_filter_state(filter, X.tail(nf));
    return std::sqrt(static_cast<double>(nf)) * (1.0 + bnorm / lm) * Xm.norm();
}

int matched_time(const ResidualFilter& filter, const Vector& X, double mu, double eta_bar) {
    return matched_time_from_psi(transient_bound(filter, X), mu * std::sqrt(eta_bar), lambda_max(filter.roots));
}

Vector switch_state(const SwitchedAffineSystem& system, const FilterBank& bank, int i, int j,
                    const Vector& reference) {
    return augmented_steady_state(augmented(system, bank.filter(i, j), i, i), reference);
}

int matched_time(const SwitchedAffineSystem& system, const FilterBank& bank, int i, int j, double mu,
                 const Vector& eta_bar, const Vector& reference) {
    return matched_time(bank.filter(i, j), switch_state(system, bank, i, j, reference), mu, eta_bar(i - 1));
}

int waiting_time(const SwitchedAffineSystem& system, const FilterBank& bank, int j, double mu, const Vector& eta_bar,
                 const Vector& reference) {
    const ResidualFilter& f = bank.filter(j, j);
    const int n = system.n_modes();
    if (n == 1) {
        const Vector X = augmented_steady_state(augmented(system, f, j, j), reference);
        return matched_time(f, X, mu, eta_bar(j - 1));
    }
    double worst = -1.0;
    Vector entry;
    for (int i = 1; i <= n; ++i) {
        if (i == j) continue;
        Vector X = augmented_steady_state(augmented(system, f, i, i), reference);
        const AugmentedSystem after = augmented(system, f, i, j);
        const Vector drive = after.E * reference;
        const int steps = matched_time(system, bank, i, j, mu, eta_bar, reference);
        for (int k = 0; k < steps; ++k) X = after.A * X + drive;
        if (X.norm() > worst) {
            worst = X.norm();
            entry = X;
        }
    }
    return matched_time(f, entry, mu, eta_bar(j - 1));
}

DiagnosisParams compute_params(const SwitchedAffineSystem& system, const FilterBank& bank,
                               const DiagnosisInputs& inputs) {
    inputs.validate(system.dims().nd);
    const int n = system.n_modes();
    if (bank.n_modes() != n) throw DimensionError("filter bank does not match the system");
    DiagnosisParams p;
    p.inputs = inputs;
    p.eta_bar = bank.eta_bar();
    p.epsilon.resize(n);
    for (int i = 0; i < n; ++i) p.epsilon(i) = threshold(p.eta_bar(i), inputs.mu, inputs.beta, inputs.zeta);
    p.T = Eigen::MatrixXi::Zero(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (i != j) p.T(i - 1, j - 1) = matched_time(system, bank, i, j, inputs.mu, p.eta_bar, inputs.reference);
    p.tau.resize(n);
    for (int j = 1; j <= n; ++j) p.tau(j - 1) = waiting_time(system, bank, j, inputs.mu, p.eta_bar, inputs.reference);
    return p;
}

DiagnosisState diagnosis_step(const DiagnosisState& state, std::span<const double> residuals,
                              const DiagnosisParams& params) {
    const int n = params.n_modes();
    if (static_cast<int>(residuals.size()) != n) throw DimensionError("one residual per mode is required");
    if (state.estimate < 1 || state.estimate > n) throw IndexError("estimate out of range");
    DiagnosisState next = state;
    next.tick = state.tick + 1;

    std::size_t best = 0;
    for (std::size_t h = 1; h < residuals.size(); ++h)
        if (residuals[h] < residuals[best]) best = h;
    double others = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < residuals.size(); ++h)
        if (h != best) others = std::min(others, residuals[h]);

    const double eps = params.epsilon(state.estimate - 1);
    const bool separated = residuals[best] <= eps && eps < others;
    const bool waited = state.tick >= state.last_isolation + params.tau(state.estimate - 1);
    const int candidate = static_cast<int>(best) + 1;
    if (separated && waited && candidate != state.estimate) {
        next.estimate = candidate;
        next.last_isolation = state.tick + 1;
    }
    return next;
}

ExcitationResult excitation_check(const SwitchedAffineSystem& system, const FilterBank& bank, const Vector& reference,
                                  int i, int j, int h, double mu_bar, double epsilon, double eta_bar) {
    const ClosedLoopMode clm = closed_loop(system, i, j);
    if (!spectral_radius_stable(clm.A_cl)) throw Unstable("status is not stable");
    const ResidualFilter& f = bank.filter(i, h);
    const Vector y = clm.C * steady_state(clm, reference);
    ExcitationResult res;
    res.expected = std::abs((f.B_r.colwise().sum() * y)(0)) / poly_value(f.denominator, 1.0);
    res.required = epsilon + mu_bar * std::sqrt(eta_bar);
    res.passed = res.expected >= res.required;
    return res;
}

}  // namespace modediag
