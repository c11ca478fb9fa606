#pragma once

#include <span>
#include <vector>

#include "modediag/filter_bank.hpp"

namespace modediag {

/// User-facing diagnosis settings.
struct DiagnosisInputs {
    double beta = 0.05;    ///< false-alarm level
    double mu = 0.5;       ///< matched-mean margin
    double mu_bar = 0.5;   ///< unmatched separation margin
    double zeta = 1.0;     ///< sub-Gaussian parameter of the noise
    Vector reference;      ///< nominal d̄

    void validate(int nd) const;
};

struct DiagnosisParams {
    DiagnosisInputs inputs;
    Vector eta_bar;        ///< per controller mode
    Vector epsilon;        ///< per controller mode
    Eigen::MatrixXi T;     ///< matched times, T(i-1, j-1); diagonal unused (0)
    Eigen::VectorXi tau;   ///< waiting times per mode

    int n_modes() const noexcept { return static_cast<int>(epsilon.size()); }
};

/// mu + zeta sqrt(2 ln(2/beta))
double threshold_multiplier(double mu, double beta, double zeta);

/// (mu + zeta sqrt(2 ln(2/beta))) sqrt(eta_bar)
double threshold(double eta_bar, double mu, double beta, double zeta);

/// b_{l,h} = -sum_m Nhat_m(h) lambda_l^m / prod_{l' != l}(lambda_l' - lambda_l), rows l, columns h.
Matrix partial_fractions(const Matrix& Nhat, std::span<const double> roots);

/// max(0, ceil(log(psi / level) / log(1 / lambda_max))), level = mu sqrt(eta_bar).
int matched_time_from_psi(double psi, double level, double lambda_max);

/// sqrt(d_N+1) (1 + ||B||_2 / lambda_max) ||X||_2 for a filter and an expected augmented state.
/// The filter part of X is expressed in the diagonal realization (A, B, C = [1 .. 1]).
double transient_bound(const ResidualFilter& filter, const Vector& X);

int matched_time(const ResidualFilter& filter, const Vector& X, double mu, double eta_bar);

/// Expected augmented state at a switch i -> j: steady state of the filter (i,j) in status (i,i).
Vector switch_state(const SwitchedAffineSystem& system, const FilterBank& bank, int i, int j, const Vector& reference);

/// Matched time for the transition i -> j with level mu sqrt(eta_bar_i).
int matched_time(const SwitchedAffineSystem& system, const FilterBank& bank, int i, int j, double mu,
                 const Vector& eta_bar, const Vector& reference);

/// Waiting time after isolating mode j; worst entry state over the transitions i -> j.
int waiting_time(const SwitchedAffineSystem& system, const FilterBank& bank, int j, double mu, const Vector& eta_bar,
                 const Vector& reference);

DiagnosisParams compute_params(const SwitchedAffineSystem& system, const FilterBank& bank,
                               const DiagnosisInputs& inputs);

struct DiagnosisState {
    int estimate = 1;         ///< sigma hat
    long last_isolation = 0;  ///< t_iso
    long tick = 0;            ///< k
};

/// One step of the isolation rule; `residuals[h-1]` holds |r_{sigma hat, h}(k)|.
DiagnosisState diagnosis_step(const DiagnosisState& state, std::span<const double> residuals,
                              const DiagnosisParams& params);

struct ExcitationResult {
    bool passed = false;
    double expected = 0.0;  ///< |E r_ih| in status (i,j)
    double required = 0.0;  ///< eps_i + mu_bar sqrt(eta_bar_i)
    double margin() const { return expected - required; }
};

/// Steady unmatched residual r_ih in status (i,j) against eps_i + mu_bar sqrt(eta_bar_i).
ExcitationResult excitation_check(const SwitchedAffineSystem& system, const FilterBank& bank, const Vector& reference,
                                  int i, int j, int h, double mu_bar, double epsilon, double eta_bar);

}  // namespace modediag
