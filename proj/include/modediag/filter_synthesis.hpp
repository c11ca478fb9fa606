#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modediag/conic.hpp"
#include "modediag/filter_bank.hpp"

namespace modediag {

struct SynthesisConfig {
    int degree = 1;                         ///< d_N
    std::vector<double> roots;              ///< roots of a(q), d_N+1 distinct values in (-1, 1)
    double margin = 1e-6;                   ///< strict-feasibility margin on LMIs
    double alpha = 1.0;
    double gamma = 1.0;
    std::vector<double> alpha_grid;         ///< optional; together with gamma_grid replaces (alpha, gamma)
    std::vector<double> gamma_grid;
    std::optional<Vector> reference_direction;  ///< projection for n_d > 1
    double tol = kDefaultTolerance;

    /// Throws ConfigError on violated invariants.
    void validate() const;
    /// a(q) ascending, monic.
    Vector denominator() const;
    /// a(1)
    double dc_value() const;
};

/// Default log-spaced (alpha, gamma) candidates.
std::vector<double> default_grid();

/// (d_N+1)(n_x+n_y) x 1 column L̄ [I ... I]' C (I - A_cl)^{-1} E, projected on the reference direction.
Matrix build_script_L(const ClosedLoopMode& clm, const SynthesisConfig& cfg);

/// H̄ for the DAE of a status.
Matrix stacked_H(const ClosedLoopMode& clm, int degree);

/// Numerical rank with singular values below 1e-9 sigma_max treated as zero.
int numerical_rank(const Matrix& M);

struct UnmatchedReport {
    int plant = 0;
    bool stable = false;
    bool rank_ok = false;
    int rank_augmented = 0;
};

struct FeasibilityReport {
    int controller = 0;
    int target = 0;
    bool degree_ok = false;
    int rows = 0;
    int rank_H = 0;
    bool filter_stable = false;
    bool matched_stable = false;
    std::vector<UnmatchedReport> unmatched;

    bool passed() const;
    std::vector<int> enforced() const;  ///< stable unmatched plant modes
    std::string summary() const;
};

FeasibilityReport check_feasibility(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int i, int j);

/// Variable bookkeeping of an assembled program.
struct AssembledProgram {
    ConicProgram program;
    int controller = 0, target = 0;
    std::vector<int> enforced;
    std::map<int, int> signs;
    std::vector<std::vector<int>> N_vars;  ///< [m][col] variable indices
    std::map<int, int> eta_vars;           ///< plant mode -> variable
    ExprMatrix P_matched;
    std::map<int, ExprMatrix> P_unmatched;
    bool no_stable_unmatched = false;

    Matrix extract_N(const Vector& x) const;
};

AssembledProgram assemble_program(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int i, int j,
                                  const std::map<int, int>& sign_pattern, double alpha, double gamma);

/// All 2^(m-1) patterns with the first enforced mode fixed to +1.
std::vector<std::map<int, int>> sign_patterns(const std::vector<int>& enforced);

/// Independent checks of a filter's N, eta, P against the system.
FilterCertificates certify(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, const ResidualFilter& f,
                           const std::map<int, Matrix>& P_unmatched);

ResidualFilter synthesize_pair(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int i, int j);

/// Synthesizes every pair, `jobs` at a time (0 = hardware concurrency).
FilterBank synthesize_bank(const SwitchedAffineSystem& system, const SynthesisConfig& cfg, int jobs = 0);

}  // namespace modediag
