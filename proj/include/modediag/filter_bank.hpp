#pragma once

#include <map>
#include <string>
#include <vector>

#include "modediag/system_model.hpp"

namespace modediag {

/// Independent post-solve checks of one synthesized filter.
struct FilterCertificates {
    double decoupling = 0.0;                      ///< max |N(q) H(q)| over sampled q
    double stacked_decoupling = 0.0;              ///< max |N̄ H̄|
    std::map<int, double> steady_gain;            ///< signed a(1)^{-1} N̄ L_ih per enforced h
    std::map<int, double> gramian_h2sq;           ///< H2 norm squared from the Gramian, per h (incl. matched)
    std::map<int, double> nonlinear_min_eig;      ///< min eigenvalue of the original nonlinear block, per enforced h
    double matched_min_eig = 0.0;                 ///< min eigenvalue of the matched variance block

    /// Checks the thresholds quoted for delivered filters.
    bool passed(const std::map<int, double>& eta, double margin, std::string* why = nullptr) const;
};

/// Residual generator a(q)^{-1} N_ij(q) [0; -I] y for controller i and hypothesized plant mode j.
struct ResidualFilter {
    int controller = 0;
    int target = 0;
    Matrix N;                     ///< row m holds N_{ij,m}, (d_N+1) x (n_x+n_y)
    Vector denominator;           ///< ascending coefficients of a(q), monic, size d_N+2
    std::vector<double> roots;
    Matrix A_r, B_r, C_r;         ///< observable realization
    std::map<int, double> eta;    ///< certified variance bounds, keyed by plant mode (matched included)
    std::map<int, int> signs;     ///< sign pattern of the enforced steady gains
    double alpha = 1.0;
    double gamma = 1.0;
    bool no_stable_unmatched = false;
    FilterCertificates certificates;
    std::vector<std::string> notes;

    int degree() const noexcept { return static_cast<int>(N.rows()) - 1; }
    double eta_matched() const;
};

/// All filters of a system, addressed by (controller, target). For systems without a control
/// channel only one filter per target is stored and the controller index is ignored.
class FilterBank {
public:
    FilterBank() = default;
    FilterBank(int n_modes, bool autonomous, std::vector<ResidualFilter> filters);

    int n_modes() const noexcept { return n_; }
    bool autonomous() const noexcept { return autonomous_; }
    const ResidualFilter& filter(int controller, int target) const;
    const std::vector<ResidualFilter>& filters() const noexcept { return filters_; }

    /// eta_bar_i = max_j eta_ijj, one entry per controller mode.
    Vector eta_bar() const;
    int degree() const;
    const std::vector<double>& roots() const;

private:
    int n_ = 0;
    bool autonomous_ = false;
    std::vector<ResidualFilter> filters_;
};

}  // namespace modediag
