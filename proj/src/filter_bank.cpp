#include "modediag/filter_bank.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "modediag/errors.hpp"

namespace modediag {

bool FilterCertificates::passed(const std::map<int, double>& eta, double margin, std::string* why) const {
    std::ostringstream msg;
    bool ok = true;
    if (decoupling > 1e-7) {
        ok = false;
        msg << "decoupling " << decoupling << "; ";
    }
    for (const auto& [h, g] : steady_gain)
        if (g < 1.0 - 1e-6) {
            ok = false;
            msg << "steady gain h=" << h << " " << g << "; ";
        }
    for (const auto& [h, v] : gramian_h2sq) {
        auto it = eta.find(h);
        if (it == eta.end() || v > it->second + 1e-6) {
            ok = false;
            msg << "gramian h=" << h << " " << v << "; ";
        }
    }
    for (const auto& [h, e] : nonlinear_min_eig)
        if (e < margin - 1e-7) {
            ok = false;
            msg << "nonlinear block h=" << h << " min eig " << e << "; ";
        }
    if (why) *why = msg.str();
    return ok;
}

double ResidualFilter::eta_matched() const {
    auto it = eta.find(target);
    if (it == eta.end()) throw IndexError("filter has no matched bound");
    return it->second;
}

FilterBank::FilterBank(int n_modes, bool autonomous, std::vector<ResidualFilter> filters)
    : n_(n_modes), autonomous_(autonomous), filters_(std::move(filters)) {
    const std::size_t expected = autonomous ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_ * n_);
    if (n_ < 1 || filters_.size() != expected) throw DimensionError("filter bank does not cover all pairs");
    std::sort(filters_.begin(), filters_.end(), [](const ResidualFilter& a, const ResidualFilter& b) {
        return std::pair(a.controller, a.target) < std::pair(b.controller, b.target);
    });
    for (std::size_t k = 0; k < filters_.size(); ++k) {
        const int i = autonomous_ ? 1 : static_cast<int>(k) / n_ + 1;
        const int j = static_cast<int>(k) % n_ + 1;
        if (filters_[k].controller != i || filters_[k].target != j)
            throw DimensionError("filter bank has duplicate or missing pairs");
        if (filters_[k].N.rows() != filters_.front().N.rows() || filters_[k].roots != filters_.front().roots)
            throw DimensionError("filters in a bank must share a(q)");
    }
}

const ResidualFilter& FilterBank::filter(int controller, int target) const {
    if (controller < 1 || controller > n_ || target < 1 || target > n_)
        throw IndexError("filter index (" + std::to_string(controller) + "," + std::to_string(target) +
                         ") out of range");
    const int i = autonomous_ ? 0 : controller - 1;
    return filters_[static_cast<std::size_t>(i * n_ + target - 1)];
}

Vector FilterBank::eta_bar() const {
    Vector out(n_);
    for (int i = 1; i <= n_; ++i) {
        double m = 0.0;
        for (int j = 1; j <= n_; ++j) m = std::max(m, filter(i, j).eta_matched());
        out(i - 1) = m;
    }
    return out;
}

int FilterBank::degree() const {
    if (filters_.empty()) throw DimensionError("empty filter bank");
    return filters_.front().degree();
}

const std::vector<double>& FilterBank::roots() const {
    if (filters_.empty()) throw DimensionError("empty filter bank");
    return filters_.front().roots;
}

}  // namespace modediag
