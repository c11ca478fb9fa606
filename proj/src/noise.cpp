#include "modediag/noise.hpp"

#include "modediag/errors.hpp"

namespace modediag {

const char* to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::UniformBounded: return "uniform";
        case NoiseKind::Rademacher: return "rademacher";
    }
    return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "gaussian") return NoiseKind::Gaussian;
    if (name == "uniform") return NoiseKind::UniformBounded;
    if (name == "rademacher") return NoiseKind::Rademacher;
    throw DomainError("unknown noise family '" + name + "'");
}

Eigen::VectorXd noise_sample(const NoiseFamily& family, int dim, std::mt19937_64& rng) {
    if (dim < 0) throw DimensionError("negative noise dimension");
    if (!(family.parameter >= 0.0)) throw DomainError("noise parameter must be nonnegative");
    Eigen::VectorXd w(dim);
    const double c = family.parameter;
    switch (family.kind) {
        case NoiseKind::Gaussian: {
            std::normal_distribution<double> dist(0.0, 1.0);
            for (int k = 0; k < dim; ++k) w(k) = c * dist(rng);
            break;
        }
        case NoiseKind::UniformBounded: {
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            for (int k = 0; k < dim; ++k) w(k) = c * dist(rng);
            break;
        }
        case NoiseKind::Rademacher:
            for (int k = 0; k < dim; ++k) w(k) = (rng() >> 63) ? c : -c;
            break;
    }
    return w;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t run_seed(std::uint64_t base, std::uint64_t index) { return splitmix64(base ^ splitmix64(index)); }

}  // namespace modediag
