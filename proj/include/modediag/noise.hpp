#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace modediag {

enum class NoiseKind { Gaussian, UniformBounded, Rademacher };

/// Zero-mean iid noise. `parameter` is the standard deviation for Gaussian noise and the bound c
/// for the bounded families; in each case it is the sub-Gaussian parameter of a component.
struct NoiseFamily {
    NoiseKind kind = NoiseKind::Gaussian;
    double parameter = 1.0;
};

const char* to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

Eigen::VectorXd noise_sample(const NoiseFamily& family, int dim, std::mt19937_64& rng);

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of run `index` derived from a base seed.
std::uint64_t run_seed(std::uint64_t base, std::uint64_t index);

}  // namespace modediag
