#pragma once

#include <optional>
#include <random>
#include <vector>

#include "modediag/conic.hpp"
#include "modediag/system_model.hpp"

namespace modediag {

/// Healthy model x+ = A x + E (T_d + e_idx nu), y = C x + w.
struct InvalidationModel {
    Matrix A, E, C;
    Vector nominal_input;     ///< T_d
    int uncertain_input = 0;  ///< coordinate of T_d perturbed by nu (0-based)

    void validate() const;
};

struct InvalidationBounds {
    Vector x_lo, x_hi;
    double nu_lo = 0.0, nu_hi = 0.0;
    Vector w_lo, w_hi;

    void validate(int nx, int ny) const;
};

struct InvalidationWindow {
    InvalidationModel model;
    InvalidationBounds bounds;
    std::vector<Vector> outputs;  ///< y(0 .. T-1)
};

enum class InvalidationStatus { Feasible, Infeasible, NumericalFailure };
const char* to_string(InvalidationStatus status);

struct InvalidationResult {
    InvalidationStatus status = InvalidationStatus::NumericalFailure;
    std::vector<Vector> x;
    std::vector<double> nu;
    std::vector<Vector> w;
    std::string message;
};

ConicProgram invalidation_program(const InvalidationWindow& window);

InvalidationResult invalidate(const InvalidationWindow& window, double tol = kDefaultTolerance);

struct WindowResult {
    long end = 0;  ///< last tick of the window
    InvalidationStatus status = InvalidationStatus::Feasible;
};

/// Windows of length `length` ending at every tick from length-1 on; evaluated `jobs` at a time.
std::vector<WindowResult> sweep(const InvalidationModel& model, const InvalidationBounds& bounds,
                                const std::vector<Vector>& outputs, int length, double tol = kDefaultTolerance,
                                int jobs = 1);

/// Output corruption from tick `onset` on: y = C_fault x + offset + w.
struct OutputFault {
    long onset = 0;
    std::optional<Matrix> C;
    std::optional<Vector> offset;
};

/// Simulates the model with nu uniform in [nu_lo, nu_hi] scaled by `spread` around the box centre,
/// w likewise, starting from x0.
std::vector<Vector> generate_outputs(const InvalidationModel& model, const InvalidationBounds& bounds,
                                     const Vector& x0, long horizon, double spread,
                                     const std::optional<OutputFault>& fault, std::mt19937_64& rng);

}  // namespace modediag
