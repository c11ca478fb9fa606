#pragma once

#include "modediag/conic.hpp"

namespace modediag {

struct InteriorPointOptions {
    int max_iterations = 120;
    double step_fraction = 0.99;
    /// Feasibility and gap tolerances are `tol * tightening` so the verified point has slack.
    double tightening = 0.1;
};

/// Homogeneous self-dual primal-dual interior-point method for LP and PSD cones with
/// Nesterov-Todd scaling and Mehrotra predictor-corrector steps. Dense linear algebra;
/// intended for programs with a few hundred variables.
class InteriorPointSolver final : public ConicSolver {
public:
    explicit InteriorPointSolver(InteriorPointOptions options = {}) : options_(options) {}
    SolveReport solve_raw(const ConicProgram& program, double tol) override;

private:
    InteriorPointOptions options_;
};

}  // namespace modediag
