#pragma once

#include "modediag/filter_bank.hpp"

namespace modediag {

struct Realization {
    Matrix A_r, B_r, C_r;
};

/// Observable canonical realization: companion A_r, B_r row m = N_m L0, C_r = [0 ... 0 1].
Realization realize(const Matrix& N, const Vector& denominator, int ny);
Realization realize(const ResidualFilter& filter);

struct FilterState {
    int controller = 0;
    int target = 0;
    Vector xbar;
};

struct ResidualOutput {
    FilterState state;
    double r = 0.0;
};

/// r = C_r xbar evaluated before the update xbar+ = A_r xbar + B_r y.
ResidualOutput residual_step(const FilterState& state, const ResidualFilter& filter, const Vector& y);

/// Plant of status (controller, plant) in feedback with a filter, state [x; xbar].
struct AugmentedSystem {
    Matrix A;  ///< [[A_cl, 0], [B_r C_h, A_r]]
    Matrix E;  ///< [E_h; 0]
    Matrix D;  ///< [W_h + B_h K_i D_h; B_r D_h]
    Matrix C;  ///< [0 C_r]
};

AugmentedSystem augmented(const SwitchedAffineSystem& system, const ResidualFilter& filter, int controller,
                          int plant);
AugmentedSystem augmented(const SwitchedAffineSystem& system, const FilterBank& bank, int i, int j, int h);

/// (I - A)^{-1} E d for the augmented loop.
Vector augmented_steady_state(const AugmentedSystem& aug, const Vector& reference);

}  // namespace modediag
