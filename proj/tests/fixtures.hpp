#pragma once

#include "modediag/diagnosis.hpp"
#include "modediag/filter_synthesis.hpp"
#include "modediag/system_model.hpp"

namespace fixtures {

using modediag::Matrix;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) M(r, c++) = v;
        ++r;
    }
    return M;
}

/// Three-mode benchmark plant with static output feedback.
inline modediag::SwitchedAffineSystem three_mode_system() {
    const Matrix E = mat({{1}, {1}});
    const Matrix W = Matrix::Zero(2, 2);
    const Matrix D = mat({{0.01, 0}, {0.01, -0.01}});
    std::vector<modediag::ModeMatrices> modes(3);
    modes[0] = {mat({{0.5, 0}, {0, -0.4}}), mat({{0}, {1}}), E, W, Matrix::Identity(2, 2), D,
                mat({{-0.0395, -0.0741}})};
    modes[1] = {mat({{0.5, -0.2}, {0, -0.4}}), mat({{1}, {1}}), E, W, mat({{1, 0}, {0, 0}}), D,
                mat({{-0.0648, 0.0510}})};
    modes[2] = {mat({{-0.5, 0}, {0.1, -0.4}}), mat({{1}, {0}}), E, W, Matrix::Identity(2, 2), D,
                mat({{-0.0420, 0.0326}})};
    return modediag::SwitchedAffineSystem(std::move(modes));
}

inline modediag::SynthesisConfig three_mode_config() {
    modediag::SynthesisConfig cfg;
    cfg.degree = 1;
    cfg.roots = {-0.1, -0.2};
    return cfg;
}

/// Bank of the three-mode benchmark, synthesized once per process.
inline const modediag::FilterBank& three_mode_bank() {
    static const modediag::FilterBank bank = modediag::synthesize_bank(three_mode_system(), three_mode_config());
    return bank;
}

inline modediag::DiagnosisInputs three_mode_inputs() {
    modediag::DiagnosisInputs in;
    in.reference = modediag::Vector::Constant(1, 0.5);
    return in;
}

inline const modediag::DiagnosisParams& three_mode_params() {
    static const modediag::DiagnosisParams params =
        modediag::compute_params(three_mode_system(), three_mode_bank(), three_mode_inputs());
    return params;
}

/// Copy of the benchmark in which every mode uses mode 1's matrices.
inline modediag::SwitchedAffineSystem duplicate_mode_system() {
    const auto base = three_mode_system();
    std::vector<modediag::ModeMatrices> modes{base.mode(1), base.mode(1), base.mode(3)};
    return modediag::SwitchedAffineSystem(std::move(modes));
}

}  // namespace fixtures
