#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modediag/diagnosis.hpp"
#include "modediag/filter_synthesis.hpp"
#include "modediag/invalidation.hpp"
#include "modediag/simulation.hpp"

namespace modediag {

inline constexpr int kFormatVersion = 1;

struct InvalidationDataConfig {
    long horizon = 200;
    std::uint64_t seed = 1;
    double spread = 0.5;  ///< fraction of each bound box used by the generated uncertainty
    Vector initial_state;
    std::optional<OutputFault> fault;
};

struct InvalidationConfig {
    InvalidationModel model;
    InvalidationBounds bounds;
    int window = 5;
    std::optional<std::string> data_file;       ///< CSV of outputs, one row per tick
    std::optional<InvalidationDataConfig> generate;
};

struct ProjectConfig {
    std::vector<ModeMatrices> modes;
    SynthesisConfig synthesis;
    DiagnosisInputs diagnosis;
    std::optional<Scenario> scenario;
    int runs = 1000;
    std::uint64_t seed = 1;
    std::optional<InvalidationConfig> invalidation;
    std::string output_dir = "out";
    std::string digest;
    std::string base_dir;  ///< directory of the config file, for relative paths

    SwitchedAffineSystem system() const { return SwitchedAffineSystem(modes); }
};

/// Parses and validates a config document. Unknown keys are rejected; errors name the field.
ProjectConfig parse_config(const nlohmann::ordered_json& doc, const std::string& base_dir = ".");
ProjectConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
std::string config_digest(const nlohmann::ordered_json& doc);

nlohmann::ordered_json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::ordered_json& j, const std::string& path);

nlohmann::ordered_json bank_to_json(const FilterBank& bank, const std::string& digest = {});
FilterBank bank_from_json(const nlohmann::ordered_json& j);
void save_bank(const std::string& path, const FilterBank& bank, const std::string& digest = {});
FilterBank load_bank(const std::string& path);

nlohmann::ordered_json params_to_json(const DiagnosisParams& params, const std::string& digest = {});
DiagnosisParams params_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json report_to_json(const MonteCarloReport& report, const std::string& digest = {});
/// Per-transition rows: from, to, switch_time, runs, adt, wdp, correct, wrong, missed.
std::string report_to_csv(const MonteCarloReport& report);

/// Columns: k, sigma, sigma_hat, x1.., y1.., r1..rn, eps, isolation.
std::string trace_to_csv(const SimulationTrace& trace, const DiagnosisParams& params);
std::string sweep_to_csv(const std::vector<WindowResult>& results);

std::vector<Vector> read_output_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Python/matplotlib script plotting |r| per mode, the threshold, switches and isolations of a trace file.
std::string export_plot_script(const std::string& trace_path);
/// Script drawing one delay histogram per transition of a Monte-Carlo report file.
std::string export_histogram_script(const std::string& report_path);

}  // namespace modediag
