#pragma once

#include <sdbf/app_mvt.hpp>
#include <sdbf/bayes_factor.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace sdbf::cli {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::ordered_json report_to_json(const BayesFactorReport& report);

/// Serialized with stable key order and 17 significant digits, newline terminated.
std::string dump_report(const BayesFactorReport& report);

/// Columns: curve, x, density. Curves are theta_e_posterior, theta_e_prior and
/// theta_o_conditional_posterior, each with increasing x.
std::string density_grid_csv(const MvtDensityGrid& grid);

/// Writes `text` to `path`; throws IngestionError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sdbf::cli
