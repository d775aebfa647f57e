#ifndef PARSIMIX_CLI_REPORT_HPP_
#define PARSIMIX_CLI_REPORT_HPP_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "parsimix/dataset.hpp"
#include "parsimix/fitter.hpp"
#include "parsimix/inference.hpp"
#include "parsimix/repca.hpp"
#include "parsimix/selection.hpp"

namespace parsimix::cli {

// The report document. Text output and plot files are rendered from it, so
// every printed number also appears in the JSON.
using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0.0";

Json tool_json();
Json data_json(const Dataset& data, const std::string& path);
Json contrasts_json(const ContrastScheme& contrasts);
Json fit_json(const FitResult& fit);
Json repca_json(const RePcaResult& pca);
Json lrt_json(const LrtResult& lrt);
Json selection_config_json(const SelectionConfig& config);
Json trace_json(const SelectionTrace& trace);

std::string render_fit_text(const Json& fit);
// Cumulative proportions per grouping factor, one row each.
std::string render_repca_table(const Json& repca);
std::string render_trace_text(const Json& trace);

// Tidy CSV files for dot plots: fixef.csv, sd.csv, corr.csv.
void write_fit_plots(const Json& fit, const std::filesystem::path& dir);
// scree.csv: one row per (group, component).
void write_scree_plot(const Json& repca, const std::filesystem::path& dir);

}  // namespace parsimix::cli

#endif  // PARSIMIX_CLI_REPORT_HPP_
