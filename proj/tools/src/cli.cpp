#include "parsimix_cli/cli.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parsimix/dataset.hpp"
#include "parsimix/design.hpp"
#include "parsimix/fitter.hpp"
#include "parsimix/formula.hpp"
#include "parsimix/inference.hpp"
#include "parsimix/parallel.hpp"
#include "parsimix/repca.hpp"
#include "parsimix/selection.hpp"
#include "parsimix/simulate.hpp"
#include "report.hpp"
#include "truth_spec.hpp"

namespace parsimix::cli {

namespace {

// Bad arguments, unreadable data or an invalid formula.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataArgs {
  std::string path;
  std::vector<std::string> factors;
  std::vector<std::string> numerics;
};

struct ModelArgs {
  std::string criterion = "reml";
  std::string contrasts = "sum";
  std::vector<std::string> contrast_overrides;  // FACTOR=KIND
  std::string optimizer = "quasi-newton";
  std::size_t budget = 0;
  double singular_tol = kSingularTolerance;
  double boundary_tol = kBoundaryTolerance;
};

struct OutputArgs {
  std::string json;
  std::string plots;
};

struct Args {
  DataArgs data;
  ModelArgs model;
  OutputArgs output;
  std::string formula;
  std::uint64_t seed = 42;
  double dim_tol = kDimTolerance;
  // reduce
  std::string fixed;
  std::vector<std::string> groups;
  double alpha = 0.05;
  double prune_threshold = 0.15;
  int max_steps = 100;
  std::size_t maximal_budget = 0;
  std::string trace;
  // simulate
  std::string spec;
  std::string out;
};

FormulaAST parse_or_throw(const std::string& text) {
  try {
    return parse_formula(text);
  } catch (const FormulaError& e) {
    throw InputError(caret_message(text, e));
  }
}

Dataset load_data(const DataArgs& args) {
  SchemaOverrides overrides;
  overrides.factors = args.factors;
  overrides.numerics = args.numerics;
  return ingest_csv(args.path, overrides);
}

ContrastScheme contrast_scheme(const ModelArgs& args) {
  ContrastScheme scheme;
  scheme.default_kind = parse_contrast_kind(args.contrasts);
  for (const auto& item : args.contrast_overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--contrast expects FACTOR=KIND, got '" + item + "'");
    scheme.per_factor[item.substr(0, eq)] = parse_contrast_kind(item.substr(eq + 1));
  }
  return scheme;
}

Criterion criterion_of(const ModelArgs& args) {
  try {
    return parse_criterion(args.criterion);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

OptimizerMethod optimizer_of(const ModelArgs& args) {
  try {
    return parse_optimizer(args.optimizer);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

FitOptions fit_options(const ModelArgs& args) {
  FitOptions opts;
  opts.criterion = criterion_of(args);
  opts.method = optimizer_of(args);
  opts.budget = args.budget;
  opts.singular_tol = args.singular_tol;
  opts.boundary_tol = args.boundary_tol;
  return opts;
}

Json model_config_json(const ModelArgs& args, const ContrastScheme& contrasts) {
  return Json{{"criterion", to_string(criterion_of(args))},
              {"contrasts", contrasts_json(contrasts)},
              {"optimizer", to_string(optimizer_of(args))},
              {"budget", args.budget},
              {"singular_tol", args.singular_tol},
              {"boundary_tol", args.boundary_tol}};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Json envelope(const std::string& command) {
  Json report;
  report["tool"] = tool_json();
  report["command"] = command;
  return report;
}

void finish_report(Json& report, const Stopwatch& clock) {
  if (!report.contains("warnings")) report["warnings"] = Json::array();
  if (!report.contains("error")) report["error"] = nullptr;
  report["timing"] = Json{{"seconds", clock.seconds()}, {"threads", max_threads()}};
}

// Writes the JSON report when requested. "-" sends it to `out`, in which
// case the text rendering is suppressed.
bool emit_json(const Json& report, const OutputArgs& args, std::ostream& out) {
  if (args.json.empty()) return false;
  const std::string text = report.dump(2) + "\n";
  if (args.json == "-") {
    out << text;
    return true;
  }
  std::ofstream file(args.json);
  if (!file) throw InputError("cannot write " + args.json);
  file << text;
  return false;
}

void print_warnings(const Json& report, std::ostream& err) {
  for (const auto& w : report["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
}

void add_fit_warnings(Json& report, const FitResult& fit) {
  Json& warnings = report["warnings"];
  if (!fit.converged) {
    warnings.push_back("optimizer stopped after " + std::to_string(fit.n_evals) + " of " +
                       std::to_string(fit.budget) +
                       " deviance evaluations without meeting the convergence test; estimates may be inaccurate");
  }
  if (fit.singular) {
    std::string groups;
    for (const auto& f : fit.factor_lambdas()) {
      if (factor_is_singular(lambda_singular_values(f.lambda), fit.singular_tol)) {
        groups += (groups.empty() ? "" : ", ") + f.group;
      }
    }
    warnings.push_back("singular fit: the random-effects covariance of " + groups +
                       " is rank deficient; run `parsimix repca` to see how many dimensions the data support");
  }
}

int failed_fit(Json& report, const std::string& message, const Stopwatch& clock, const OutputArgs& output,
               std::ostream& out, std::ostream& err) {
  report["error"] = message;
  finish_report(report, clock);
  emit_json(report, output, out);
  err << "error: fit failed: " << message << "\n";
  return kExitFit;
}

int cmd_fit(const Args& args, bool with_repca, std::ostream& out, std::ostream& err) {
  const Stopwatch clock;
  const FormulaAST formula = parse_or_throw(args.formula);
  const Dataset data = load_data(args.data);
  const ContrastScheme contrasts = contrast_scheme(args.model);
  const FitOptions opts = fit_options(args.model);
  const auto matrices = std::make_shared<const ModelMatrices>(build_model_matrices(formula, data, contrasts));

  Json report = envelope(with_repca ? "repca" : "fit");
  Json config = model_config_json(args.model, contrasts);
  if (with_repca) config["dim_tol"] = args.dim_tol;
  config["seed"] = args.seed;
  report["config"] = config;
  report["data"] = data_json(data, args.data.path);
  report["warnings"] = Json::array();

  FitResult fit;
  try {
    fit = optimize(matrices, opts);
  } catch (const FitError& e) {
    return failed_fit(report, e.what(), clock, args.output, out, err);
  }
  report["fit"] = fit_json(fit);
  add_fit_warnings(report, fit);
  if (with_repca) {
    try {
      report["repca"] = repca_json(re_pca(fit, args.dim_tol));
    } catch (const RePcaError& e) {
      throw InputError(e.what());
    }
  }
  finish_report(report, clock);

  const bool json_on_stdout = emit_json(report, args.output, out);
  if (!json_on_stdout) {
    if (with_repca) {
      out << render_repca_table(report["repca"]) << "\n";
    }
    out << render_fit_text(report["fit"]);
  }
  print_warnings(report, err);
  if (!args.output.plots.empty()) {
    write_fit_plots(report["fit"], args.output.plots);
    if (with_repca) write_scree_plot(report["repca"], args.output.plots);
  }
  return kExitOk;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

int cmd_reduce(const Args& args, std::ostream& out, std::ostream& err) {
  const Stopwatch clock;
  const Dataset data = load_data(args.data);
  const ContrastScheme contrasts = contrast_scheme(args.model);

  FormulaAST formula;
  if (!args.formula.empty()) {
    if (!args.fixed.empty() || !args.groups.empty()) throw InputError("give either --formula or --fixed with --groups");
    formula = parse_or_throw(args.formula);
  } else {
    if (args.fixed.empty() || args.groups.empty()) throw InputError("reduce needs --formula, or --fixed with --groups");
    const FormulaAST fixed = parse_or_throw(args.fixed);
    if (!fixed.random.empty()) throw InputError("--fixed must not contain random-effects terms");
    const std::vector<std::string> groups = split_list(args.groups);
    formula = maximal_formula(fixed.response, fixed.fixed, detect_within(fixed.fixed, groups, data), data);
  }
  build_model_matrices(formula, data, contrasts);

  SelectionConfig config;
  config.alpha = args.alpha;
  config.dim_tol = args.dim_tol;
  config.singular_tol = args.model.singular_tol;
  config.boundary_tol = args.model.boundary_tol;
  config.prune_threshold = args.prune_threshold;
  config.max_steps = args.max_steps;
  config.criterion = criterion_of(args.model);
  config.contrasts = contrasts;
  config.method = optimizer_of(args.model);
  config.budget = args.model.budget;
  config.maximal_budget = args.maximal_budget;
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InputError("--alpha must lie in (0, 1)");

  const SelectionTrace trace = run_workflow(formula, data, config);

  Json report = envelope("reduce");
  Json echo = selection_config_json(config);
  echo["seed"] = args.seed;
  report["config"] = echo;
  report["data"] = data_json(data, args.data.path);
  report["warnings"] = Json::array();
  report["formula"] = format_formula(formula);
  report["trace"] = trace_json(trace);
  report["trace"].erase("config");
  if (trace.final_fit) {
    report["fit"] = report["trace"]["final_fit"];
    add_fit_warnings(report, *trace.final_fit);
  }
  report["trace"].erase("final_fit");
  report["final_formula"] = format_formula(trace.final_formula);
  report["error"] = trace.error ? Json(*trace.error) : Json(nullptr);
  finish_report(report, clock);

  if (!args.trace.empty()) {
    std::ofstream file(args.trace);
    if (!file) throw InputError("cannot write " + args.trace);
    file << report["trace"]["steps"].dump(2) << "\n";
  }
  const bool json_on_stdout = emit_json(report, args.output, out);
  if (!json_on_stdout) {
    out << "Start: " << report["formula"].get<std::string>() << "\n\n";
    out << render_trace_text(report["trace"]) << "\n";
    out << "Final: " << report["final_formula"].get<std::string>() << "\n";
    if (report.contains("fit")) out << "\n" << render_fit_text(report["fit"]);
  }
  print_warnings(report, err);
  if (!args.output.plots.empty() && report.contains("fit")) write_fit_plots(report["fit"], args.output.plots);
  if (trace.error) {
    err << "error: reduction stopped: " << *trace.error << "\n";
    return kExitFit;
  }
  return kExitOk;
}

int cmd_simulate(const Args& args, std::ostream& out, std::ostream& err) {
  const Stopwatch clock;
  TruthSpec spec = read_truth_spec(args.spec);
  spec.seed = args.seed;
  parse_or_throw(spec.formula);
  const Dataset data = simulate_lmm(spec);

  if (args.out.empty() || args.out == "-") {
    write_csv(data, out);
  } else {
    std::ofstream file(args.out, std::ios::binary);
    if (!file) throw InputError("cannot write " + args.out);
    write_csv(data, file);
  }
  if (!args.output.json.empty()) {
    Json report = envelope("simulate");
    report["config"] = Json{{"spec", args.spec}, {"seed", args.seed}};
    report["data"] = data_json(data, args.out.empty() ? "-" : args.out);
    finish_report(report, clock);
    if (args.output.json == "-") throw InputError("simulate cannot write the report to stdout");
    emit_json(report, args.output, out);
  }
  (void)err;
  return kExitOk;
}

void add_data_options(CLI::App& cmd, DataArgs& data) {
  cmd.add_option("--data", data.path, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd.add_option("--factor", data.factors, "Treat a column as a factor (repeatable)");
  cmd.add_option("--numeric", data.numerics, "Treat a column as numeric (repeatable)");
}

void add_model_options(CLI::App& cmd, ModelArgs& model) {
  cmd.add_option("--criterion", model.criterion, "ml or reml")->capture_default_str();
  cmd.add_option("--contrasts", model.contrasts, "Default contrast coding: sum or treatment")->capture_default_str();
  cmd.add_option("--contrast", model.contrast_overrides, "Per-factor coding FACTOR=KIND (repeatable)");
  cmd.add_option("--optimizer", model.optimizer, "quasi-newton or nelder-mead")->capture_default_str();
  cmd.add_option("--budget", model.budget, "Deviance evaluations per fit (0: max(10|theta|^2, 2000))")
      ->capture_default_str();
  cmd.add_option("--singular-tol", model.singular_tol, "Relative singular value marking a singular factor")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--boundary-tol", model.boundary_tol, "Distance from a bound flagged as on the boundary")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_output_options(CLI::App& cmd, OutputArgs& output) {
  cmd.add_option("--json", output.json, "Write the JSON report to PATH ('-' for stdout)");
  cmd.add_option("--plots", output.plots, "Write plot-ready CSV files into DIR");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parsimonious linear mixed models: fit, rePCA, model reduction and simulation"};
  app.set_version_flag("--version", std::string("parsimix ") + PARSIMIX_VERSION);
  app.require_subcommand(1);
  Args args;

  auto* fit = app.add_subcommand("fit", "Fit one model and print its estimates");
  auto* repca = app.add_subcommand("repca", "Fit one model and print its random-effects PCA");
  auto* reduce = app.add_subcommand("reduce", "Reduce a maximal model to a parsimonious one");
  auto* simulate = app.add_subcommand("simulate", "Write a dataset drawn from a JSON truth spec");

  for (CLI::App* cmd : {fit, repca}) {
    add_data_options(*cmd, args.data);
    cmd->add_option("--formula", args.formula, "Model formula, e.g. \"Y ~ 1 + A + (1 + A | Subject)\"")->required();
    add_model_options(*cmd, args.model);
    add_output_options(*cmd, args.output);
    cmd->add_option("--seed", args.seed, "Seed for any randomness")->capture_default_str();
  }
  repca->add_option("--dim-tol", args.dim_tol, "Cumulative-proportion tolerance for the dimensionality")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  add_data_options(*reduce, args.data);
  reduce->add_option("--formula", args.formula, "Starting model formula");
  reduce->add_option("--fixed", args.fixed, "Fixed part, e.g. \"Y ~ 1 + P*C\"; the maximal model is derived");
  reduce->add_option("--groups", args.groups, "Grouping factors for --fixed (comma separated or repeated)");
  add_model_options(*reduce, args.model);
  add_output_options(*reduce, args.output);
  reduce->add_option("--alpha", args.alpha, "LRT significance level")->capture_default_str();
  reduce->add_option("--dim-tol", args.dim_tol, "Cumulative-proportion tolerance for the dimensionality")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  reduce->add_option("--prune-threshold", args.prune_threshold, "Correlations with |r| below this are pruned")
      ->capture_default_str();
  reduce->add_option("--max-steps", args.max_steps, "Maximum number of workflow steps")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  reduce->add_option("--maximal-budget", args.maximal_budget, "Evaluation budget for the maximal fit (0: --budget)")
      ->capture_default_str();
  reduce->add_option("--trace", args.trace, "Write the step trace as JSON to PATH");
  reduce->add_option("--seed", args.seed, "Seed for any randomness")->capture_default_str();

  simulate->add_option("--spec", args.spec, "Truth spec (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", args.out, "Output CSV ('-' or omitted for stdout)");
  simulate->add_option("--seed", args.seed, "Random seed")->capture_default_str();
  simulate->add_option("--json", args.output.json, "Write a JSON report to PATH");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit->parsed()) return cmd_fit(args, false, out, err);
    if (repca->parsed()) return cmd_fit(args, true, out, err);
    if (reduce->parsed()) return cmd_reduce(args, out, err);
    return cmd_simulate(args, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const FormulaError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInput;
}

}  // namespace parsimix::cli
