#ifndef PARSIMIX_SELECTION_HPP_
#define PARSIMIX_SELECTION_HPP_

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parsimix/dataset.hpp"
#include "parsimix/design.hpp"
#include "parsimix/fitter.hpp"
#include "parsimix/formula.hpp"
#include "parsimix/inference.hpp"
#include "parsimix/repca.hpp"

namespace parsimix {

struct SelectionConfig {
  double alpha = 0.05;
  double dim_tol = kDimTolerance;
  double singular_tol = kSingularTolerance;
  double boundary_tol = kBoundaryTolerance;
  // Correlations with |r| below this are nominated for pruning.
  double prune_threshold = 0.15;
  int max_steps = 100;
  Criterion criterion = Criterion::REML;
  ContrastScheme contrasts;
  OptimizerMethod method = OptimizerMethod::QuasiNewton;
  std::size_t budget = 0;          // evaluations per fit; 0 selects default_budget()
  std::size_t maximal_budget = 0;  // maximal-model fit; 0 uses `budget`
  std::string drop_order = "interaction-order-then-smallest";
};

// One variance component of a grouping factor: the intercept or a term.
struct Component {
  bool intercept = false;
  Term term;

  int order() const { return intercept ? 0 : static_cast<int>(term.order()); }
  std::string label() const;
  // Marginality: a term contains the lower-order terms whose variables it
  // includes. The intercept neither contains nor is contained.
  bool contains(const Component& other) const;

  friend bool operator==(const Component&, const Component&) = default;
};

// Components of one grouping factor, partitioned into correlated clusters.
struct GroupStructure {
  std::string group;
  std::vector<Component> components;
  std::vector<std::vector<std::size_t>> clusters;  // indices into components

  std::size_t n_correlations() const;
  int find(const Component& c) const;
};

// Random part of a model in component form. Singleton clusters of a group
// are written as one `||` term, larger clusters as `|` terms.
struct RandomStructure {
  std::vector<GroupStructure> groups;

  static RandomStructure from_formula(const FormulaAST& ast);
  std::vector<RandomTerm> to_terms() const;
  FormulaAST apply_to(const FormulaAST& base) const;

  RandomStructure zcp() const;
  RandomStructure without(const std::string& group, const Component& c) const;
  std::size_t n_components() const;
  std::size_t n_correlations() const;
  const GroupStructure* find(const std::string& group) const;
};

// All within-unit main effects and interactions of the fixed part as
// correlated slopes per grouping factor. `within` lists, per grouping
// factor, the variables that vary within its units; fixed terms involving
// anything else are left out of that factor's term.
FormulaAST maximal_formula(const std::string& response, const TermList& fixed,
                           const std::vector<std::pair<std::string, std::vector<std::string>>>& within,
                           const Dataset& data);

// Variables of the fixed part that vary within units of each group.
std::vector<std::pair<std::string, std::vector<std::string>>> detect_within(
    const TermList& fixed, const std::vector<std::string>& groups, const Dataset& data);

struct DropResult {
  RandomStructure structure;
  std::vector<std::pair<std::string, std::string>> removed;  // (group, component label)
  bool noop = true;
};

// Removes components whose relative SD is below the singularity tolerance
// (batched). If none qualifies but a factor is rank deficient, removes
// (dimension - rank) components of that factor. Candidates are taken by
// interaction order descending, then smallest variance; a component is
// never removed while a retained component contains it.
DropResult drop_components(const FitResult& fit, const RandomStructure& structure, const SelectionConfig& config);

enum class Action { StartMaximal, FallbackZcp, DropComponents, LrtDrop, AddCorrelations, PruneCorrelations, Stop };

const char* to_string(Action a);

struct FitSummary {
  double deviance = 0.0;
  double loglik = 0.0;
  Criterion criterion = Criterion::REML;
  bool converged = false;
  bool singular = false;
  std::size_t n_evals = 0;
  std::size_t n_params = 0;
  double aic = 0.0;
  double bic = 0.0;
};

FitSummary summarize(const FitResult& fit);

struct TraceStep {
  Action action = Action::Stop;
  std::string formula;  // model the step fitted or proposed
  std::optional<FitSummary> fit;
  std::vector<std::pair<std::string, int>> dims;  // rePCA dimensionality per group
  std::optional<LrtResult> lrt;
  bool accepted = true;  // whether the step changed the current model
  std::string note;
};

struct SelectionTrace {
  SelectionConfig config;
  std::string start_formula;  // after vectorising random terms
  std::vector<TraceStep> steps;
  FormulaAST final_formula;
  RandomStructure final_structure;
  std::shared_ptr<const FitResult> final_fit;
  std::optional<std::string> error;
};

// Working state shared by the workflow steps: the vectorised data and the
// fixed part every candidate model keeps.
struct SelectionContext {
  FormulaAST base;
  Dataset data;
  SelectionConfig config;

  FitResult fit(const RandomStructure& s, const FitResult* warm, std::size_t budget = 0) const;
};

SelectionContext make_context(const FormulaAST& formula, const Dataset& data, const SelectionConfig& config);

struct EliminationResult {
  RandomStructure structure;
  std::shared_ptr<const FitResult> fit;
  std::vector<TraceStep> steps;
};

// Single-component LRT removals until every removal has p <= alpha.
// Intercepts are kept.
EliminationResult lrt_backward_elimination(const SelectionContext& ctx, const RandomStructure& structure,
                                           std::shared_ptr<const FitResult> fit);

// Per grouping factor with at least two uncorrelated components: correlate
// them all and keep the extension when p < alpha.
EliminationResult extend_correlations(const SelectionContext& ctx, const RandomStructure& structure,
                                      std::shared_ptr<const FitResult> fit);

// Removes the correlations with |r| < prune_threshold (clusters split into
// connected components of the retained correlations) and keeps the pruned
// model when p > alpha.
EliminationResult prune_correlations(const SelectionContext& ctx, const RandomStructure& structure,
                                     std::shared_ptr<const FitResult> fit);

SelectionTrace run_workflow(const FormulaAST& formula, const Dataset& data, const SelectionConfig& config);

// Human-readable narrative, one line per step.
std::string format_trace(const SelectionTrace& trace);

}  // namespace parsimix

#endif  // PARSIMIX_SELECTION_HPP_
