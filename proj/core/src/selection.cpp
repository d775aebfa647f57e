#include "parsimix/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "parsimix/parallel.hpp"

namespace parsimix {

std::string Component::label() const { return intercept ? std::string(kInterceptLabel) : term.to_string(); }

bool Component::contains(const Component& other) const {
  if (intercept || other.intercept) return false;
  return term.order() > other.term.order() && term.contains(other.term);
}

std::size_t GroupStructure::n_correlations() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.size() * (c.size() - 1) / 2;
  return n;
}

int GroupStructure::find(const Component& c) const {
  for (std::size_t i = 0; i < components.size(); ++i) {
    const Component& x = components[i];
    if (x.intercept == c.intercept && (x.intercept || x.term.same_as(c.term))) return static_cast<int>(i);
  }
  return -1;
}

RandomStructure RandomStructure::from_formula(const FormulaAST& ast) {
  RandomStructure s;
  for (const auto& rt : ast.random) {
    auto it = std::find_if(s.groups.begin(), s.groups.end(), [&](const GroupStructure& g) { return g.group == rt.group; });
    if (it == s.groups.end()) {
      s.groups.push_back(GroupStructure{rt.group, {}, {}});
      it = s.groups.end() - 1;
    }
    std::vector<Component> comps;
    if (rt.inner.intercept) comps.push_back(Component{true, {}});
    for (const auto& t : rt.inner.terms) comps.push_back(Component{false, t});
    std::vector<std::size_t> added;
    for (auto& c : comps) {
      if (it->find(c) >= 0) continue;
      added.push_back(it->components.size());
      it->components.push_back(std::move(c));
    }
    if (rt.correlated && added.size() >= 2) {
      it->clusters.push_back(added);
    } else {
      for (std::size_t i : added) it->clusters.push_back({i});
    }
  }
  return s;
}

namespace {

RandomTerm make_term(const GroupStructure& g, std::vector<std::size_t> members, bool correlated) {
  std::sort(members.begin(), members.end());
  RandomTerm rt;
  rt.group = g.group;
  rt.correlated = correlated;
  rt.inner.intercept = false;
  for (std::size_t i : members) {
    const Component& c = g.components[i];
    if (c.intercept) {
      rt.inner.intercept = true;
    } else {
      rt.inner.terms.push_back(c.term);
    }
  }
  std::stable_sort(rt.inner.terms.begin(), rt.inner.terms.end(),
                   [](const Term& a, const Term& b) { return a.order() < b.order(); });
  return rt;
}

}  // namespace

std::vector<RandomTerm> RandomStructure::to_terms() const {
  std::vector<RandomTerm> out;
  for (const auto& g : groups) {
    std::vector<std::size_t> singles;
    for (const auto& c : g.clusters) {
      if (c.size() >= 2) {
        out.push_back(make_term(g, c, true));
      } else if (c.size() == 1) {
        singles.push_back(c.front());
      }
    }
    if (singles.size() == 1) out.push_back(make_term(g, singles, true));
    if (singles.size() >= 2) out.push_back(make_term(g, singles, false));
  }
  return out;
}

FormulaAST RandomStructure::apply_to(const FormulaAST& base) const {
  FormulaAST out = base;
  out.random = to_terms();
  return out;
}

RandomStructure RandomStructure::zcp() const {
  RandomStructure out = *this;
  for (auto& g : out.groups) {
    g.clusters.clear();
    for (std::size_t i = 0; i < g.components.size(); ++i) g.clusters.push_back({i});
  }
  return out;
}

RandomStructure RandomStructure::without(const std::string& group, const Component& c) const {
  RandomStructure out;
  for (const auto& g : groups) {
    if (g.group != group) {
      out.groups.push_back(g);
      continue;
    }
    const int idx = g.find(c);
    if (idx < 0) {
      out.groups.push_back(g);
      continue;
    }
    const auto removed = static_cast<std::size_t>(idx);
    GroupStructure ng{g.group, {}, {}};
    for (std::size_t i = 0; i < g.components.size(); ++i) {
      if (i != removed) ng.components.push_back(g.components[i]);
    }
    for (const auto& cl : g.clusters) {
      std::vector<std::size_t> kept;
      for (std::size_t i : cl) {
        if (i != removed) kept.push_back(i > removed ? i - 1 : i);
      }
      if (!kept.empty()) ng.clusters.push_back(std::move(kept));
    }
    if (!ng.components.empty()) out.groups.push_back(std::move(ng));
  }
  return out;
}

std::size_t RandomStructure::n_components() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.components.size();
  return n;
}

std::size_t RandomStructure::n_correlations() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.n_correlations();
  return n;
}

const GroupStructure* RandomStructure::find(const std::string& group) const {
  for (const auto& g : groups) {
    if (g.group == group) return &g;
  }
  return nullptr;
}

FormulaAST maximal_formula(const std::string& response, const TermList& fixed,
                           const std::vector<std::pair<std::string, std::vector<std::string>>>& within,
                           const Dataset& data) {
  if (data.find(response) == nullptr) throw DataError("unknown column '" + response + "'");
  for (const auto& t : fixed.terms) {
    for (const auto& v : t.vars) {
      if (data.find(v) == nullptr) throw DataError("unknown column '" + v + "'");
    }
  }
  FormulaAST ast;
  ast.response = response;
  ast.fixed = fixed;
  for (const auto& [group, vars] : within) {
    const Column* g = data.find(group);
    if (g == nullptr) throw DataError("unknown grouping column '" + group + "'");
    for (const auto& v : vars) {
      if (data.find(v) == nullptr) throw DataError("unknown column '" + v + "'");
    }
    RandomTerm rt;
    rt.group = group;
    rt.correlated = true;
    rt.inner.intercept = true;
    for (const auto& t : fixed.terms) {
      const bool all_within = std::all_of(t.vars.begin(), t.vars.end(), [&](const std::string& v) {
        return std::find(vars.begin(), vars.end(), v) != vars.end();
      });
      if (all_within) rt.inner.terms.push_back(t);
    }
    ast.random.push_back(std::move(rt));
  }
  return ast;
}

std::vector<std::pair<std::string, std::vector<std::string>>> detect_within(
    const TermList& fixed, const std::vector<std::string>& groups, const Dataset& data) {
  std::vector<std::string> vars;
  for (const auto& t : fixed.terms) {
    for (const auto& v : t.vars) {
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  for (const auto& g : groups) {
    std::vector<std::string> w;
    for (const auto& v : vars) {
      if (varies_within(data, v, g)) w.push_back(v);
    }
    out.emplace_back(g, std::move(w));
  }
  return out;
}

namespace {

struct GroupEstimates {
  Eigen::MatrixXd cov;  // relative covariance Lambda Lambda'
  std::vector<std::string> labels;
  Eigen::VectorXd singular_values;
};

std::map<std::string, GroupEstimates> group_estimates(const FitResult& fit) {
  std::map<std::string, GroupEstimates> out;
  for (const auto& f : fit.factor_lambdas()) {
    out[f.group] = GroupEstimates{f.lambda * f.lambda.transpose(), f.labels, lambda_singular_values(f.lambda)};
  }
  return out;
}

Eigen::Index label_index(const std::vector<std::string>& labels, const std::string& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw FitError("fit has no component '" + label + "'");
  return it - labels.begin();
}

// Greedy removal in policy order: highest interaction order first, then
// smallest variance, skipping components a retained component contains.
std::vector<std::size_t> choose_removals(const GroupStructure& g, const std::vector<double>& variance,
                                         const std::vector<std::size_t>& candidates, std::size_t limit) {
  std::vector<std::size_t> order = candidates;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (g.components[a].order() != g.components[b].order()) return g.components[a].order() > g.components[b].order();
    return variance[a] < variance[b];
  });
  std::vector<bool> removed(g.components.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t c : order) {
    if (out.size() >= limit) break;
    bool blocked = false;
    for (std::size_t x = 0; x < g.components.size(); ++x) {
      if (x != c && !removed[x] && g.components[x].contains(g.components[c])) blocked = true;
    }
    if (blocked) continue;
    removed[c] = true;
    out.push_back(c);
  }
  return out;
}

}  // namespace

DropResult drop_components(const FitResult& fit, const RandomStructure& structure, const SelectionConfig& config) {
  const auto est = group_estimates(fit);
  struct Plan {
    const GroupStructure* g;
    std::vector<double> variance;
    std::vector<std::size_t> below;
    int rank;
  };
  std::vector<Plan> plans;
  for (const auto& g : structure.groups) {
    auto it = est.find(g.group);
    if (it == est.end()) continue;
    Plan p{&g, {}, {}, numeric_rank(it->second.singular_values, config.singular_tol)};
    double max_sd = 0.0;
    for (const auto& c : g.components) {
      const Eigen::Index i = label_index(it->second.labels, c.label());
      p.variance.push_back(std::max(it->second.cov(i, i), 0.0));
      max_sd = std::max(max_sd, std::sqrt(p.variance.back()));
    }
    const double threshold = config.singular_tol * std::max(1.0, max_sd);
    for (std::size_t c = 0; c < g.components.size(); ++c) {
      if (std::sqrt(p.variance[c]) < threshold) p.below.push_back(c);
    }
    plans.push_back(std::move(p));
  }

  std::vector<std::pair<std::string, Component>> removals;
  for (const auto& p : plans) {
    for (std::size_t c : choose_removals(*p.g, p.variance, p.below, p.below.size())) {
      removals.emplace_back(p.g->group, p.g->components[c]);
    }
  }
  if (removals.empty()) {
    for (const auto& p : plans) {
      const auto d = p.g->components.size();
      if (static_cast<std::size_t>(p.rank) >= d) continue;
      std::vector<std::size_t> all(d);
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t c : choose_removals(*p.g, p.variance, all, d - static_cast<std::size_t>(p.rank))) {
        removals.emplace_back(p.g->group, p.g->components[c]);
      }
    }
  }

  DropResult out;
  out.structure = structure;
  for (const auto& [group, c] : removals) {
    out.structure = out.structure.without(group, c);
    out.removed.emplace_back(group, c.label());
  }
  out.noop = removals.empty();
  return out;
}

const char* to_string(Action a) {
  switch (a) {
    case Action::StartMaximal: return "start-maximal";
    case Action::FallbackZcp: return "fallback-zcp";
    case Action::DropComponents: return "drop-components";
    case Action::LrtDrop: return "lrt-drop";
    case Action::AddCorrelations: return "add-correlations";
    case Action::PruneCorrelations: return "prune-correlations";
    case Action::Stop: return "stop";
  }
  return "stop";
}

FitSummary summarize(const FitResult& fit) {
  FitSummary s;
  s.deviance = fit.deviance;
  s.loglik = fit.loglik;
  s.criterion = fit.criterion;
  s.converged = fit.converged;
  s.singular = fit.singular;
  s.n_evals = fit.n_evals;
  s.n_params = fit.n_params();
  const auto ic = information_criteria(fit);
  s.aic = ic.aic;
  s.bic = ic.bic;
  return s;
}

FitResult SelectionContext::fit(const RandomStructure& s, const FitResult* warm, std::size_t budget) const {
  auto mm = std::make_shared<const ModelMatrices>(build_model_matrices(s.apply_to(base), data, config.contrasts));
  FitOptions opts;
  opts.criterion = config.criterion;
  opts.method = config.method;
  opts.singular_tol = config.singular_tol;
  opts.boundary_tol = config.boundary_tol;
  opts.budget = budget > 0 ? budget : config.budget;
  if (warm != nullptr) opts.start = warm_start(*warm, *mm);
  return optimize(std::move(mm), opts);
}

SelectionContext make_context(const FormulaAST& formula, const Dataset& data, const SelectionConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  VectorizedModel vm = vectorize_random_terms(formula, data, config.contrasts);
  SelectionContext ctx{std::move(vm.formula), std::move(vm.data), config};
  ctx.base.random.clear();
  return ctx;
}

namespace {

std::vector<std::pair<std::string, int>> dims_of(const FitResult& fit, double tol) {
  std::vector<std::pair<std::string, int>> out;
  if (fit.matrices->blocks.empty()) return out;
  for (const auto& f : re_pca(fit, tol).factors) out.emplace_back(f.group, f.dim);
  return out;
}

TraceStep make_step(const SelectionContext& ctx, Action action, const RandomStructure& s, const FitResult* fit) {
  TraceStep step;
  step.action = action;
  step.formula = format_formula(s.apply_to(ctx.base));
  if (fit != nullptr) {
    step.fit = summarize(*fit);
    step.dims = dims_of(*fit, ctx.config.dim_tol);
  }
  return step;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

EliminationResult lrt_backward_elimination(const SelectionContext& ctx, const RandomStructure& structure,
                                           std::shared_ptr<const FitResult> fit) {
  EliminationResult res{structure, std::move(fit), {}};
  for (int round = 0; round < ctx.config.max_steps; ++round) {
    struct Candidate {
      std::string group;
      Component component;
      RandomStructure structure;
      std::optional<FitResult> fit;
      std::optional<LrtResult> lrt;
      std::string error;
    };
    std::vector<Candidate> cands;
    for (const auto& g : res.structure.groups) {
      for (std::size_t c = 0; c < g.components.size(); ++c) {
        const Component& comp = g.components[c];
        if (comp.intercept) continue;
        bool contained = false;
        for (std::size_t x = 0; x < g.components.size(); ++x) {
          if (x != c && g.components[x].contains(comp)) contained = true;
        }
        if (contained) continue;
        cands.push_back(Candidate{g.group, comp, res.structure.without(g.group, comp), {}, {}, {}});
      }
    }
    if (cands.empty()) break;
    const FitResult* current = res.fit.get();
    parallel_for(cands.size(), [&](std::size_t i) {
      try {
        cands[i].fit = ctx.fit(cands[i].structure, current);
        cands[i].lrt = lr_test(*cands[i].fit, *current);
      } catch (const std::exception& e) {
        cands[i].error = e.what();
      }
    });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!cands[i].lrt) continue;
      if (!best || cands[i].lrt->p_value > cands[*best].lrt->p_value) best = i;
    }
    if (!best) break;
    Candidate& b = cands[*best];
    TraceStep step = make_step(ctx, Action::LrtDrop, b.structure, &*b.fit);
    step.lrt = b.lrt;
    step.accepted = b.lrt->p_value > ctx.config.alpha;
    step.note = (step.accepted ? "removed " : "kept ") + b.component.label() + " | " + b.group;
    res.steps.push_back(step);
    if (!step.accepted) break;
    res.structure = std::move(b.structure);
    res.fit = std::make_shared<const FitResult>(std::move(*b.fit));
  }
  return res;
}

EliminationResult extend_correlations(const SelectionContext& ctx, const RandomStructure& structure,
                                      std::shared_ptr<const FitResult> fit) {
  EliminationResult res{structure, std::move(fit), {}};
  for (std::size_t gi = 0; gi < res.structure.groups.size(); ++gi) {
    const GroupStructure& g = res.structure.groups[gi];
    if (g.components.size() < 2 || g.n_correlations() > 0) continue;
    RandomStructure cand = res.structure;
    auto& cg = cand.groups[gi];
    cg.clusters.assign(1, std::vector<std::size_t>(cg.components.size()));
    std::iota(cg.clusters[0].begin(), cg.clusters[0].end(), 0);
    TraceStep step;
    try {
      FitResult f = ctx.fit(cand, res.fit.get());
      step = make_step(ctx, Action::AddCorrelations, cand, &f);
      step.lrt = lr_test(*res.fit, f);
      step.accepted = step.lrt->p_value < ctx.config.alpha && !f.singular;
      step.note = "correlations for " + g.group + "; components dropped earlier are not re-added";
      if (f.singular) step.note += " (extended fit is singular)";
      if (step.accepted) {
        res.structure = std::move(cand);
        res.fit = std::make_shared<const FitResult>(std::move(f));
      }
    } catch (const std::exception& e) {
      step = make_step(ctx, Action::AddCorrelations, cand, nullptr);
      step.accepted = false;
      step.note = std::string("extension failed: ") + e.what();
    }
    res.steps.push_back(std::move(step));
  }
  return res;
}

EliminationResult prune_correlations(const SelectionContext& ctx, const RandomStructure& structure,
                                     std::shared_ptr<const FitResult> fit) {
  EliminationResult res{structure, std::move(fit), {}};
  if (structure.n_correlations() == 0) return res;
  const auto est = group_estimates(*res.fit);
  RandomStructure cand = structure;
  std::size_t nominated = 0;
  for (auto& g : cand.groups) {
    if (g.n_correlations() == 0) continue;
    const GroupEstimates& e = est.at(g.group);
    std::vector<std::vector<std::size_t>> clusters;
    for (const auto& cl : g.clusters) {
      if (cl.size() < 2) {
        clusters.push_back(cl);
        continue;
      }
      // Union-find over the retained (strong) correlations of the cluster.
      std::vector<std::size_t> parent(cl.size());
      std::iota(parent.begin(), parent.end(), 0);
      auto root = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
      };
      for (std::size_t a = 0; a < cl.size(); ++a) {
        for (std::size_t b = a + 1; b < cl.size(); ++b) {
          const Eigen::Index ia = label_index(e.labels, g.components[cl[a]].label());
          const Eigen::Index ib = label_index(e.labels, g.components[cl[b]].label());
          const double denom = std::sqrt(e.cov(ia, ia) * e.cov(ib, ib));
          const double r = denom > 0.0 ? e.cov(ia, ib) / denom : 0.0;
          if (std::abs(r) < ctx.config.prune_threshold) {
            ++nominated;
          } else {
            parent[root(a)] = root(b);
          }
        }
      }
      std::map<std::size_t, std::vector<std::size_t>> parts;
      for (std::size_t a = 0; a < cl.size(); ++a) parts[root(a)].push_back(cl[a]);
      std::vector<std::vector<std::size_t>> split;
      for (auto& [r, members] : parts) split.push_back(std::move(members));
      std::sort(split.begin(), split.end());
      for (auto& s : split) clusters.push_back(std::move(s));
    }
    g.clusters = std::move(clusters);
  }
  if (nominated == 0 || cand.n_correlations() == structure.n_correlations()) return res;

  TraceStep step;
  try {
    FitResult f = ctx.fit(cand, res.fit.get());
    step = make_step(ctx, Action::PruneCorrelations, cand, &f);
    step.lrt = lr_test(f, *res.fit);
    step.accepted = step.lrt->p_value > ctx.config.alpha;
    step.note = std::to_string(structure.n_correlations() - cand.n_correlations()) + " correlation(s) with |r| < " +
                fmt("%.2f", ctx.config.prune_threshold);
    if (step.accepted) {
      res.structure = std::move(cand);
      res.fit = std::make_shared<const FitResult>(std::move(f));
    }
  } catch (const std::exception& e) {
    step = make_step(ctx, Action::PruneCorrelations, cand, nullptr);
    step.accepted = false;
    step.note = std::string("pruning failed: ") + e.what();
  }
  res.steps.push_back(std::move(step));
  return res;
}

SelectionTrace run_workflow(const FormulaAST& formula, const Dataset& data, const SelectionConfig& config) {
  const SelectionContext ctx = make_context(formula, data, config);
  SelectionTrace trace;
  trace.config = config;
  RandomStructure current = RandomStructure::from_formula(
      vectorize_random_terms(formula, data, config.contrasts).formula);
  trace.start_formula = format_formula(current.apply_to(ctx.base));
  std::shared_ptr<const FitResult> fit;

  auto append = [&](std::vector<TraceStep> steps) {
    for (auto& s : steps) trace.steps.push_back(std::move(s));
  };
  auto finish = [&] {
    trace.final_structure = current;
    trace.final_formula = current.apply_to(ctx.base);
    trace.final_fit = fit;
    TraceStep stop = make_step(ctx, Action::Stop, current, fit.get());
    if (fit && fit->singular) stop.note = "final model is singular";
    if (trace.error) stop.note = "stopped after error: " + *trace.error;
    trace.steps.push_back(std::move(stop));
    return trace;
  };
  auto budget_left = [&] { return static_cast<int>(trace.steps.size()) < config.max_steps; };

  // maximal model
  std::shared_ptr<const FitResult> maximal;
  try {
    const std::size_t budget = config.maximal_budget > 0 ? config.maximal_budget : config.budget;
    maximal = std::make_shared<const FitResult>(ctx.fit(current, nullptr, budget));
    trace.steps.push_back(make_step(ctx, Action::StartMaximal, current, maximal.get()));
  } catch (const std::exception& e) {
    TraceStep step = make_step(ctx, Action::StartMaximal, current, nullptr);
    step.accepted = false;
    step.note = std::string("maximal fit failed: ") + e.what();
    trace.steps.push_back(std::move(step));
  }
  fit = maximal;

  // zero-correlation model
  bool keep_maximal = false;
  if (current.n_correlations() > 0) {
    const RandomStructure zcp = current.zcp();
    try {
      auto zfit = std::make_shared<const FitResult>(ctx.fit(zcp, maximal.get()));
      TraceStep step = make_step(ctx, Action::FallbackZcp, zcp, zfit.get());
      if (!maximal || !maximal->converged || maximal->singular) {
        step.note = !maximal ? "maximal model could not be fitted"
                    : !maximal->converged ? "maximal model did not converge"
                                          : "maximal model is singular";
      } else {
        step.lrt = lr_test(*zfit, *maximal);
        step.accepted = step.lrt->p_value > config.alpha;
        step.note = step.accepted ? "correlations not supported" : "maximal model retained";
        keep_maximal = !step.accepted;
      }
      if (step.accepted) {
        current = zcp;
        fit = zfit;
      }
      trace.steps.push_back(std::move(step));
    } catch (const std::exception& e) {
      trace.error = std::string("zero-correlation fit failed: ") + e.what();
      if (!fit) return finish();
    }
  }
  if (!fit) {
    trace.error = "no model could be fitted";
    return finish();
  }

  try {
    if (!keep_maximal) {
      // drop unidentified components
      while (fit->singular && budget_left()) {
        DropResult d = drop_components(*fit, current, config);
        if (d.noop) break;
        auto dfit = std::make_shared<const FitResult>(ctx.fit(d.structure, fit.get()));
        TraceStep step = make_step(ctx, Action::DropComponents, d.structure, dfit.get());
        for (const auto& [g, label] : d.removed) {
          step.note += (step.note.empty() ? "removed " : ", ") + label + " | " + g;
        }
        trace.steps.push_back(std::move(step));
        current = std::move(d.structure);
        fit = std::move(dfit);
      }
      // likelihood-ratio elimination
      if (budget_left()) {
        EliminationResult r = lrt_backward_elimination(ctx, current, fit);
        append(std::move(r.steps));
        current = std::move(r.structure);
        fit = std::move(r.fit);
      }
      // correlation extension
      if (budget_left()) {
        EliminationResult r = extend_correlations(ctx, current, fit);
        append(std::move(r.steps));
        current = std::move(r.structure);
        fit = std::move(r.fit);
      }
    }
    // prune weak correlations
    if (budget_left()) {
      EliminationResult r = prune_correlations(ctx, current, fit);
      append(std::move(r.steps));
      current = std::move(r.structure);
      fit = std::move(r.fit);
    }
  } catch (const std::exception& e) {
    trace.error = e.what();
  }
  return finish();
}

std::string format_trace(const SelectionTrace& trace) {
  std::ostringstream out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    out << i + 1 << ". " << to_string(s.action) << (s.accepted ? "" : " (rejected)") << ": " << s.formula << "\n";
    if (s.fit) {
      out << "   deviance " << fmt("%.3f", s.fit->deviance) << " (" << to_string(s.fit->criterion) << ")"
          << (s.fit->converged ? "" : ", not converged") << (s.fit->singular ? ", singular" : "");
      if (!s.dims.empty()) {
        out << ", rePCA dims";
        for (const auto& [g, d] : s.dims) out << " " << g << "=" << d;
      }
      out << "\n";
    }
    if (s.lrt) {
      out << "   LRT chisq(" << s.lrt->df << ") = " << fmt("%.2f", s.lrt->chisq) << ", p = " << fmt("%.4f", s.lrt->p_value)
          << " [" << to_string(s.lrt->criterion) << (s.lrt->refit_ml ? ", refitted" : "") << "]\n";
    }
    if (!s.note.empty()) out << "   " << s.note << "\n";
  }
  return out.str();
}

}  // namespace parsimix
