#include <span>

#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "parsimix/design.hpp"
#include "parsimix/fitter.hpp"
#include "parsimix/formula.hpp"
#include "parsimix/repca.hpp"
#include "parsimix/selection.hpp"
#include "parsimix/simulate.hpp"

namespace {

using namespace parsimix;

Eigen::Matrix2d item_cov() {
  Eigen::Matrix2d c;
  c << 0.25, -0.138, -0.138, 0.16;
  return c;
}

Dataset crossed_data(int subjects, int items) {
  return simulate_lmm(testing::crossed_truth(subjects, items, "(1 | Subject) + (1 + P | Item)",
                                             {{"Subject", Eigen::MatrixXd::Constant(1, 1, 0.25)}, {"Item", item_cov()}},
                                             1.0, 11));
}

void BM_SimulateCrossed(benchmark::State& state) {
  const auto subjects = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(crossed_data(subjects, 32));
}
BENCHMARK(BM_SimulateCrossed)->Arg(16)->Arg(56)->Unit(benchmark::kMillisecond);

void BM_ProfiledDeviance(benchmark::State& state) {
  const Dataset data = crossed_data(static_cast<int>(state.range(0)), 32);
  const FormulaAST formula = parse_formula("Y ~ 1 + P*C*A + (1 | Subject) + (1 + P | Item)");
  const ModelMatrices mm = build_model_matrices(formula, data, ContrastScheme{});
  const std::vector<double> theta{0.5, 0.5, -0.3, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(profiled_deviance(std::span<const double>(theta), mm, Criterion::REML));
}
BENCHMARK(BM_ProfiledDeviance)->Arg(16)->Arg(56);

void BM_FitCrossed(benchmark::State& state) {
  const Dataset data = crossed_data(56, 32);
  const FormulaAST formula = parse_formula("Y ~ 1 + P*C*A + (1 | Subject) + (1 + P | Item)");
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(formula, data, ContrastScheme{}));
}
BENCHMARK(BM_FitCrossed)->Unit(benchmark::kMillisecond);

void BM_FitZcpMaximal(benchmark::State& state) {
  const Dataset data = crossed_data(56, 32);
  const FormulaAST formula = parse_formula("Y ~ 1 + P*C*A + (1 + P*C*A || Subject) + (1 + P*C*A || Item)");
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(formula, data, ContrastScheme{}));
}
BENCHMARK(BM_FitZcpMaximal)->Unit(benchmark::kMillisecond);

void BM_RePca(benchmark::State& state) {
  const Dataset data = crossed_data(56, 32);
  const FitResult fit = fit_model(parse_formula("Y ~ 1 + P*C*A + (1 + P*C*A | Item)"), data, ContrastScheme{});
  for (auto _ : state) benchmark::DoNotOptimize(re_pca(fit));
}
BENCHMARK(BM_RePca);

void BM_Workflow(benchmark::State& state) {
  const Dataset data = crossed_data(56, 32);
  const FormulaAST fixed = parse_formula("Y ~ 1 + P*C*A");
  const FormulaAST maximal =
      maximal_formula("Y", fixed.fixed, detect_within(fixed.fixed, {"Subject", "Item"}, data), data);
  SelectionConfig config;
  config.maximal_budget = 500;
  for (auto _ : state) benchmark::DoNotOptimize(run_workflow(maximal, data, config));
}
BENCHMARK(BM_Workflow)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
