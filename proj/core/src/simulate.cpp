#include "parsimix/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "parsimix/covparam.hpp"

namespace parsimix {

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  // 53 random bits, shifted by half a step so 0 is never returned.
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double SplitMix64::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

namespace {

std::string level_label(const std::string& name, int index) {
  std::string prefix;
  for (char c : name) prefix += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return prefix + std::to_string(index + 1);
}

}  // namespace

Dataset design_frame(const TruthSpec& spec) {
  if (spec.groups.empty()) throw SimulationError("design needs at least one grouping factor");
  if (spec.replicates < 1) throw SimulationError("replicates must be >= 1");
  std::map<std::string, std::size_t> group_index;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    if (spec.groups[g].levels < 1) throw SimulationError("grouping factor '" + spec.groups[g].name + "' has no levels");
    group_index[spec.groups[g].name] = g;
  }
  std::vector<std::size_t> within;
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    const FactorSpec& fs = spec.factors[f];
    if (fs.levels < 2) throw SimulationError("factor '" + fs.name + "' needs at least two levels");
    if (fs.between.empty()) {
      within.push_back(f);
    } else if (!group_index.contains(fs.between)) {
      throw SimulationError("factor '" + fs.name + "' is between an unknown group '" + fs.between + "'");
    }
  }
  int cells = 1;
  for (std::size_t f : within) cells *= spec.factors[f].levels;

  std::vector<std::vector<std::string>> group_cols(spec.groups.size());
  std::vector<std::vector<std::string>> factor_cols(spec.factors.size());
  std::vector<int> idx(spec.groups.size(), 0);
  auto emit = [&](int cell) {
    for (int r = 0; r < spec.replicates; ++r) {
      for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        group_cols[g].push_back(level_label(spec.groups[g].name, idx[g]));
      }
      int rest = cell;
      for (std::size_t f = 0; f < spec.factors.size(); ++f) {
        const FactorSpec& fs = spec.factors[f];
        int level = 0;
        if (fs.between.empty()) {
          level = rest % fs.levels;
          rest /= fs.levels;
        } else {
          level = idx[group_index[fs.between]] % fs.levels;
        }
        factor_cols[f].push_back(level_label(fs.name, level));
      }
    }
  };
  std::size_t crossings = 1;
  for (const auto& g : spec.groups) crossings *= static_cast<std::size_t>(g.levels);
  for (std::size_t c = 0; c < crossings; ++c) {
    // Last grouping factor varies fastest.
    std::size_t rest = c;
    for (std::size_t g = spec.groups.size(); g-- > 0;) {
      idx[g] = static_cast<int>(rest % static_cast<std::size_t>(spec.groups[g].levels));
      rest /= static_cast<std::size_t>(spec.groups[g].levels);
    }
    if (spec.assignment == Assignment::Full) {
      for (int cell = 0; cell < cells; ++cell) emit(cell);
    } else {
      int sum = 0;
      for (int i : idx) sum += i;
      emit(sum % cells);
    }
  }

  Dataset data;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) data.add_factor_labels(spec.groups[g].name, group_cols[g]);
  for (std::size_t f = 0; f < spec.factors.size(); ++f) data.add_factor_labels(spec.factors[f].name, factor_cols[f]);
  return data;
}

Eigen::MatrixXd draw_effects(const Eigen::MatrixXd& cov, int levels, SplitMix64& rng) {
  Eigen::MatrixXd factor;
  try {
    factor = pivoted_cholesky(cov, 1e-12);
  } catch (const std::invalid_argument& e) {
    throw SimulationError(std::string("covariance is not positive semidefinite: ") + e.what());
  }
  const auto d = cov.rows();
  Eigen::MatrixXd out(levels, d);
  Eigen::VectorXd z(d);
  for (int l = 0; l < levels; ++l) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
    out.row(l) = (factor * z).transpose();
  }
  return out;
}

Dataset simulate_lmm(const TruthSpec& spec) {
  Dataset data = design_frame(spec);
  const FormulaAST ast = parse_formula(spec.formula);
  if (data.find(ast.response) != nullptr) {
    throw SimulationError("response '" + ast.response + "' clashes with a design column");
  }
  data.add_numeric(ast.response, std::vector<double>(data.n_rows(), 0.0));
  const ModelMatrices mm = build_model_matrices(ast, data, spec.contrasts);
  if (!(spec.sigma >= 0.0)) throw SimulationError("sigma must be >= 0");

  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mm.n()));
  if (!spec.beta.empty()) {
    if (spec.beta.size() != mm.p()) {
      throw SimulationError("beta has " + std::to_string(spec.beta.size()) + " entries, the fixed part has " +
                            std::to_string(mm.p()) + " columns");
    }
    y += mm.X * Eigen::Map<const Eigen::VectorXd>(spec.beta.data(), static_cast<Eigen::Index>(spec.beta.size()));
  }

  SplitMix64 rng(spec.seed);
  std::vector<std::string> groups;
  for (const auto& b : mm.blocks) {
    if (std::find(groups.begin(), groups.end(), b.group) == groups.end()) groups.push_back(b.group);
  }
  for (const auto& [name, cov] : spec.covariance) {
    if (std::find(groups.begin(), groups.end(), name) == groups.end()) {
      throw SimulationError("covariance given for '" + name + "', which has no random term");
    }
  }
  for (const auto& group : groups) {
    auto it = spec.covariance.find(group);
    if (it == spec.covariance.end()) throw SimulationError("no covariance given for '" + group + "'");
    int dim = 0;
    int levels = 0;
    for (const auto& b : mm.blocks) {
      if (b.group == group) {
        dim += b.d;
        levels = b.k;
      }
    }
    const Eigen::MatrixXd& cov = it->second;
    if (cov.rows() != dim || cov.cols() != dim) {
      throw SimulationError("covariance for '" + group + "' must be " + std::to_string(dim) + "x" +
                            std::to_string(dim));
    }
    const Eigen::MatrixXd b = draw_effects(cov, levels, rng);
    int offset = 0;
    for (const auto& blk : mm.blocks) {
      if (blk.group != group) continue;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] += blk.values.row(i).dot(b.row(blk.level[static_cast<std::size_t>(i)]).segment(offset, blk.d));
      }
      offset += blk.d;
    }
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += spec.sigma * rng.normal();

  Dataset out = design_frame(spec);
  out.add_numeric(ast.response, std::vector<double>(y.data(), y.data() + y.size()));
  return out;
}

OneWayOracle closed_form_one_way(const std::vector<std::vector<double>>& groups) {
  OneWayOracle o;
  o.groups = static_cast<int>(groups.size());
  if (o.groups < 2) throw SimulationError("one-way oracle needs at least two groups");
  o.per_group = static_cast<int>(groups.front().size());
  if (o.per_group < 2) throw SimulationError("one-way oracle needs at least two observations per group");
  double grand = 0.0;
  std::vector<double> means;
  for (const auto& g : groups) {
    if (static_cast<int>(g.size()) != o.per_group) throw SimulationError("one-way layout is unbalanced");
    double m = 0.0;
    for (double v : g) m += v;
    m /= static_cast<double>(g.size());
    means.push_back(m);
    grand += m;
  }
  grand /= static_cast<double>(groups.size());
  const double k = o.groups;
  const double n = o.per_group;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    o.ssb += n * (means[i] - grand) * (means[i] - grand);
    for (double v : groups[i]) o.ssw += (v - means[i]) * (v - means[i]);
  }
  o.msb = o.ssb / (k - 1.0);
  o.msw = o.ssw / (k * (n - 1.0));
  const double total = k * n;
  if (o.msb >= o.msw) {
    o.sigma2 = o.msw;
    o.sigma_b2 = (o.msb - o.msw) / n;
  } else {
    o.sigma2 = (o.ssw + o.ssb) / (total - 1.0);
    o.sigma_b2 = 0.0;
  }
  const double lambda1 = o.sigma2 + n * o.sigma_b2;
  o.reml_deviance = (total - 1.0) * std::log(2.0 * std::numbers::pi) + k * std::log(lambda1) +
                    k * (n - 1.0) * std::log(o.sigma2) + std::log(total / lambda1) + o.ssw / o.sigma2 +
                    o.ssb / lambda1;
  return o;
}

OneWayOracle closed_form_one_way(const Dataset& data, const std::string& response, const std::string& group) {
  const Column& y = data.at(response);
  const Column& g = data.at(group);
  if (y.is_factor()) throw SimulationError("response must be numeric");
  if (!g.is_factor()) throw SimulationError("group must be a factor");
  std::vector<std::vector<double>> groups(g.levels.size());
  for (std::size_t i = 0; i < data.n_rows(); ++i) groups[static_cast<std::size_t>(g.codes[i])].push_back(y.numeric[i]);
  return closed_form_one_way(groups);
}

}  // namespace parsimix
