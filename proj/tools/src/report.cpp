#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace parsimix::cli {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = true) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

void open_csv(std::ofstream& out, const std::filesystem::path& path) {
  out.open(path);
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace

Json tool_json() {
  return Json{{"name", "parsimix"}, {"version", PARSIMIX_VERSION}, {"schema_version", kSchemaVersion}};
}

Json data_json(const Dataset& data, const std::string& path) {
  const DataFingerprint fp = fingerprint(data);
  Json schema = Json::array();
  for (const auto& [name, kind] : fp.schema) schema.push_back(Json{{"name", name}, {"kind", kind}});
  return Json{{"path", path},
              {"rows", fp.rows},
              {"dropped_rows", data.dropped_rows()},
              {"columns", schema},
              {"content_hash", hex64(fp.content_hash)}};
}

Json contrasts_json(const ContrastScheme& contrasts) {
  Json per = Json::object();
  for (const auto& [factor, kind] : contrasts.per_factor) per[factor] = to_string(kind);
  return Json{{"default", to_string(contrasts.default_kind)}, {"factors", per}};
}

Json fit_json(const FitResult& fit) {
  Json out;
  out["formula"] = format_formula(fit.matrices->formula);
  out["criterion"] = to_string(fit.criterion);
  out["optimizer"] = to_string(fit.method);
  out["deviance"] = fit.deviance;
  out["loglik"] = fit.loglik;
  out["converged"] = fit.converged;
  out["singular"] = fit.singular;
  out["n_evals"] = fit.n_evals;
  out["budget"] = fit.budget;
  out["n"] = fit.n();
  out["n_params"] = fit.n_params();
  const InformationCriteria ic = information_criteria(fit);
  out["ic"] = Json{{"aic", ic.aic}, {"bic", ic.bic}, {"k", ic.k}};
  out["sigma"] = fit.sigma;
  out["theta"] = vector_json(fit.theta);
  Json flags = Json::array();
  for (bool b : fit.boundary_flags) flags.push_back(b);
  out["boundary_flags"] = flags;

  Json fixef = Json::array();
  try {
    for (const auto& r : fixed_effects_table(fit)) {
      fixef.push_back(Json{{"term", r.label},
                           {"estimate", r.estimate},
                           {"se", r.se},
                           {"t", r.t},
                           {"lower", r.lower},
                           {"upper", r.upper}});
    }
  } catch (const InferenceError&) {
    for (std::size_t j = 0; j < fit.p(); ++j) {
      fixef.push_back(Json{{"term", fit.matrices->fixed_labels[j]},
                           {"estimate", fit.beta[static_cast<Eigen::Index>(j)]},
                           {"se", nullptr},
                           {"t", nullptr},
                           {"lower", nullptr},
                           {"upper", nullptr}});
    }
  }
  out["fixef"] = fixef;

  Json random = Json::array();
  for (const auto& f : fit.factor_lambdas()) {
    Json g;
    g["group"] = f.group;
    const Eigen::MatrixXd cov = fit.sigma * fit.sigma * f.lambda * f.lambda.transpose();
    Json comps = Json::array();
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      comps.push_back(Json{{"name", f.labels[i]}, {"sd", std::sqrt(std::max(cov(ii, ii), 0.0))}});
    }
    g["components"] = comps;
    Json corr = Json::array();
    Eigen::Index base = 0;
    for (std::size_t b : f.blocks) {
      const RandomBlock& rb = fit.matrices->blocks[b];
      for (int i = 0; i < rb.d; ++i) {
        for (int j = 0; j < i; ++j) {
          const double denom = std::sqrt(cov(base + i, base + i) * cov(base + j, base + j));
          corr.push_back(Json{{"a", rb.labels[static_cast<std::size_t>(j)]},
                              {"b", rb.labels[static_cast<std::size_t>(i)]},
                              {"r", denom > 0.0 ? Json(cov(base + i, base + j) / denom) : Json(nullptr)}});
        }
      }
      base += rb.d;
    }
    g["correlations"] = corr;
    const Eigen::VectorXd sv = lambda_singular_values(f.lambda);
    g["singular_values"] = vector_json(sv);
    Json lambda = Json::array();
    for (Eigen::Index i = 0; i < f.lambda.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index j = 0; j <= i; ++j) row.push_back(f.lambda(i, j));
      lambda.push_back(std::move(row));
    }
    g["lambda"] = lambda;
    g["rank"] = numeric_rank(sv, fit.singular_tol);
    random.push_back(std::move(g));
  }
  out["sd_cor"] = random;
  return out;
}

Json repca_json(const RePcaResult& pca) {
  Json factors = Json::array();
  for (const auto& f : pca.factors) {
    Json labels = Json::array();
    for (const auto& l : f.labels) labels.push_back(l);
    factors.push_back(Json{{"group", f.group},
                           {"labels", labels},
                           {"singular_values", vector_json(f.singular_values)},
                           {"proportions", vector_json(f.proportions)},
                           {"cumulative", vector_json(f.cumulative)},
                           {"dim", f.dim},
                           {"rank", f.rank}});
  }
  return Json{{"dim_tol", pca.dim_tol}, {"singular_tol", pca.singular_tol}, {"factors", factors}};
}

Json lrt_json(const LrtResult& lrt) {
  return Json{{"chisq", lrt.chisq},
              {"df", lrt.df},
              {"p_value", lrt.p_value},
              {"criterion", to_string(lrt.criterion)},
              {"refit_ml", lrt.refit_ml},
              {"degenerate", lrt.degenerate},
              {"deviance_small", lrt.deviance_small},
              {"deviance_large", lrt.deviance_large},
              {"reference", "central chi-square, df = parameter difference"}};
}

Json selection_config_json(const SelectionConfig& c) {
  return Json{{"alpha", c.alpha},
              {"dim_tol", c.dim_tol},
              {"singular_tol", c.singular_tol},
              {"boundary_tol", c.boundary_tol},
              {"prune_threshold", c.prune_threshold},
              {"max_steps", c.max_steps},
              {"criterion", to_string(c.criterion)},
              {"drop_order", c.drop_order},
              {"optimizer", to_string(c.method)},
              {"budget", c.budget},
              {"maximal_budget", c.maximal_budget},
              {"contrasts", contrasts_json(c.contrasts)}};
}

Json trace_json(const SelectionTrace& trace) {
  Json steps = Json::array();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    Json step;
    step["index"] = i + 1;
    step["action"] = to_string(s.action);
    step["accepted"] = s.accepted;
    step["formula"] = s.formula;
    step["note"] = s.note;
    if (s.fit) {
      step["fit"] = Json{{"deviance", s.fit->deviance}, {"loglik", s.fit->loglik},
                         {"criterion", to_string(s.fit->criterion)}, {"converged", s.fit->converged},
                         {"singular", s.fit->singular}, {"n_evals", s.fit->n_evals},
                         {"n_params", s.fit->n_params}, {"aic", s.fit->aic},
                         {"bic", s.fit->bic}};
    } else {
      step["fit"] = nullptr;
    }
    Json dims = Json::object();
    for (const auto& [g, d] : s.dims) dims[g] = d;
    step["dims"] = dims;
    step["lrt"] = s.lrt ? lrt_json(*s.lrt) : Json(nullptr);
    steps.push_back(std::move(step));
  }
  Json out;
  out["config"] = selection_config_json(trace.config);
  out["start_formula"] = trace.start_formula;
  out["steps"] = steps;
  out["final_formula"] = format_formula(trace.final_formula);
  out["error"] = trace.error ? Json(*trace.error) : Json(nullptr);
  out["final_fit"] = trace.final_fit ? fit_json(*trace.final_fit) : Json(nullptr);
  return out;
}

std::string render_fit_text(const Json& fit) {
  std::ostringstream out;
  out << "Linear mixed model fit by " << fit["criterion"].get<std::string>() << " (optimizer "
      << fit["optimizer"].get<std::string>() << ")\n";
  out << "Formula: " << fit["formula"].get<std::string>() << "\n\n";
  out << "  deviance " << fmt("%.4f", fit["deviance"].get<double>()) << "  logLik "
      << fmt("%.4f", fit["loglik"].get<double>()) << "  AIC " << fmt("%.4f", fit["ic"]["aic"].get<double>())
      << "  BIC " << fmt("%.4f", fit["ic"]["bic"].get<double>()) << "\n";
  out << "  converged: " << (fit["converged"].get<bool>() ? "yes" : "no") << " ("
      << fit["n_evals"].get<std::size_t>() << " of " << fit["budget"].get<std::size_t>() << " evaluations)"
      << "  singular: " << (fit["singular"].get<bool>() ? "yes" : "no") << "\n\n";

  out << "Random effects:\n";
  out << " " << pad("Group", 12) << pad("Name", 24) << pad("Std.Dev.", 10, false) << "  Corr\n";
  for (const auto& g : fit["sd_cor"]) {
    bool first = true;
    for (const auto& c : g["components"]) {
      const std::string name = c["name"].get<std::string>();
      out << " " << pad(first ? g["group"].get<std::string>() : "", 12) << pad(name, 24)
          << pad(fmt("%.4f", c["sd"].get<double>()), 10, false);
      std::string corr;
      for (const auto& r : g["correlations"]) {
        if (r["b"].get<std::string>() != name) continue;
        corr += " " + (r["r"].is_null() ? std::string("  NA") : fmt("%5.2f", r["r"].get<double>()));
      }
      out << (corr.empty() ? "" : " " + corr) << "\n";
      first = false;
    }
  }
  out << " " << pad("Residual", 36) << pad(fmt("%.4f", fit["sigma"].get<double>()), 10, false) << "\n\n";

  out << "Fixed effects:\n";
  out << " " << pad("Term", 24) << pad("Estimate", 11, false) << pad("Std.Error", 11, false)
      << pad("t value", 9, false) << pad("2.5%", 11, false) << pad("97.5%", 11, false) << "\n";
  auto num = [](const Json& v, const char* pattern, std::size_t width) {
    return pad(v.is_null() ? std::string("NA") : fmt(pattern, v.get<double>()), width, false);
  };
  for (const auto& r : fit["fixef"]) {
    out << " " << pad(r["term"].get<std::string>(), 24) << num(r["estimate"], "%.4f", 11)
        << num(r["se"], "%.4f", 11) << num(r["t"], "%.2f", 9) << num(r["lower"], "%.4f", 11)
        << num(r["upper"], "%.4f", 11) << "\n";
  }
  return out.str();
}

std::string render_repca_table(const Json& repca) {
  std::size_t width = 0;
  for (const auto& f : repca["factors"]) width = std::max(width, f["cumulative"].size());
  std::ostringstream out;
  out << "Cumulative proportion of variance explained (dim_tol " << fmt("%g", repca["dim_tol"].get<double>())
      << ")\n";
  out << pad("Group", 12);
  for (std::size_t i = 0; i < width; ++i) out << pad("PC" + std::to_string(i + 1), 6, false);
  out << pad("dim", 6, false) << "\n";
  for (const auto& f : repca["factors"]) {
    out << pad(f["group"].get<std::string>(), 12);
    const auto& cum = f["cumulative"];
    for (std::size_t i = 0; i < width; ++i) {
      out << pad(i < cum.size() ? fmt("%.2f", cum[i].get<double>()) : "", 6, false);
    }
    out << pad(std::to_string(f["dim"].get<int>()), 6, false) << "\n";
  }
  return out.str();
}

std::string render_trace_text(const Json& trace) {
  std::ostringstream out;
  for (const auto& s : trace["steps"]) {
    out << s["index"].get<std::size_t>() << ". " << s["action"].get<std::string>()
        << (s["accepted"].get<bool>() ? "" : " (rejected)") << ": " << s["formula"].get<std::string>() << "\n";
    if (!s["fit"].is_null()) {
      const Json& f = s["fit"];
      out << "   deviance " << fmt("%.3f", f["deviance"].get<double>()) << " (" << f["criterion"].get<std::string>()
          << ")" << (f["converged"].get<bool>() ? "" : ", not converged")
          << (f["singular"].get<bool>() ? ", singular" : "");
      if (!s["dims"].empty()) {
        out << ", rePCA dims";
        for (const auto& [g, d] : s["dims"].items()) out << " " << g << "=" << d.get<int>();
      }
      out << "\n";
    }
    if (!s["lrt"].is_null()) {
      const Json& l = s["lrt"];
      out << "   LRT chisq(" << l["df"].get<int>() << ") = " << fmt("%.2f", l["chisq"].get<double>())
          << ", p = " << fmt("%.4f", l["p_value"].get<double>()) << " [" << l["criterion"].get<std::string>()
          << (l["refit_ml"].get<bool>() ? ", refitted" : "") << "]\n";
    }
    if (!s["note"].get<std::string>().empty()) out << "   " << s["note"].get<std::string>() << "\n";
  }
  return out.str();
}

void write_fit_plots(const Json& fit, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto cell = [](const Json& v) {
    if (v.is_null()) return std::string("NA");
    std::ostringstream s;
    s.precision(17);
    s << v.get<double>();
    return s.str();
  };
  std::ofstream fx;
  open_csv(fx, dir / "fixef.csv");
  fx << "term,estimate,se,lower,upper\n";
  for (const auto& r : fit["fixef"]) {
    fx << r["term"].get<std::string>() << "," << cell(r["estimate"]) << "," << cell(r["se"]) << ","
       << cell(r["lower"]) << "," << cell(r["upper"]) << "\n";
  }
  std::ofstream sd;
  open_csv(sd, dir / "sd.csv");
  sd << "group,component,sd\n";
  std::ofstream corr;
  open_csv(corr, dir / "corr.csv");
  corr << "group,a,b,r\n";
  for (const auto& g : fit["sd_cor"]) {
    const std::string group = g["group"].get<std::string>();
    for (const auto& c : g["components"]) sd << group << "," << c["name"].get<std::string>() << "," << cell(c["sd"]) << "\n";
    for (const auto& r : g["correlations"]) {
      corr << group << "," << r["a"].get<std::string>() << "," << r["b"].get<std::string>() << "," << cell(r["r"]) << "\n";
    }
  }
  sd << "Residual,," << cell(fit["sigma"]) << "\n";
}

void write_scree_plot(const Json& repca, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out;
  open_csv(out, dir / "scree.csv");
  out.precision(17);
  out << "group,component,singular_value,proportion,cumulative\n";
  for (const auto& f : repca["factors"]) {
    for (std::size_t i = 0; i < f["proportions"].size(); ++i) {
      out << f["group"].get<std::string>() << "," << i + 1 << "," << f["singular_values"][i].get<double>() << ","
          << f["proportions"][i].get<double>() << "," << f["cumulative"][i].get<double>() << "\n";
    }
  }
}

}  // namespace parsimix::cli
