#include "spasel/result_io.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace spasel {

namespace {

using json = nlohmann::ordered_json;

json num_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num_or_null(v[i]));
  return a;
}

json theta_to_json(const CovParams& theta, const Eigen::Vector3d& se) {
  json t;
  t["r"] = num_or_null(theta.range);
  t["c"] = num_or_null(theta.nugget);
  t["sigma2"] = num_or_null(theta.sigma2);
  t["se"] = {{"r", num_or_null(se[0])}, {"c", num_or_null(se[1])},
             {"sigma2", num_or_null(se[2])}};
  return t;
}

json diagnostics_to_json(const FitDiagnostics& d) {
  json j;
  j["method"] = d.method;
  j["converged"] = d.converged;
  j["outer_evaluations"] = d.outer_evaluations;
  j["cd_sweeps"] = d.cd_sweeps;
  j["lla_iterations"] = d.lla_iterations;
  j["rewhitened_each_iteration"] = d.rewhitened_each_iteration;
  j["lambda"] = num_or_null(d.lambda);
  return j;
}

double num_from(const json& v, const char* what) {
  if (v.is_null()) return kNaN;
  if (!v.is_number()) throw SchemaMismatch(std::string("expected number for ") + what);
  return v.get<double>();
}

}  // namespace

std::string fit_output_to_json(const FitOutput& out) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "fit";

  json cfg;
  cfg["variant"] = variant_name(out.config.variant);
  cfg["taper"] = {{"family", taper_name(out.config.taper.family)},
                  {"omega", out.config.taper.family == TaperFamily::linear
                                ? json(out.config.taper.omega)
                                : json(nullptr)}};
  cfg["lambda_mode"] = out.config.lambda_mode == LambdaMode::tune ? "tune" : "fixed";
  cfg["a"] = out.config.scad_a;
  cfg["bic_full_covariance"] = out.config.bic_full_covariance;
  cfg["seed"] = out.config.seed;
  cfg["coords"] = out.input.coord_names;
  cfg["response"] = out.input.response_name;
  cfg["covariates"] = out.input.covariate_names;
  j["config"] = cfg;

  j["standardization"] = {{"y_mean", out.standardization.y_mean},
                          {"x_mean", vector_to_json(out.standardization.x_mean)},
                          {"x_sd", vector_to_json(out.standardization.x_sd)}};

  json beta = json::array();
  for (Eigen::Index k = 0; k < out.fit.beta.size(); ++k) {
    beta.push_back({{"name", out.input.covariate_names[k]},
                    {"estimate", out.fit.beta[k]},
                    {"se", num_or_null(out.fit.se_beta[k])}});
  }
  j["beta"] = beta;
  j["theta"] = theta_to_json(out.fit.theta, out.fit.se_theta);
  j["loglik"] = num_or_null(out.fit.loglik);
  j["bic"] = num_or_null(out.fit.bic);

  json diag = diagnostics_to_json(out.fit.diagnostics);
  if (out.tuning) {
    json t;
    t["lambda"] = json::array();
    t["bic"] = json::array();
    t["selected"] = json::array();
    t["errors"] = json::array();
    for (const LambdaRecord& rec : out.tuning->records) {
      t["lambda"].push_back(rec.lambda);
      t["bic"].push_back(num_or_null(rec.bic));
      t["selected"].push_back(rec.selected_count);
      t["errors"].push_back(rec.error);
    }
    t["chosen_index"] = out.tuning->chosen_index;
    t["initializer_fits"] = out.tuning->initializer_fits;
    diag["tuning"] = t;
  }
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

std::string scenario_result_to_json(const ScenarioResult& result) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "scenario";

  const Eigen::VectorXd beta_true = scenario_beta_true(result.spec);
  json cfg;
  cfg["side"] = result.spec.side;
  cfg["density"] = result.spec.density;
  cfg["n"] = result.n;
  cfg["p"] = result.spec.p;
  cfg["beta_true"] = vector_to_json(beta_true);
  cfg["rho"] = result.spec.rho;
  cfg["theta_true"] = {{"r", result.spec.theta_true.range},
                       {"c", result.spec.theta_true.nugget},
                       {"sigma2", result.spec.theta_true.sigma2}};
  cfg["omega"] = result.omega;
  cfg["replicates"] = result.spec.replicates;
  cfg["seed"] = result.spec.seed;
  cfg["grid_size"] = result.spec.grid_size;
  cfg["a"] = result.spec.scad_a;
  j["config"] = cfg;  // workers omitted on purpose: results are schedule-free

  json summary;
  summary["methods"] = json::array();
  for (const MethodSummary& s : result.summary) summary["methods"].push_back(s.name);
  summary["statistics"] = json::array();
  summary["truth"] = json::array();
  summary["values"] = json::array();
  for (const SummaryRow& row : scenario_summary_rows(result)) {
    summary["statistics"].push_back(row.statistic);
    summary["truth"].push_back(num_or_null(row.truth));
    json vals = json::array();
    for (double v : row.values) vals.push_back(num_or_null(v));
    summary["values"].push_back(vals);
  }
  j["summary"] = summary;

  json reps = json::array();
  for (const ReplicateResult& rep : result.replicates) {
    json r;
    r["index"] = rep.index;
    json methods;
    for (int m = 0; m < 5; ++m) {
      const MethodOutcome& o = rep.methods[m];
      json mo;
      mo["ok"] = o.ok;
      if (!o.ok) {
        mo["error"] = o.error;
      } else {
        mo["lambda"] = num_or_null(o.lambda);
        mo["beta"] = vector_to_json(o.beta);
        mo["se_beta"] = vector_to_json(o.se_beta);
        mo["theta"] = theta_to_json(o.theta, o.se_theta);
        mo["loglik"] = num_or_null(o.loglik);
        mo["bic"] = num_or_null(o.bic);
        mo["c0"] = o.c0;
        mo["i0"] = o.i0;
      }
      methods[kScenarioMethodNames[m]] = mo;
    }
    r["methods"] = methods;
    reps.push_back(r);
  }
  j["replicates"] = reps;
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot write " + path.string());
  os << content;
}

StoredResult read_result_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw SchemaMismatch(path.string() + ": missing schema_version");
  if (j["schema_version"].get<int>() != kSchemaVersion)
    throw SchemaMismatch(path.string() + ": unsupported schema_version " +
                         j["schema_version"].dump());
  const std::string kind = j.value("kind", "");

  try {
    if (kind == "fit") {
      StoredFit f;
      f.source = path.stem().string();
      f.method = j["diagnostics"]["method"].get<std::string>();
      f.variant = j["config"]["variant"].get<std::string>();
      f.taper = j["config"]["taper"]["family"].get<std::string>();
      f.omega = num_from(j["config"]["taper"]["omega"], "omega");
      f.lambda = num_from(j["diagnostics"]["lambda"], "lambda");
      for (const json& b : j["beta"]) {
        StoredBeta sb;
        sb.name = b["name"].get<std::string>();
        sb.estimate = num_from(b["estimate"], "estimate");
        sb.se = num_from(b["se"], "se");
        f.beta.push_back(std::move(sb));
      }
      f.theta.range = num_from(j["theta"]["r"], "theta.r");
      f.theta.nugget = num_from(j["theta"]["c"], "theta.c");
      f.theta.sigma2 = num_from(j["theta"]["sigma2"], "theta.sigma2");
      f.se_theta = {num_from(j["theta"]["se"]["r"], "se.r"),
                    num_from(j["theta"]["se"]["c"], "se.c"),
                    num_from(j["theta"]["se"]["sigma2"], "se.sigma2")};
      f.loglik = num_from(j["loglik"], "loglik");
      f.bic = num_from(j["bic"], "bic");
      return f;
    }
    if (kind == "scenario") {
      StoredScenario s;
      s.source = path.stem().string();
      s.n = j["config"]["n"].get<Eigen::Index>();
      s.replicates = j["config"]["replicates"].get<int>();
      for (const json& m : j["summary"]["methods"]) s.methods.push_back(m.get<std::string>());
      for (const json& st : j["summary"]["statistics"])
        s.statistics.push_back(st.get<std::string>());
      for (const json& t : j["summary"]["truth"]) s.truth.push_back(num_from(t, "truth"));
      for (const json& row : j["summary"]["values"]) {
        std::vector<double> vals;
        for (const json& v : row) vals.push_back(num_from(v, "value"));
        s.values.push_back(std::move(vals));
      }
      return s;
    }
  } catch (const json::exception& e) {
    throw SchemaMismatch(path.string() + ": malformed result: " + e.what());
  }
  throw SchemaMismatch(path.string() + ": unknown kind '" + kind + "'");
}

}  // namespace spasel
