#include "spasel/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

#include "spasel/num_format.hpp"

namespace spasel {

SiteSet sample_sites(double side, double density, ReplicateRng& rng) {
  if (!(side > 0.0) || !(density > 0.0)) throw InvalidParameter("side and density must be > 0");
  const Eigen::Index n = static_cast<Eigen::Index>(std::llround(density * side * side));
  if (n < 1) throw InvalidParameter("site count rounds to zero");
  Eigen::MatrixXd coords(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (;;) {
      coords(i, 0) = side * rng.uniform();
      coords(i, 1) = side * rng.uniform();
      bool clear = true;
      for (Eigen::Index k = 0; k < i && clear; ++k)
        clear = (coords.row(i) - coords.row(k)).norm() >= 1e-12;
      if (clear) break;  // duplicates are redrawn, keeping the draw order fixed
    }
  }
  return {std::move(coords)};
}

Eigen::MatrixXd sample_covariates(Eigen::Index n, int p, double rho, ReplicateRng& rng) {
  if (n < 2 || p < 1) throw InvalidParameter("need n >= 2 and p >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidParameter("rho must lie in [0, 1)");

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(p, p, rho);
  sigma.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z[j] = rng.normal();
    x.row(i) = (llt.matrixL() * z).transpose();
  }
  for (int j = 0; j < p; ++j) {
    const double mean = x.col(j).mean();
    x.col(j).array() -= mean;
    const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw InvalidParameter("degenerate covariate column");
    x.col(j) /= sd;
  }
  return x;
}

Eigen::VectorXd gp_response_from_noise(const SiteSet& sites, const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& beta, const CovParams& theta,
                                       const Eigen::VectorXd& z) {
  if (x.rows() != sites.size() || beta.size() != x.cols() || z.size() != sites.size())
    throw InvalidParameter("dimension mismatch");
  CholeskyFactor f = factorize(build_covariance(pairwise_distances(sites), theta));
  Eigen::VectorXd y = x * beta + f.lower(z);
  y.array() -= y.mean();
  return y;
}

Eigen::VectorXd sample_gp_response(const SiteSet& sites, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& beta, const CovParams& theta,
                                   ReplicateRng& rng) {
  return gp_response_from_noise(sites, x, beta, theta, rng.normals(sites.size()));
}

Eigen::VectorXd scenario_beta_true(const ScenarioSpec& spec) {
  if (spec.beta_true.size() > 0) {
    if (spec.beta_true.size() != spec.p) throw InvalidParameter("beta_true length must equal p");
    return spec.beta_true;
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(spec.p);
  const double defaults[4] = {4.0, 3.0, 2.0, 1.0};
  for (int j = 0; j < std::min(spec.p, 4); ++j) beta[j] = defaults[j];
  return beta;
}

namespace {

void validate_spec(const ScenarioSpec& spec) {
  if (!(spec.side > 0.0)) throw InvalidParameter("side must be > 0");
  if (!(spec.density > 0.0)) throw InvalidParameter("density must be > 0");
  if (spec.p < 1) throw InvalidParameter("p must be >= 1");
  if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw InvalidParameter("rho must lie in [0, 1)");
  validate_cov_params(spec.theta_true);
  if (spec.omega && !(*spec.omega > 0.0)) throw InvalidParameter("omega must be > 0");
  if (spec.replicates < 1) throw InvalidParameter("need at least one replicate");
  if (spec.workers < 1) throw InvalidParameter("workers must be >= 1");
  if (spec.grid_size < 1) throw InvalidParameter("grid_size must be >= 1");
}

}  // namespace

SpatialDataset simulate_dataset(const ScenarioSpec& spec, int replicate) {
  validate_spec(spec);
  const Eigen::VectorXd beta = scenario_beta_true(spec);
  ReplicateRng rng(spec.seed, static_cast<std::uint64_t>(replicate));
  // fixed draw order: sites, covariates, response
  SpatialDataset data;
  data.sites = sample_sites(spec.side, spec.density, rng);
  data.X = sample_covariates(data.sites.size(), spec.p, spec.rho, rng);
  data.y = sample_gp_response(data.sites, data.X, beta, spec.theta_true, rng);
  return data;
}

namespace {

MethodOutcome outcome_from_fit(const FitResult& fit, const Eigen::VectorXd& beta_true) {
  MethodOutcome out;
  out.ok = true;
  out.lambda = fit.diagnostics.lambda;
  out.beta = fit.beta;
  out.se_beta = fit.se_beta;
  out.theta = fit.theta;
  out.se_theta = fit.se_theta;
  out.loglik = fit.loglik;
  out.bic = fit.bic;
  for (Eigen::Index j = 0; j < beta_true.size(); ++j) {
    const bool zeroed = fit.beta[j] == 0.0;
    if (beta_true[j] == 0.0 && zeroed) ++out.c0;
    if (beta_true[j] != 0.0 && zeroed) ++out.i0;
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CoefSummary summarize_theta_component(const std::vector<ReplicateResult>& reps, int method,
                                      int comp) {
  std::vector<double> est, se;
  for (const ReplicateResult& r : reps) {
    const MethodOutcome& m = r.methods[method];
    if (!m.ok) continue;
    const double v = comp == 0 ? m.theta.range : comp == 1 ? m.theta.nugget : m.theta.sigma2;
    if (std::isfinite(v)) est.push_back(v);
    if (std::isfinite(m.se_theta[comp])) se.push_back(m.se_theta[comp]);
  }
  CoefSummary s;
  s.mean = mean_of(est);
  s.sd = sd_of(est);
  s.sdm = median_of(se);
  return s;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec, const ScenarioProgress& progress) {
  validate_spec(spec);
  const auto t_start = std::chrono::steady_clock::now();

  ScenarioResult result;
  result.spec = spec;
  result.omega = spec.omega.value_or(spec.side / 4.0);
  const Eigen::VectorXd beta_true = scenario_beta_true(spec);
  for (int j = 0; j < spec.p; ++j)
    if (beta_true[j] != 0.0) result.active_truth.push_back(j);

  {
    ReplicateRng probe(spec.seed, 0);
    result.n = sample_sites(spec.side, spec.density, probe).size();
  }
  if (result.n <= spec.p) throw InvalidParameter("scenario needs n > p");

  const TaperSpec taper = TaperSpec::linear(result.omega);
  result.replicates.resize(spec.replicates);

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;

  auto run_replicate = [&](int i) {
    ReplicateResult rep;
    rep.index = i;
    SpatialDataset data;
    bool data_ok = true;
    std::string data_error;
    try {
      data = simulate_dataset(spec, i);
    } catch (const Error& e) {
      data_ok = false;
      data_error = e.what();
    }

    OptimizerConfig cfg;
    for (int m = 0; m < 5 && data_ok; ++m) {
      MethodOutcome& out = rep.methods[m];
      try {
        switch (static_cast<ScenarioMethod>(m)) {
          case ScenarioMethod::ose: {
            TuningResult t = tune_lambda(data, LikelihoodVariant::full, TaperSpec::none(), {},
                                         cfg, spec.scad_a, spec.grid_size);
            out = outcome_from_fit(t.chosen, beta_true);
            break;
          }
          case ScenarioMethod::ose_tapered: {
            TuningResult t = tune_lambda(data, LikelihoodVariant::tapered, taper, {}, cfg,
                                         spec.scad_a, spec.grid_size);
            out = outcome_from_fit(t.chosen, beta_true);
            break;
          }
          case ScenarioMethod::ose_iid: {
            TuningResult t = tune_lambda_baseline(data, {}, cfg, spec.scad_a, spec.grid_size);
            out = outcome_from_fit(t.chosen, beta_true);
            break;
          }
          case ScenarioMethod::ose_oracle_start: {
            OptimizerConfig init_cfg = cfg;
            init_cfg.compute_se = false;
            FitResult init = fit_mle_on_support(data, result.active_truth,
                                                LikelihoodVariant::full, TaperSpec::none(),
                                                init_cfg);
            TuningResult t =
                tune_lambda_from(data, LikelihoodVariant::full, TaperSpec::none(), {}, cfg,
                                 init, spec.scad_a, spec.grid_size);
            out = outcome_from_fit(t.chosen, beta_true);
            break;
          }
          case ScenarioMethod::mle_oracle: {
            FitResult fit = fit_mle_on_support(data, result.active_truth,
                                               LikelihoodVariant::full, TaperSpec::none(), cfg);
            out = outcome_from_fit(fit, beta_true);
            break;
          }
        }
      } catch (const Error& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
    if (!data_ok)
      for (MethodOutcome& out : rep.methods) {
        out.ok = false;
        out.error = data_error;
      }
    result.replicates[i] = std::move(rep);
    const int completed = ++done;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(completed, spec.replicates);
    }
  };

  const int workers = std::min(spec.workers, spec.replicates);
  if (workers <= 1) {
    for (int i = 0; i < spec.replicates; ++i) run_replicate(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= spec.replicates) return;
          run_replicate(i);
        }
      });
    for (std::thread& t : pool) t.join();
  }

  for (int m = 0; m < 5; ++m) {
    MethodSummary& s = result.summary[m];
    s.name = kScenarioMethodNames[m];
    std::vector<double> c0s, i0s;
    for (const ReplicateResult& r : result.replicates) {
      const MethodOutcome& out = r.methods[m];
      if (!out.ok) continue;
      c0s.push_back(out.c0);
      i0s.push_back(out.i0);
    }
    s.used = static_cast<int>(c0s.size());
    s.dropped = spec.replicates - s.used;
    s.c0_mean = mean_of(c0s);
    s.i0_mean = mean_of(i0s);

    for (int j : result.active_truth) {
      std::vector<double> est, se;
      for (const ReplicateResult& r : result.replicates) {
        const MethodOutcome& out = r.methods[m];
        if (!out.ok || out.beta[j] == 0.0) continue;
        est.push_back(out.beta[j]);
        if (std::isfinite(out.se_beta[j])) se.push_back(out.se_beta[j]);
      }
      CoefSummary c;
      c.index = j;
      c.mean = mean_of(est);
      c.sd = sd_of(est);
      c.sdm = median_of(se);
      s.coefs.push_back(c);
    }
    s.range = summarize_theta_component(result.replicates, m, 0);
    s.nugget = summarize_theta_component(result.replicates, m, 1);
    s.sigma2 = summarize_theta_component(result.replicates, m, 2);
  }

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

std::vector<SummaryRow> scenario_summary_rows(const ScenarioResult& result) {
  std::vector<SummaryRow> rows;
  auto add = [&](const std::string& name, double truth, auto&& get) {
    SummaryRow r;
    r.statistic = name;
    r.truth = truth;
    for (int m = 0; m < 5; ++m) r.values[m] = get(result.summary[m]);
    rows.push_back(std::move(r));
  };

  const Eigen::VectorXd beta_true = scenario_beta_true(result.spec);
  const double zeros_truth =
      static_cast<double>(result.spec.p) - static_cast<double>(result.active_truth.size());

  add("c0", zeros_truth, [](const MethodSummary& s) { return s.c0_mean; });
  add("i0", 0.0, [](const MethodSummary& s) { return s.i0_mean; });
  for (std::size_t k = 0; k < result.active_truth.size(); ++k) {
    const int j = result.active_truth[k];
    const std::string base = "beta" + std::to_string(j + 1);
    add(base + "_mean", beta_true[j],
        [k](const MethodSummary& s) { return s.coefs[k].mean; });
    add(base + "_sd", kNaN, [k](const MethodSummary& s) { return s.coefs[k].sd; });
    add(base + "_sdm", kNaN, [k](const MethodSummary& s) { return s.coefs[k].sdm; });
  }
  add("range_mean", result.spec.theta_true.range,
      [](const MethodSummary& s) { return s.range.mean; });
  add("range_sd", kNaN, [](const MethodSummary& s) { return s.range.sd; });
  add("range_sdm", kNaN, [](const MethodSummary& s) { return s.range.sdm; });
  add("nugget_mean", result.spec.theta_true.nugget,
      [](const MethodSummary& s) { return s.nugget.mean; });
  add("nugget_sd", kNaN, [](const MethodSummary& s) { return s.nugget.sd; });
  add("nugget_sdm", kNaN, [](const MethodSummary& s) { return s.nugget.sdm; });
  add("sigma2_mean", result.spec.theta_true.sigma2,
      [](const MethodSummary& s) { return s.sigma2.mean; });
  add("sigma2_sd", kNaN, [](const MethodSummary& s) { return s.sigma2.sd; });
  add("sigma2_sdm", kNaN, [](const MethodSummary& s) { return s.sigma2.sdm; });
  add("dropped", kNaN,
      [](const MethodSummary& s) { return static_cast<double>(s.dropped); });
  if (result.spec.replicates == 1) {
    // Across-replicate spread is undefined for a single replicate.
    std::erase_if(rows,
                  [](const SummaryRow& r) { return r.statistic.ends_with("_sd"); });
  }
  return rows;
}

void write_scenario_csv(const ScenarioResult& result, std::ostream& os) {
  os << "statistic,truth";
  for (const MethodSummary& s : result.summary) os << ',' << s.name;
  os << '\n';
  for (const SummaryRow& r : scenario_summary_rows(result)) {
    os << r.statistic << ',' << format_double(r.truth);
    for (double v : r.values) os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace spasel
