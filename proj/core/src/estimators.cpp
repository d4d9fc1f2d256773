#include "spasel/estimators.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace spasel {

namespace {

void validate_penalty(const PenaltySpec& pen) {
  if (!(pen.lambda >= 0.0) || !std::isfinite(pen.lambda))
    throw InvalidParameter("lambda must be finite and >= 0");
  if (!(pen.a > 2.0) || !std::isfinite(pen.a))
    throw InvalidParameter("penalty shape a must be finite and > 2");
}

}  // namespace

double scad_penalty(double beta_abs, const PenaltySpec& pen) {
  validate_penalty(pen);
  const double b = std::abs(beta_abs);
  const double lam = pen.lambda;
  const double a = pen.a;
  if (b <= lam) return lam * b;
  if (b <= a * lam)
    return lam * lam +
           (a * lam * b - 0.5 * b * b - a * lam * lam + 0.5 * lam * lam) / (a - 1.0);
  return 0.5 * (a + 1.0) * lam * lam;
}

double scad_deriv(double beta_abs, const PenaltySpec& pen) {
  validate_penalty(pen);
  const double b = std::abs(beta_abs);
  const double lam = pen.lambda;
  const double a = pen.a;
  if (b <= lam) return lam;
  if (b <= a * lam) return (a * lam - b) / (a - 1.0);
  return 0.0;
}

Eigen::VectorXd weighted_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights, double n_scale,
                               const OptimizerConfig& cfg, int* sweeps_out) {
  const Eigen::Index p = x.cols();
  if (x.rows() != y.size()) throw InvalidParameter("design/response size mismatch");
  if (weights.size() != p) throw InvalidParameter("one weight per column required");
  if (!(n_scale > 0.0)) throw InvalidParameter("n_scale must be positive");
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(weights[j] >= 0.0) || !std::isfinite(weights[j]))
      throw InvalidParameter("weights must be finite and >= 0");

  Eigen::VectorXd norms2(p);
  for (Eigen::Index j = 0; j < p; ++j) norms2[j] = x.col(j).squaredNorm();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = y;
  for (int sweep = 1; sweep <= cfg.cd_max_sweeps; ++sweep) {
    double delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (norms2[j] == 0.0) continue;
      const double z = x.col(j).dot(resid) + norms2[j] * beta[j];
      const double t = n_scale * weights[j];
      double bn = 0.0;
      if (std::abs(z) > t) bn = (z > 0.0 ? z - t : z + t) / norms2[j];
      if (bn != beta[j]) {
        resid += x.col(j) * (beta[j] - bn);
        delta = std::max(delta, std::abs(bn - beta[j]));
        beta[j] = bn;
      }
    }
    if (delta <= cfg.cd_tol) {
      if (sweeps_out) *sweeps_out = sweep;
      return beta;
    }
  }
  throw NonConvergence("coordinate descent exceeded max sweeps", {});
}

namespace {

struct SimplexOutcome {
  Eigen::Vector2d x;
  double fmin = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
  std::vector<double> trace;
};

struct Trampoline {
  const std::function<double(double, double)>* f;
  int evals = 0;
};

double simplex_eval(const gsl_vector* v, void* params) {
  auto* t = static_cast<Trampoline*>(params);
  ++t->evals;
  try {
    return (*t->f)(gsl_vector_get(v, 0), gsl_vector_get(v, 1));
  } catch (const Error&) {
    return 1e30;  // infeasible region; steer the simplex away
  }
}

SimplexOutcome minimize_simplex2(const std::function<double(double, double)>& f,
                                 const Eigen::Vector2d& x0, double step, int max_iters,
                                 double tol, int extra_starts) {
  Trampoline tramp{&f};
  gsl_multimin_function mf;
  mf.f = &simplex_eval;
  mf.n = 2;
  mf.params = &tramp;

  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* ss = gsl_vector_alloc(2);
  gsl_multimin_fminimizer* s =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);

  SimplexOutcome out;
  out.x = x0;
  Eigen::Vector2d start = x0;
  for (int attempt = 0; attempt <= extra_starts; ++attempt) {
    gsl_vector_set(x, 0, start[0]);
    gsl_vector_set(x, 1, start[1]);
    gsl_vector_set_all(ss, step * std::pow(0.3, attempt));
    gsl_multimin_fminimizer_set(s, &mf, x, ss);
    bool conv = false;
    double fprev = gsl_multimin_fminimizer_minimum(s);
    int stall = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
      if (gsl_multimin_fminimizer_iterate(s) != 0) break;
      const double fcur = gsl_multimin_fminimizer_minimum(s);
      out.trace.push_back(fcur);
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-8) == GSL_SUCCESS) {
        conv = true;
        break;
      }
      if (std::abs(fprev - fcur) <= tol * (1.0 + std::abs(fcur))) {
        if (++stall >= 12) {
          conv = true;
          break;
        }
      } else {
        stall = 0;
      }
      fprev = fcur;
    }
    const double fatt = gsl_multimin_fminimizer_minimum(s);
    if (fatt < out.fmin) {
      out.fmin = fatt;
      const gsl_vector* xb = gsl_multimin_fminimizer_x(s);
      out.x = {gsl_vector_get(xb, 0), gsl_vector_get(xb, 1)};
      out.converged = conv;
    }
    start = out.x;
  }
  out.evals = tramp.evals;

  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return out;
}

double logit(double c) { return std::log(c / (1.0 - c)); }

struct ThetaTransform {
  double nugget_floor;
  double range(double t) const { return std::exp(t); }
  double nugget(double t) const {
    const double c = 1.0 / (1.0 + std::exp(-t));
    return std::clamp(c, nugget_floor, 1.0 - 1e-12);
  }
};

int count_selected(const Eigen::VectorXd& beta, std::vector<int>* idx) {
  int k = 0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) {
      if (idx) idx->push_back(static_cast<int>(j));
      ++k;
    }
  return k;
}

double bic_of(double n, double sigma2, int k) {
  return n * std::log(sigma2) + k * std::log(n);
}

// Refit (range, nugget) by simplex with beta fixed, never worse than staying
// at the warm start. Returns the profiled fit at the accepted theta.
struct ThetaStep {
  CovParams theta;
  double loglik;
  int evals;
};

ThetaStep theta_refit(LikelihoodModel& model, const Eigen::VectorXd& beta,
                      const CovParams& warm, const OptimizerConfig& cfg) {
  const ThetaTransform tf{cfg.nugget_floor};
  auto objective = [&](double tr, double tc) {
    return -model.profiled_fit_given_beta(beta, tf.range(tr), tf.nugget(tc)).loglik;
  };
  const Eigen::Vector2d x0{std::log(warm.range),
                           logit(std::clamp(warm.nugget, cfg.nugget_floor, 1.0 - 1e-12))};
  SimplexOutcome sim = minimize_simplex2(objective, x0, cfg.initial_step * 0.3,
                                         cfg.simplex_max_iters, cfg.objective_tol,
                                         cfg.theta_refit_restarts);
  double r = tf.range(sim.x[0]);
  double c = tf.nugget(sim.x[1]);
  ProfiledFit cand = model.profiled_fit_given_beta(beta, r, c);
  ProfiledFit keep = model.profiled_fit_given_beta(beta, warm.range,
                                                   std::clamp(warm.nugget, cfg.nugget_floor,
                                                              1.0 - 1e-12));
  ThetaStep out;
  out.evals = sim.evals + 2;
  if (cand.loglik >= keep.loglik) {
    out.theta = {r, c, cand.sigma2};
    out.loglik = cand.loglik;
  } else {
    out.theta = {warm.range, std::clamp(warm.nugget, cfg.nugget_floor, 1.0 - 1e-12),
                 keep.sigma2};
    out.loglik = keep.loglik;
  }
  return out;
}

}  // namespace

void attach_standard_errors(LikelihoodModel& model, FitResult& fit) {
  InformationMatrices info = model.information({fit.beta, fit.theta});

  Eigen::Matrix3d cov = info.theta_info.inverse();
  for (int k = 0; k < 3; ++k) {
    const double v = cov(k, k);
    fit.se_theta[k] = (std::isfinite(v) && v > 0.0) ? std::sqrt(v) : kNaN;
  }

  fit.se_beta = Eigen::VectorXd::Constant(fit.beta.size(), kNaN);
  const std::size_t k = fit.selected.size();
  if (k == 0) return;
  Eigen::MatrixXd sub(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      sub(i, j) = info.beta_info(fit.selected[i], fit.selected[j]);
  Eigen::MatrixXd covb = sub.inverse();
  for (std::size_t i = 0; i < k; ++i) {
    const double v = covb(i, i);
    fit.se_beta[fit.selected[i]] = (std::isfinite(v) && v > 0.0) ? std::sqrt(v) : kNaN;
  }
}

void attach_standard_errors_iid(const SpatialDataset& data, FitResult& fit) {
  fit.se_beta = Eigen::VectorXd::Constant(fit.beta.size(), kNaN);
  const double n = static_cast<double>(data.n());
  fit.se_theta = {kNaN, kNaN, fit.theta.sigma2 * std::sqrt(2.0 / n)};
  const std::size_t k = fit.selected.size();
  if (k == 0) return;
  Eigen::MatrixXd xs(data.n(), k);
  for (std::size_t i = 0; i < k; ++i) xs.col(i) = data.X.col(fit.selected[i]);
  Eigen::MatrixXd covb = (xs.transpose() * xs).inverse() * fit.theta.sigma2;
  for (std::size_t i = 0; i < k; ++i) {
    const double v = covb(i, i);
    fit.se_beta[fit.selected[i]] = (std::isfinite(v) && v > 0.0) ? std::sqrt(v) : kNaN;
  }
}

FitResult fit_mle(LikelihoodModel& model, const OptimizerConfig& cfg) {
  const SpatialDataset& data = model.data();
  if (!model.design_full_rank()) throw RankDeficientDesign("design matrix is rank deficient");
  if (data.n() <= data.p()) throw InvalidParameter("need more observations than covariates");
  if (cfg.counters) ++cfg.counters->mle_fits;

  const ThetaTransform tf{cfg.nugget_floor};
  auto objective = [&](double tr, double tc) {
    return -model.profiled_fit(tf.range(tr), tf.nugget(tc)).loglik;
  };
  const double r0 = model.max_pairwise_distance() / 4.0;
  const Eigen::Vector2d x0{std::log(r0), logit(0.1)};
  SimplexOutcome sim = minimize_simplex2(objective, x0, cfg.initial_step,
                                         cfg.simplex_max_iters, cfg.objective_tol, cfg.restarts);
  if (!sim.converged)
    throw NonConvergence("likelihood simplex did not converge", sim.trace);

  const double r = tf.range(sim.x[0]);
  const double c = tf.nugget(sim.x[1]);
  ProfiledFit pf = model.profiled_fit(r, c);

  FitResult fit;
  fit.beta = pf.beta;
  fit.theta = {r, c, pf.sigma2};
  fit.loglik = pf.loglik;
  fit.selected.resize(data.p());
  std::iota(fit.selected.begin(), fit.selected.end(), 0);
  fit.bic = bic_of(static_cast<double>(data.n()), pf.sigma2, static_cast<int>(data.p()));
  fit.se_beta = Eigen::VectorXd::Constant(data.p(), kNaN);
  fit.diagnostics.method = "mle";
  fit.diagnostics.converged = true;
  fit.diagnostics.outer_evaluations = sim.evals;
  if (cfg.compute_se) attach_standard_errors(model, fit);
  return fit;
}

FitResult fit_mle(const SpatialDataset& data, LikelihoodVariant variant, const TaperSpec& taper,
                  const OptimizerConfig& cfg) {
  LikelihoodModel model(data, variant, taper);
  return fit_mle(model, cfg);
}

FitResult fit_mle_on_support(const SpatialDataset& data, const std::vector<int>& support,
                             LikelihoodVariant variant, const TaperSpec& taper,
                             const OptimizerConfig& cfg) {
  const Eigen::Index p = data.p();
  if (support.empty()) throw InvalidParameter("support must be nonempty");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= p) throw InvalidParameter("support index out of range");
    if (i > 0 && support[i] <= support[i - 1])
      throw InvalidParameter("support must be strictly increasing");
  }

  SpatialDataset sub;
  sub.sites = data.sites;
  sub.y = data.y;
  sub.X.resize(data.n(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) sub.X.col(i) = data.X.col(support[i]);

  FitResult inner = fit_mle(sub, variant, taper, cfg);

  FitResult fit = inner;
  fit.beta = Eigen::VectorXd::Zero(p);
  fit.se_beta = Eigen::VectorXd::Constant(p, kNaN);
  for (std::size_t i = 0; i < support.size(); ++i) {
    fit.beta[support[i]] = inner.beta[i];
    fit.se_beta[support[i]] = inner.se_beta[i];
  }
  fit.selected = support;
  return fit;
}

FitResult fit_ose_from(LikelihoodModel& model, const PenaltySpec& pen, const OptimizerConfig& cfg,
                       const FitResult& init) {
  validate_penalty(pen);
  const SpatialDataset& data = model.data();
  if (init.beta.size() != data.p()) throw InvalidParameter("initializer beta length mismatch");
  if (cfg.counters) ++cfg.counters->ose_fits;
  const double n = static_cast<double>(data.n());

  LikelihoodModel::WhitenedDesign wd = model.whitened_design(init.theta);
  Eigen::VectorXd weights(data.p());
  for (Eigen::Index j = 0; j < data.p(); ++j)
    weights[j] = scad_deriv(std::abs(init.beta[j]), pen);

  int sweeps = 0;
  Eigen::VectorXd beta = weighted_lasso(wd.X, wd.y, weights, n, cfg, &sweeps);

  ThetaStep step = theta_refit(model, beta, init.theta, cfg);

  FitResult fit;
  fit.beta = beta;
  fit.theta = step.theta;
  fit.loglik = step.loglik;
  count_selected(beta, &fit.selected);
  fit.bic = bic_of(n, step.theta.sigma2, static_cast<int>(fit.selected.size()));
  fit.se_beta = Eigen::VectorXd::Constant(data.p(), kNaN);
  fit.diagnostics.method = "ose";
  fit.diagnostics.lambda = pen.lambda;
  fit.diagnostics.cd_sweeps = sweeps;
  fit.diagnostics.outer_evaluations = step.evals;
  fit.diagnostics.lla_iterations = 1;
  double penalty_total = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    penalty_total += scad_penalty(std::abs(beta[j]), pen);
  fit.diagnostics.objective_trace = {step.loglik - n * penalty_total};
  if (cfg.compute_se) attach_standard_errors(model, fit);
  return fit;
}

FitResult fit_ose(const SpatialDataset& data, LikelihoodVariant variant, const TaperSpec& taper,
                  const PenaltySpec& pen, const OptimizerConfig& cfg) {
  LikelihoodModel model(data, variant, taper);
  OptimizerConfig init_cfg = cfg;
  init_cfg.compute_se = false;
  FitResult init = fit_mle(model, init_cfg);
  return fit_ose_from(model, pen, cfg, init);
}

FitResult fit_pmle_from(LikelihoodModel& model, const PenaltySpec& pen, const OptimizerConfig& cfg,
                        const FitResult& init) {
  validate_penalty(pen);
  if (cfg.lla_max_iters < 1) throw InvalidParameter("lla_max_iters must be >= 1");
  const SpatialDataset& data = model.data();
  const double n = static_cast<double>(data.n());

  auto penalized = [&](const Eigen::VectorXd& b, const CovParams& th) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) total += scad_penalty(std::abs(b[j]), pen);
    return model.loglik({b, th}) - n * total;
  };

  Eigen::VectorXd beta = init.beta;
  CovParams theta = init.theta;
  std::vector<double> qs{penalized(beta, theta)};
  int total_sweeps = 0;
  int total_evals = 0;
  int iters = 0;
  bool converged = false;

  for (int t = 1; t <= cfg.lla_max_iters; ++t) {
    iters = t;
    LikelihoodModel::WhitenedDesign wd = model.whitened_design(theta);
    Eigen::VectorXd weights(data.p());
    for (Eigen::Index j = 0; j < data.p(); ++j)
      weights[j] = scad_deriv(std::abs(beta[j]), pen);
    int sweeps = 0;
    Eigen::VectorXd beta_new = weighted_lasso(wd.X, wd.y, weights, n, cfg, &sweeps);
    total_sweeps += sweeps;
    ThetaStep step = theta_refit(model, beta_new, theta, cfg);
    total_evals += step.evals;

    const double q_prev = qs.back();
    const double q_new = penalized(beta_new, step.theta);
    if (q_new < q_prev - 1e-6 * (1.0 + std::abs(q_prev)))
      throw Error("penalized objective decreased during LLA iteration");
    qs.push_back(q_new);
    beta = beta_new;
    theta = step.theta;
    if (std::abs(q_new - q_prev) <= cfg.lla_tol * (1.0 + std::abs(q_prev))) {
      converged = true;
      break;
    }
  }
  // a one-iteration cap is the one-step estimator by construction
  if (cfg.lla_max_iters == 1) converged = true;
  if (!converged) throw NonConvergence("LLA iterations did not converge", qs);

  ProfiledFit pf = model.profiled_fit_given_beta(beta, theta.range, theta.nugget);

  FitResult fit;
  fit.beta = beta;
  fit.theta = theta;
  fit.loglik = pf.loglik;
  count_selected(beta, &fit.selected);
  fit.bic = bic_of(n, theta.sigma2, static_cast<int>(fit.selected.size()));
  fit.se_beta = Eigen::VectorXd::Constant(data.p(), kNaN);
  fit.diagnostics.method = "pmle";
  fit.diagnostics.lambda = pen.lambda;
  fit.diagnostics.cd_sweeps = total_sweeps;
  fit.diagnostics.outer_evaluations = total_evals;
  fit.diagnostics.lla_iterations = iters;
  fit.diagnostics.rewhitened_each_iteration = true;
  fit.diagnostics.objective_trace = qs;
  if (cfg.compute_se) attach_standard_errors(model, fit);
  return fit;
}

FitResult fit_pmle(const SpatialDataset& data, LikelihoodVariant variant, const TaperSpec& taper,
                   const PenaltySpec& pen, const OptimizerConfig& cfg) {
  LikelihoodModel model(data, variant, taper);
  OptimizerConfig init_cfg = cfg;
  init_cfg.compute_se = false;
  FitResult init = fit_mle(model, init_cfg);
  return fit_pmle_from(model, pen, cfg, init);
}

FitResult fit_baseline_iid(const SpatialDataset& data, const PenaltySpec& pen,
                           const OptimizerConfig& cfg) {
  validate_penalty(pen);
  const Eigen::Index p = data.p();
  const double n = static_cast<double>(data.n());
  if (data.n() <= p) throw InvalidParameter("need more observations than covariates");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.X);
  if (qr.rank() != p) throw RankDeficientDesign("design matrix is rank deficient");

  Eigen::VectorXd beta_ols = qr.solve(data.y);
  const double sigma2_ols =
      std::max((data.y - data.X * beta_ols).squaredNorm() / n, 1e-300);
  const double sigma_ols = std::sqrt(sigma2_ols);

  Eigen::VectorXd weights(p);
  for (Eigen::Index j = 0; j < p; ++j) weights[j] = scad_deriv(std::abs(beta_ols[j]), pen);

  int sweeps = 0;
  Eigen::VectorXd beta =
      weighted_lasso(data.X / sigma_ols, data.y / sigma_ols, weights, n, cfg, &sweeps);

  const double sigma2 = std::max((data.y - data.X * beta).squaredNorm() / n, 1e-300);

  FitResult fit;
  fit.beta = beta;
  fit.theta = {kNaN, kNaN, sigma2};
  count_selected(beta, &fit.selected);
  fit.loglik = -0.5 * n * (std::log(2.0 * M_PI) + std::log(sigma2) + 1.0);
  fit.bic = bic_of(n, sigma2, static_cast<int>(fit.selected.size()));
  fit.se_beta = Eigen::VectorXd::Constant(p, kNaN);
  fit.diagnostics.method = "ose_iid";
  fit.diagnostics.lambda = pen.lambda;
  fit.diagnostics.cd_sweeps = sweeps;
  fit.diagnostics.lla_iterations = 1;
  if (cfg.compute_se) attach_standard_errors_iid(data, fit);
  return fit;
}

}  // namespace spasel
