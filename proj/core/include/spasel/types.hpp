#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spasel {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Planar site coordinates, one row per site.
struct SiteSet {
  Eigen::MatrixXd coords;  // N x 2

  Eigen::Index size() const { return coords.rows(); }
};

// Exponential covariance with a nugget. Diagonal is sigma2; off-diagonal
// entries are sigma2 * (1 - nugget) * exp(-d / range).
struct CovParams {
  double range = 1.0;    // r > 0
  double nugget = 0.0;   // c in [0, 1)
  double sigma2 = 1.0;   // > 0
};

enum class TaperFamily { none, linear };

struct TaperSpec {
  TaperFamily family = TaperFamily::none;
  double omega = 0.0;  // support radius, required > 0 for linear

  static TaperSpec none() { return {TaperFamily::none, 0.0}; }
  static TaperSpec linear(double omega) { return {TaperFamily::linear, omega}; }
};

// Observed data: sites, design matrix (one column per covariate), response.
struct SpatialDataset {
  SiteSet sites;
  Eigen::MatrixXd X;  // N x p
  Eigen::VectorXd y;  // N

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }
};

struct PenaltySpec {
  double lambda = 0.0;  // >= 0
  double a = 3.7;       // > 2
};

// Shared knobs for the numeric routines. Tolerances are relative unless
// noted otherwise.
struct FitCounters {
  int mle_fits = 0;
  int ose_fits = 0;
};

struct OptimizerConfig {
  // Outer simplex search over (log range, logit nugget).
  int simplex_max_iters = 400;
  double objective_tol = 1e-9;
  int restarts = 2;             // extra simplex starts for the initial fit
  int theta_refit_restarts = 1; // extra starts for warm penalized refits
  double initial_step = 0.5;
  double nugget_floor = 1e-6;

  // Coordinate descent for the weighted lasso.
  int cd_max_sweeps = 10000;
  double cd_tol = 1e-8;

  // Iterated local linear approximation (penalized MLE).
  int lla_max_iters = 25;
  double lla_tol = 1e-8;

  bool compute_se = true;

  // Optional instrumentation; incremented by the fitters when set.
  std::shared_ptr<FitCounters> counters;
};

// One fitted model. Entries of beta reported as zero are exact zeros.
// Standard errors are NaN where not defined (dropped coefficients, or the
// covariance parameters of the iid baseline).
struct FitDiagnostics {
  std::string method;           // "mle", "ose", "pmle", "ose_iid"
  bool converged = true;
  int outer_evaluations = 0;    // likelihood evaluations in the theta search
  int cd_sweeps = 0;
  int lla_iterations = 0;
  bool rewhitened_each_iteration = false;
  double lambda = kNaN;         // penalty level used, NaN for plain MLE
  std::vector<double> objective_trace;  // per-LLA-iteration penalized objective
};

struct FitResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd se_beta;      // NaN where undefined
  CovParams theta;
  Eigen::Vector3d se_theta{kNaN, kNaN, kNaN};  // (range, nugget, sigma2)
  std::vector<int> selected;    // indices with beta != 0, ascending
  double loglik = kNaN;
  double bic = kNaN;
  FitDiagnostics diagnostics;
};

}  // namespace spasel
