#pragma once

#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "spasel/rng.hpp"
#include "spasel/tuning.hpp"

namespace spasel {

// A repeated-sampling study on the unit-density random design: sites uniform
// on [0, side]^2, equicorrelated standardized covariates, response from a
// Gaussian process with exponential-plus-nugget covariance, centered.
struct ScenarioSpec {
  double side = 10.0;    // square edge length l; N = round(density * l^2)
  double density = 4.0;
  int p = 7;
  Eigen::VectorXd beta_true;  // empty means the default (4,3,2,1,0,...,0)
  double rho = 0.5;
  CovParams theta_true{1.0, 0.2, 9.0};
  std::optional<double> omega;  // taper radius; defaults to side / 4
  int replicates = 100;
  std::uint64_t seed = 0;
  int workers = 1;
  int grid_size = 30;
  double scad_a = 3.7;
};

// Columns of the comparison, in output order:
//   ose               BIC-tuned one-step fit under the exact likelihood
//   ose_tapered       same with the tapered likelihood (radius omega)
//   ose_iid           SCAD selection ignoring the error correlation
//   ose_oracle_start  one-step fit initialized at the true-support MLE
//   mle_oracle        unpenalized MLE on the true support
enum class ScenarioMethod { ose, ose_tapered, ose_iid, ose_oracle_start, mle_oracle };
inline constexpr std::array<const char*, 5> kScenarioMethodNames = {
    "ose", "ose_tapered", "ose_iid", "ose_oracle_start", "mle_oracle"};

struct MethodOutcome {
  bool ok = false;
  std::string error;
  double lambda = kNaN;
  Eigen::VectorXd beta;
  Eigen::VectorXd se_beta;
  CovParams theta{kNaN, kNaN, kNaN};
  Eigen::Vector3d se_theta{kNaN, kNaN, kNaN};
  double loglik = kNaN;
  double bic = kNaN;
  int c0 = 0;  // correctly zeroed among the truly null coefficients
  int i0 = 0;  // incorrectly zeroed among the truly active ones
};

struct ReplicateResult {
  int index = 0;
  std::array<MethodOutcome, 5> methods;
};

// Estimation statistics for a coefficient are conditional on selection:
// mean/sd over replicates where the estimate is nonzero, and sdm is the
// median of the reported standard errors over those replicates.
struct CoefSummary {
  int index = 0;  // covariate index
  double mean = kNaN;
  double sd = kNaN;
  double sdm = kNaN;
};

struct MethodSummary {
  std::string name;
  int used = 0;
  int dropped = 0;
  double c0_mean = kNaN;
  double i0_mean = kNaN;
  std::vector<CoefSummary> coefs;  // one per truly active coefficient
  CoefSummary range, nugget, sigma2;  // index unused; NaN for ose_iid range/nugget
};

struct ScenarioResult {
  ScenarioSpec spec;
  Eigen::Index n = 0;
  double omega = 0.0;
  std::vector<int> active_truth;  // indices with beta_true != 0
  std::vector<ReplicateResult> replicates;
  std::array<MethodSummary, 5> summary;
  double elapsed_seconds = 0.0;  // wall clock; never serialized
};

SiteSet sample_sites(double side, double density, ReplicateRng& rng);
Eigen::MatrixXd sample_covariates(Eigen::Index n, int p, double rho, ReplicateRng& rng);
Eigen::VectorXd sample_gp_response(const SiteSet& sites, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& beta, const CovParams& theta,
                                   ReplicateRng& rng);
// Same map with the noise vector supplied instead of drawn.
Eigen::VectorXd gp_response_from_noise(const SiteSet& sites, const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& beta, const CovParams& theta,
                                       const Eigen::VectorXd& z);

Eigen::VectorXd scenario_beta_true(const ScenarioSpec& spec);

// Data for one replicate; depends only on (spec, replicate index).
SpatialDataset simulate_dataset(const ScenarioSpec& spec, int replicate);

using ScenarioProgress = std::function<void(int done, int total)>;
ScenarioResult run_scenario(const ScenarioSpec& spec, const ScenarioProgress& progress = {});

// Summary statistics in table order; truth is NaN where no target exists.
struct SummaryRow {
  std::string statistic;
  double truth = kNaN;
  std::array<double, 5> values;
};
std::vector<SummaryRow> scenario_summary_rows(const ScenarioResult& result);

// Wide summary table, one row per statistic, one column per method.
void write_scenario_csv(const ScenarioResult& result, std::ostream& os);

}  // namespace spasel
