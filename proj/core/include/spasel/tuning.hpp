#pragma once

#include <optional>
#include <string>

#include "spasel/estimators.hpp"

namespace spasel {

// Candidate penalty levels, strictly increasing and nonnegative. The default
// grid is data-driven: log-spaced on [1e-3 * lambda_max, lambda_max], where
// lambda_max = max_j |x_j^T y| / N on the whitened design (the smallest level
// that zeroes every coefficient on the first lasso pass).
struct LambdaGrid {
  std::vector<double> values;

  static LambdaGrid log_spaced(double lo, double hi, int count);
  static LambdaGrid default_for(const Eigen::MatrixXd& xw, const Eigen::VectorXd& yw, int count);
  void validate() const;
};

// N * log(sigma2_hat) + k * log(N) with sigma2_hat re-profiled at the fit's
// (range, nugget) under the given variant and taper. Fits without covariance
// parameters (the iid baseline) profile sigma2 as RSS / N.
double bic_score(const SpatialDataset& data, const FitResult& fit, LikelihoodVariant variant,
                 const TaperSpec& taper);

struct LambdaRecord {
  double lambda = 0.0;
  int selected_count = 0;
  double sigma2 = kNaN;
  double bic = kNaN;
  std::optional<FitResult> fit;
  std::string error;  // nonempty when this level failed
};

struct TuningResult {
  LambdaGrid grid;
  std::vector<LambdaRecord> records;
  int chosen_index = -1;
  FitResult chosen;       // refreshed with standard errors when requested
  FitResult initializer;  // shared across every lambda
  int initializer_fits = 0;  // MLE fits performed inside this tuning run
};

// BIC selection over the grid. The initializer MLE is computed exactly once
// and shared by every candidate level; ties in BIC resolve to the larger
// lambda. When scoring_variant/scoring_taper are set, BIC is evaluated under
// that covariance instead of the one used for fitting.
TuningResult tune_lambda(const SpatialDataset& data, LikelihoodVariant variant,
                         const TaperSpec& taper, std::optional<LambdaGrid> grid,
                         const OptimizerConfig& cfg, double scad_a = 3.7, int grid_size = 30,
                         std::optional<LikelihoodVariant> scoring_variant = {},
                         std::optional<TaperSpec> scoring_taper = {});

// Same search with a caller-supplied initializer (never refit here).
TuningResult tune_lambda_from(const SpatialDataset& data, LikelihoodVariant variant,
                              const TaperSpec& taper, std::optional<LambdaGrid> grid,
                              const OptimizerConfig& cfg, const FitResult& init,
                              double scad_a = 3.7, int grid_size = 30,
                              std::optional<LikelihoodVariant> scoring_variant = {},
                              std::optional<TaperSpec> scoring_taper = {});

// BIC selection for the independence-working-model fit.
TuningResult tune_lambda_baseline(const SpatialDataset& data, std::optional<LambdaGrid> grid,
                                  const OptimizerConfig& cfg, double scad_a = 3.7,
                                  int grid_size = 30);

}  // namespace spasel
