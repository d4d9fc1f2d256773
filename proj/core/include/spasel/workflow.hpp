#pragma once

#include <cstdint>
#include <optional>

#include "spasel/dataset_io.hpp"
#include "spasel/tuning.hpp"

namespace spasel {

// Internal scale used by every fit: covariate columns to mean 0 and sample
// standard deviation 1, response centered (not rescaled). Estimates are
// reported on this scale; the transform is recorded for back-mapping.
struct Standardization {
  double y_mean = 0.0;
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_sd;
};

// Throws RankDeficientDesign for a constant covariate column.
Standardization standardize_in_place(SpatialDataset& data);

enum class LambdaMode { tune, fixed };

struct RunConfig {
  LikelihoodVariant variant = LikelihoodVariant::full;
  TaperSpec taper = TaperSpec::none();
  LambdaMode lambda_mode = LambdaMode::tune;
  double lambda = kNaN;  // fixed mode only
  double scad_a = 3.7;
  int grid_size = 30;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  bool bic_full_covariance = false;  // score BIC under the untapered covariance
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;  // echoed into outputs

  void validate() const;  // ConfigError on inconsistent combinations
};

struct FitOutput {
  RunConfig config;
  LoadedDataset input;  // standardized in place
  Standardization standardization;
  FitResult fit;
  std::optional<TuningResult> tuning;
};

FitOutput run_fit(LoadedDataset input, const RunConfig& cfg);

// Aligned human-readable table: one row per coefficient ("--" when dropped),
// covariance parameters, loglik, BIC, and the penalty level when applicable.
std::string render_fit_table(const FitOutput& out);

const char* variant_name(LikelihoodVariant v);
const char* taper_name(TaperFamily f);

}  // namespace spasel
