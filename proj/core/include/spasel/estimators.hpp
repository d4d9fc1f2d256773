#pragma once

#include <vector>

#include "spasel/likelihood.hpp"
#include "spasel/types.hpp"

namespace spasel {

// Smoothly clipped absolute deviation penalty and its derivative, as
// functions of |beta|. Continuous and C^1 at both knots.
double scad_penalty(double beta_abs, const PenaltySpec& pen);
double scad_deriv(double beta_abs, const PenaltySpec& pen);

// Minimizes 0.5 * ||y - X b||^2 + n_scale * sum_j weights_j * |b_j| by cyclic
// coordinate descent from b = 0. Soft-thresholding writes exact zeros, and a
// tie |z| == threshold resolves to zero.
Eigen::VectorXd weighted_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights, double n_scale,
                               const OptimizerConfig& cfg = {}, int* sweeps_out = nullptr);

// Maximum likelihood over (range, nugget, sigma2) with sigma2 and beta
// profiled out; the remaining 2-d search runs Nelder-Mead over
// (log range, logit nugget) with restarts.
FitResult fit_mle(const SpatialDataset& data, LikelihoodVariant variant, const TaperSpec& taper,
                  const OptimizerConfig& cfg = {});

// MLE with beta restricted to the given covariate subset; estimates are
// embedded back into length-p vectors with exact zeros elsewhere.
FitResult fit_mle_on_support(const SpatialDataset& data, const std::vector<int>& support,
                             LikelihoodVariant variant, const TaperSpec& taper,
                             const OptimizerConfig& cfg = {});

// One-step sparse estimator: whiten at the initializer's theta, solve one
// SCAD-weighted lasso, then refit theta with beta held fixed.
FitResult fit_ose(const SpatialDataset& data, LikelihoodVariant variant, const TaperSpec& taper,
                  const PenaltySpec& pen, const OptimizerConfig& cfg = {});

// Fully iterated local linear approximation. Each iteration re-whitens at
// the current theta; the penalized objective is nondecreasing across
// iterations, and a one-iteration cap reproduces fit_ose.
FitResult fit_pmle(const SpatialDataset& data, LikelihoodVariant variant, const TaperSpec& taper,
                   const PenaltySpec& pen, const OptimizerConfig& cfg = {});

// SCAD-weighted lasso on the raw (independence-working-model) scale,
// initialized at ordinary least squares.
FitResult fit_baseline_iid(const SpatialDataset& data, const PenaltySpec& pen,
                           const OptimizerConfig& cfg = {});

// Model-reusing entry points for pipelines that fit many penalty levels on
// one dataset. `init` supplies beta and theta; it is never recomputed here.
FitResult fit_mle(LikelihoodModel& model, const OptimizerConfig& cfg = {});
FitResult fit_ose_from(LikelihoodModel& model, const PenaltySpec& pen, const OptimizerConfig& cfg,
                       const FitResult& init);
FitResult fit_pmle_from(LikelihoodModel& model, const PenaltySpec& pen, const OptimizerConfig& cfg,
                        const FitResult& init);

// Observed-information standard errors at the stored state, restricted to the
// selected support; dropped coefficients keep NaN.
void attach_standard_errors(LikelihoodModel& model, FitResult& fit);
void attach_standard_errors_iid(const SpatialDataset& data, FitResult& fit);

}  // namespace spasel
