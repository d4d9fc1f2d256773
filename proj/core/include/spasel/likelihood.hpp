#pragma once

#include <memory>

#include "spasel/covariance.hpp"
#include "spasel/symmetric_matrix.hpp"
#include "spasel/types.hpp"

namespace spasel {

// Which Gaussian objective to evaluate.  `full` is the exact likelihood.
// `tapered` replaces the covariance by its tapered version in both the
// determinant and the quadratic form.  `tapered_alt` keeps the tapered
// determinant but uses (Gamma_T^{-1} o Delta) as the quadratic-form matrix,
// which restores an unbiased estimating equation at the price of extra
// linear solves.  With taper `none` all three coincide and share one code
// path, so they agree bitwise.
enum class LikelihoodVariant { full, tapered, tapered_alt };

struct ModelState {
  Eigen::VectorXd beta;
  CovParams theta;
};

struct InformationMatrices {
  Eigen::MatrixXd beta_info;   // X^T Gamma_T^{-1} X
  Eigen::Matrix3d theta_info;  // (range, nugget, sigma2) ordering
};

struct ProfiledFit {
  Eigen::VectorXd beta;
  double sigma2 = 0.0;
  double loglik = 0.0;
};

// Bundles one dataset with a variant and taper, and caches the factorization
// of the unit-variance tapered correlation at the most recent (range, nugget).
// sigma2 enters through scale identities only, so the profile over sigma2 and
// repeated evaluations at a fixed (range, nugget) reuse one factorization.
//
// Instances hold mutable per-call scratch: share across threads only by
// giving each thread its own instance.
class LikelihoodModel {
 public:
  LikelihoodModel(const SpatialDataset& data, LikelihoodVariant variant, const TaperSpec& taper);
  ~LikelihoodModel();
  LikelihoodModel(const LikelihoodModel&) = delete;
  LikelihoodModel& operator=(const LikelihoodModel&) = delete;

  double loglik(const ModelState& state);
  Eigen::Vector3d score_theta(const ModelState& state);
  InformationMatrices information(const ModelState& state);

  // Generalized least squares under the variant's quadratic-form matrix.
  Eigen::VectorXd gls_beta(const CovParams& theta);

  // r^T Q r / N at unit sigma2; the stationary point of sigma2 given beta.
  double profile_sigma2(const Eigen::VectorXd& beta, double range, double nugget);

  ProfiledFit profiled_fit(double range, double nugget);
  ProfiledFit profiled_fit_given_beta(const Eigen::VectorXd& beta, double range, double nugget);

  // Whitened design at theta: W X and W y where W^T W equals the variant's
  // quadratic-form matrix Q. Full/tapered: W = sigma^{-1} L^{-1} P from the
  // tapered covariance factor. tapered_alt: W from a factor of M itself.
  struct WhitenedDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
  };
  WhitenedDesign whitened_design(const CovParams& theta);

  const SpatialDataset& data() const { return data_; }
  LikelihoodVariant variant() const { return variant_; }
  const TaperSpec& taper() const { return taper_; }
  double max_pairwise_distance() const { return max_dist_; }
  bool design_full_rank() const { return design_full_rank_; }
  int evaluations() const { return evaluations_; }

 private:
  struct Cache;
  void ensure(double range, double nugget);

  const SpatialDataset& data_;
  LikelihoodVariant variant_;
  TaperSpec taper_;
  SymmetricMatrix dists_;
  double max_dist_ = 0.0;
  bool design_full_rank_ = true;
  bool use_taper_ = false;  // false when taper none: all variants share the dense path
  int evaluations_ = 0;     // correlation factorizations performed
  std::unique_ptr<Cache> cache_;
};

// Stateless wrappers matching the model methods, for one-off evaluations.
double loglik(const SpatialDataset& data, const ModelState& state, LikelihoodVariant variant,
              const TaperSpec& taper);
Eigen::Vector3d score_theta(const SpatialDataset& data, const ModelState& state,
                            LikelihoodVariant variant, const TaperSpec& taper);
InformationMatrices information(const SpatialDataset& data, const ModelState& state,
                                LikelihoodVariant variant, const TaperSpec& taper);
Eigen::VectorXd gls_beta(const SpatialDataset& data, const CovParams& theta,
                         LikelihoodVariant variant, const TaperSpec& taper);
double profile_sigma2(const SpatialDataset& data, const Eigen::VectorXd& beta, double range,
                      double nugget, LikelihoodVariant variant, const TaperSpec& taper);

}  // namespace spasel
