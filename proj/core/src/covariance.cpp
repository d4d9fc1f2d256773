#include "spasel/covariance.hpp"

#include <cmath>
#include <vector>

namespace spasel {

void validate_cov_params(const CovParams& p) {
  if (!(p.range > 0.0) || !std::isfinite(p.range))
    throw InvalidParameter("range must be finite and > 0");
  if (!(p.nugget >= 0.0 && p.nugget < 1.0))
    throw InvalidParameter("nugget must lie in [0, 1)");
  if (!(p.sigma2 > 0.0) || !std::isfinite(p.sigma2))
    throw InvalidParameter("sigma2 must be finite and > 0");
}

void validate_taper(const TaperSpec& t) {
  if (t.family == TaperFamily::linear && !(t.omega > 0.0 && std::isfinite(t.omega)))
    throw InvalidParameter("linear taper needs omega > 0");
}

double taper_weight(double distance, const TaperSpec& taper) {
  if (taper.family == TaperFamily::none) return 1.0;
  const double w = 1.0 - distance / taper.omega;
  return w > 0.0 ? w : 0.0;
}

SymmetricMatrix pairwise_distances(const SiteSet& sites) {
  const Eigen::Index n = sites.size();
  if (n < 1) throw InvalidParameter("need at least one site");
  if (sites.coords.cols() != 2) throw InvalidParameter("sites must have two coordinates");
  if (!sites.coords.allFinite()) throw InvalidParameter("site coordinates must be finite");

  Eigen::MatrixXd d(n, n);
  d.diagonal().setZero();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double dij = (sites.coords.row(i) - sites.coords.row(j)).norm();
      if (dij < 1e-12) throw DegenerateSites("duplicate sites (distance below 1e-12)");
      d(i, j) = dij;
      d(j, i) = dij;
    }
  }
  return SymmetricMatrix::from_dense(std::move(d));
}

SymmetricMatrix build_covariance(const SymmetricMatrix& dists, const CovParams& p) {
  validate_cov_params(p);
  if (dists.is_sparse()) throw InvalidParameter("distances must be dense");
  const double scale = p.sigma2 * (1.0 - p.nugget);
  Eigen::MatrixXd g = scale * (-dists.dense() / p.range).array().exp().matrix();
  g.diagonal().setConstant(p.sigma2);
  return SymmetricMatrix::from_dense(std::move(g));
}

SymmetricMatrix apply_taper(const SymmetricMatrix& gamma, const SymmetricMatrix& dists,
                            const TaperSpec& taper) {
  validate_taper(taper);
  if (taper.family == TaperFamily::none) return gamma;

  const Eigen::Index n = gamma.order();
  const Eigen::MatrixXd& d = dists.dense();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 8);
  for (Eigen::Index j = 0; j < n; ++j) {
    trips.emplace_back(j, j, gamma.coeff(j, j));
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double w = taper_weight(d(i, j), taper);
      if (w > 0.0) trips.emplace_back(i, j, gamma.coeff(i, j) * w);
    }
  }
  Eigen::SparseMatrix<double> lower(n, n);
  lower.setFromTriplets(trips.begin(), trips.end());
  return SymmetricMatrix::from_sparse_lower(std::move(lower));
}

SymmetricMatrix build_tapered_covariance(const SymmetricMatrix& dists, const CovParams& p,
                                         const TaperSpec& taper) {
  validate_taper(taper);
  if (taper.family == TaperFamily::none) return build_covariance(dists, p);
  validate_cov_params(p);

  const Eigen::Index n = dists.order();
  const Eigen::MatrixXd& d = dists.dense();
  const double scale = p.sigma2 * (1.0 - p.nugget);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * 8);
  for (Eigen::Index j = 0; j < n; ++j) {
    trips.emplace_back(j, j, p.sigma2);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double w = taper_weight(d(i, j), taper);
      if (w > 0.0) trips.emplace_back(i, j, scale * std::exp(-d(i, j) / p.range) * w);
    }
  }
  Eigen::SparseMatrix<double> lower(n, n);
  lower.setFromTriplets(trips.begin(), trips.end());
  return SymmetricMatrix::from_sparse_lower(std::move(lower));
}

Eigen::MatrixXd covariance_derivative(const SymmetricMatrix& dists, const CovParams& p,
                                      CovDerivative which) {
  validate_cov_params(p);
  const Eigen::MatrixXd& d = dists.dense();
  const double scale = p.sigma2 * (1.0 - p.nugget);
  Eigen::MatrixXd out;
  switch (which) {
    case CovDerivative::range:
      // d/dr of scale*exp(-d/r): scale * (d/r^2) * exp(-d/r), zero on the diagonal
      out = scale * (d / (p.range * p.range)).cwiseProduct((-d / p.range).array().exp().matrix());
      out.diagonal().setZero();
      break;
    case CovDerivative::nugget:
      out = -p.sigma2 * (-d / p.range).array().exp().matrix();
      out.diagonal().setZero();
      break;
    case CovDerivative::sigma2:
      out = (1.0 - p.nugget) * (-d / p.range).array().exp().matrix();
      out.diagonal().setOnes();
      break;
  }
  return out;
}

}  // namespace spasel
