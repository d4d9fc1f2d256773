#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "spasel/covariance.hpp"
#include "spasel/types.hpp"

namespace testutil {

inline spasel::SiteSet random_sites(std::mt19937& gen, int n, double side) {
  std::uniform_real_distribution<double> u(0.0, side);
  spasel::SiteSet sites;
  sites.coords.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    sites.coords(i, 0) = u(gen);
    sites.coords(i, 1) = u(gen);
  }
  return sites;
}

inline Eigen::MatrixXd random_matrix(std::mt19937& gen, int n, int p) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = z(gen);
  return x;
}

inline Eigen::VectorXd random_vector(std::mt19937& gen, int n) {
  std::normal_distribution<double> z;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = z(gen);
  return v;
}

// Random dataset whose response need not follow the model; sufficient for
// likelihood-arithmetic tests.
inline spasel::SpatialDataset random_dataset(std::mt19937& gen, int n, int p,
                                             double side = 10.0) {
  spasel::SpatialDataset data;
  data.sites = random_sites(gen, n, side);
  data.X = random_matrix(gen, n, p);
  data.y = random_vector(gen, n);
  return data;
}

// Dataset actually drawn from the model: y = X beta + correlated noise.
inline spasel::SpatialDataset model_dataset(std::mt19937& gen, int n, int p,
                                            const Eigen::VectorXd& beta,
                                            const spasel::CovParams& theta,
                                            double side = 10.0) {
  spasel::SpatialDataset data;
  data.sites = random_sites(gen, n, side);
  data.X = random_matrix(gen, n, p);
  Eigen::MatrixXd gamma =
      spasel::build_covariance(spasel::pairwise_distances(data.sites), theta).to_dense();
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  data.y = data.X * beta + llt.matrixL() * random_vector(gen, n);
  return data;
}

// Brute-force reference for the weighted-L1 problem
//   0.5 * ||y - X b||^2 + n_scale * sum_j w_j |b_j|.
// Pattern search over an axis-aligned grid: at each resolution, sweep a
// window around the incumbent repeatedly (so the window can walk along a
// tilted valley) before shrinking the step. Every axis includes exactly 0 so
// sparse optima are representable. Independent of the coordinate-descent
// implementation under test.
inline Eigen::VectorXd grid_lasso_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& w, double n_scale,
                                         double final_step = 1e-5) {
  const int p = static_cast<int>(x.cols());
  const auto objective = [&](const Eigen::VectorXd& b) {
    return 0.5 * (y - x * b).squaredNorm() + n_scale * w.cwiseProduct(b.cwiseAbs()).sum();
  };

  const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
  Eigen::VectorXd best = Eigen::VectorXd::Zero(p);
  double best_val = objective(best);

  // one window sweep; returns true when the incumbent improved
  const auto sweep = [&](double step) {
    const int reach = 6;  // window half-width in steps
    std::vector<double> axis;
    axis.reserve(2 * reach + 2);
    Eigen::VectorXd b(p);
    std::vector<int> idx(p, 0);
    std::vector<std::vector<double>> axes(p);
    for (int j = 0; j < p; ++j) {
      axes[j].clear();
      for (int g = -reach; g <= reach; ++g) axes[j].push_back(best[j] + g * step);
      axes[j].push_back(0.0);
    }
    bool improved = false;
    while (true) {
      for (int j = 0; j < p; ++j) b[j] = axes[j][idx[j]];
      const double v = objective(b);
      if (v < best_val) {
        best_val = v;
        best = b;
        improved = true;
      }
      int k = 0;
      while (k < p && ++idx[k] == static_cast<int>(axes[k].size())) idx[k++] = 0;
      if (k == p) break;
    }
    return improved;
  };

  double step = (ols.cwiseAbs().maxCoeff() + 1.0) / 4.0;
  while (true) {
    while (sweep(step)) {
    }
    if (step <= final_step) break;
    step = std::max(final_step, step / 8.0);
  }
  return best;
}

}  // namespace testutil
