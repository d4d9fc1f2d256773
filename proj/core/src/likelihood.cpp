#include "spasel/likelihood.hpp"

#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <vector>

namespace spasel {

namespace {

using SparseLLT =
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                         Eigen::AMDOrdering<int>>;

double dense_smallest_pivot(const Eigen::MatrixXd& a) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  return ldlt.vectorD().minCoeff();
}

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

}  // namespace

struct LikelihoodModel::Cache {
  bool valid = false;
  double range = 0.0;
  double nugget = 0.0;

  // dense path
  Eigen::MatrixXd corr;
  Eigen::LLT<Eigen::MatrixXd> llt;

  // sparse path; pattern (taper support) is theta-free, values are rewritten
  // in place and the symbolic factorization is reused across evaluations
  bool pattern_ready = false;
  Eigen::SparseMatrix<double> corr_sp;
  SparseLLT llt_sp;
  std::vector<double> nnz_dist;
  std::vector<double> nnz_weight;
  std::vector<char> nnz_diag;

  double log_det_corr = 0.0;
  Eigen::MatrixXd Xw;  // L^{-1} P X at unit sigma2
  Eigen::VectorXd yw;

  // tapered_alt: M = C_T^{-1} o Delta at unit sigma2, plus design products
  Eigen::SparseMatrix<double> m_sp;
  Eigen::MatrixXd XtMX;
  Eigen::VectorXd XtMy;
};

LikelihoodModel::LikelihoodModel(const SpatialDataset& data, LikelihoodVariant variant,
                                 const TaperSpec& taper)
    : data_(data), variant_(variant), taper_(taper) {
  if (data.n() < 1) throw InvalidParameter("empty dataset");
  if (data.X.rows() != data.n()) throw InvalidParameter("X rows must match response length");
  if (data.p() < 1) throw InvalidParameter("need at least one covariate");
  if (!data.X.allFinite() || !data.y.allFinite())
    throw InvalidParameter("data must be finite");
  validate_taper(taper);
  if (variant == LikelihoodVariant::full && taper.family != TaperFamily::none)
    throw ConfigError("the full likelihood takes no taper; use the tapered variants");
  use_taper_ = taper.family == TaperFamily::linear;

  dists_ = pairwise_distances(data.sites);
  max_dist_ = data.n() > 1 ? dists_.dense().maxCoeff() : 0.0;
  design_full_rank_ =
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(data.X).rank() == data.p();
  cache_ = std::make_unique<Cache>();
}

LikelihoodModel::~LikelihoodModel() = default;

void LikelihoodModel::ensure(double range, double nugget) {
  Cache& c = *cache_;
  if (c.valid && c.range == range && c.nugget == nugget) return;
  c.valid = false;
  validate_cov_params({range, nugget, 1.0});
  ++evaluations_;
  const Eigen::Index n = data_.n();

  if (!use_taper_) {
    c.corr = (1.0 - nugget) * (-dists_.dense() / range).array().exp().matrix();
    c.corr.diagonal().setOnes();
    c.llt.compute(c.corr);
    if (c.llt.info() != Eigen::Success)
      throw NotPositiveDefinite("correlation not positive definite",
                                dense_smallest_pivot(c.corr));
    c.log_det_corr = 2.0 * c.llt.matrixLLT().diagonal().array().log().sum();
    c.Xw = c.llt.matrixL().solve(data_.X);
    c.yw = c.llt.matrixL().solve(data_.y);
  } else {
    if (!c.pattern_ready) {
      const Eigen::MatrixXd& d = dists_.dense();
      std::vector<Eigen::Triplet<double>> trips;
      for (Eigen::Index j = 0; j < n; ++j) {
        trips.emplace_back(j, j, 1.0);
        for (Eigen::Index i = j + 1; i < n; ++i) {
          const double w = taper_weight(d(i, j), taper_);
          if (w > 0.0) trips.emplace_back(i, j, w);
        }
      }
      c.corr_sp.resize(n, n);
      c.corr_sp.setFromTriplets(trips.begin(), trips.end());
      c.corr_sp.makeCompressed();
      const Eigen::Index nnz = c.corr_sp.nonZeros();
      c.nnz_dist.resize(nnz);
      c.nnz_weight.resize(nnz);
      c.nnz_diag.resize(nnz);
      Eigen::Index k = 0;
      for (int j = 0; j < c.corr_sp.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(c.corr_sp, j); it; ++it, ++k) {
          c.nnz_dist[k] = d(it.row(), it.col());
          c.nnz_weight[k] = it.value();
          c.nnz_diag[k] = it.row() == it.col();
        }
      c.llt_sp.analyzePattern(c.corr_sp);
      c.pattern_ready = true;
    }
    double* vals = c.corr_sp.valuePtr();
    const double scale = 1.0 - nugget;
    const Eigen::Index nnz = c.corr_sp.nonZeros();
    for (Eigen::Index k = 0; k < nnz; ++k) {
      vals[k] = c.nnz_diag[k] ? 1.0
                              : scale * std::exp(-c.nnz_dist[k] / range) * c.nnz_weight[k];
    }
    c.llt_sp.factorize(c.corr_sp);
    if (c.llt_sp.info() != Eigen::Success) {
      Eigen::MatrixXd full = c.corr_sp.toDense();
      Eigen::MatrixXd up = full.transpose();
      up.diagonal().setZero();
      throw NotPositiveDefinite("tapered correlation not positive definite",
                                dense_smallest_pivot(full + up));
    }
    const Eigen::SparseMatrix<double>& l = c.llt_sp.matrixL().nestedExpression();
    double ld = 0.0;
    for (int j = 0; j < l.outerSize(); ++j) {
      Eigen::SparseMatrix<double>::InnerIterator it(l, j);
      ld += std::log(it.value());
    }
    c.log_det_corr = 2.0 * ld;

    Eigen::MatrixXd px = c.llt_sp.permutationP() * data_.X;
    c.llt_sp.matrixL().solveInPlace(px);
    c.Xw = std::move(px);
    Eigen::VectorXd py = c.llt_sp.permutationP() * data_.y;
    Eigen::MatrixXd pym = py;
    c.llt_sp.matrixL().solveInPlace(pym);
    c.yw = pym.col(0);

    if (variant_ == LikelihoodVariant::tapered_alt) {
      if (c.m_sp.nonZeros() == 0) c.m_sp = c.corr_sp;  // clone the pattern once
      double* mvals = c.m_sp.valuePtr();
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < c.corr_sp.outerSize(); ++j) {
        ej[j] = 1.0;
        Eigen::VectorXd col = c.llt_sp.solve(ej);
        ej[j] = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(c.m_sp, j); it; ++it) {
          const Eigen::Index k = &it.value() - mvals;
          mvals[k] = col[it.row()] * c.nnz_weight[k];
        }
      }
      Eigen::MatrixXd mx = c.m_sp.selfadjointView<Eigen::Lower>() * data_.X;
      c.XtMX = data_.X.transpose() * mx;
      c.XtMy = mx.transpose() * data_.y;
    }
  }

  c.range = range;
  c.nugget = nugget;
  c.valid = true;
}

namespace {

bool is_alt(LikelihoodVariant v, bool use_taper) {
  return use_taper && v == LikelihoodVariant::tapered_alt;
}

}  // namespace

double LikelihoodModel::loglik(const ModelState& state) {
  const CovParams& th = state.theta;
  validate_cov_params(th);
  if (state.beta.size() != data_.p()) throw InvalidParameter("beta length mismatch");
  ensure(th.range, th.nugget);
  const Cache& c = *cache_;
  const double n = static_cast<double>(data_.n());
  double qc;  // r^T Q_c r at unit sigma2
  if (is_alt(variant_, use_taper_)) {
    Eigen::VectorXd resid = data_.y - data_.X * state.beta;
    qc = resid.dot(c.m_sp.selfadjointView<Eigen::Lower>() * resid);
  } else {
    qc = (c.yw - c.Xw * state.beta).squaredNorm();
  }
  return -0.5 * n * kLogTwoPi - 0.5 * (n * std::log(th.sigma2) + c.log_det_corr) -
         0.5 * qc / th.sigma2;
}

Eigen::VectorXd LikelihoodModel::gls_beta(const CovParams& theta) {
  validate_cov_params(theta);
  if (!design_full_rank_) throw RankDeficientDesign("design matrix is rank deficient");
  ensure(theta.range, theta.nugget);
  const Cache& c = *cache_;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  if (is_alt(variant_, use_taper_)) {
    a = c.XtMX;
    b = c.XtMy;
  } else {
    a = c.Xw.transpose() * c.Xw;
    b = c.Xw.transpose() * c.yw;
  }
  return a.ldlt().solve(b);
}

double LikelihoodModel::profile_sigma2(const Eigen::VectorXd& beta, double range, double nugget) {
  if (beta.size() != data_.p()) throw InvalidParameter("beta length mismatch");
  ensure(range, nugget);
  const Cache& c = *cache_;
  double qc;
  if (is_alt(variant_, use_taper_)) {
    Eigen::VectorXd resid = data_.y - data_.X * beta;
    qc = resid.dot(c.m_sp.selfadjointView<Eigen::Lower>() * resid);
  } else {
    qc = (c.yw - c.Xw * beta).squaredNorm();
  }
  return qc / static_cast<double>(data_.n());
}

ProfiledFit LikelihoodModel::profiled_fit(double range, double nugget) {
  ProfiledFit out;
  out.beta = gls_beta({range, nugget, 1.0});
  return profiled_fit_given_beta(out.beta, range, nugget);
}

ProfiledFit LikelihoodModel::profiled_fit_given_beta(const Eigen::VectorXd& beta, double range,
                                                     double nugget) {
  ProfiledFit out;
  out.beta = beta;
  out.sigma2 = std::max(profile_sigma2(beta, range, nugget), 1e-300);
  const double n = static_cast<double>(data_.n());
  out.loglik = -0.5 * n * kLogTwoPi -
               0.5 * (n * std::log(out.sigma2) + cache_->log_det_corr) - 0.5 * n;
  return out;
}

namespace {

// Gamma-scale derivative, tapered when a weight matrix is present.
Eigen::MatrixXd tapered_derivative(const SymmetricMatrix& dists, const CovParams& th,
                                   CovDerivative which, const Eigen::MatrixXd* weights) {
  Eigen::MatrixXd dg = covariance_derivative(dists, th, which);
  if (weights) dg = dg.cwiseProduct(*weights);
  return dg;
}

}  // namespace

Eigen::Vector3d LikelihoodModel::score_theta(const ModelState& state) {
  const CovParams& th = state.theta;
  validate_cov_params(th);
  if (state.beta.size() != data_.p()) throw InvalidParameter("beta length mismatch");
  ensure(th.range, th.nugget);
  const Cache& c = *cache_;
  const Eigen::Index n = data_.n();

  Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd w;  // Gamma_T^{-1}
  if (!use_taper_) {
    w = c.llt.solve(identity) / th.sigma2;
  } else {
    w = c.llt_sp.solve(identity) / th.sigma2;
  }
  Eigen::VectorXd resid = data_.y - data_.X * state.beta;
  Eigen::VectorXd u = w * resid;

  Eigen::MatrixXd tw;  // taper weights, only needed under a taper
  if (use_taper_) {
    tw.resize(n, n);
    const Eigen::MatrixXd& d = dists_.dense();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) tw(i, j) = taper_weight(d(i, j), taper_);
  }

  const bool alt = is_alt(variant_, use_taper_);
  Eigen::Vector3d s;
  const CovDerivative which[3] = {CovDerivative::range, CovDerivative::nugget,
                                  CovDerivative::sigma2};
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd dg = tapered_derivative(dists_, th, which[k], use_taper_ ? &tw : nullptr);
    // both factors symmetric, so tr(W dG) is an entrywise sum
    const double t1 = (w.array() * dg.array()).sum();
    double quad;
    if (!alt) {
      quad = u.dot(dg * u);
    } else {
      Eigen::MatrixXd b = w * dg * w;
      quad = resid.dot(b.cwiseProduct(tw) * resid);
    }
    s[k] = -0.5 * t1 + 0.5 * quad;
  }
  return s;
}

InformationMatrices LikelihoodModel::information(const ModelState& state) {
  const CovParams& th = state.theta;
  validate_cov_params(th);
  ensure(th.range, th.nugget);
  const Cache& c = *cache_;
  const Eigen::Index n = data_.n();

  Eigen::MatrixXd tw;
  if (use_taper_) {
    tw.resize(n, n);
    const Eigen::MatrixXd& d = dists_.dense();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) tw(i, j) = taper_weight(d(i, j), taper_);
  }

  std::array<Eigen::MatrixXd, 3> s_k;
  const CovDerivative which[3] = {CovDerivative::range, CovDerivative::nugget,
                                  CovDerivative::sigma2};
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd dg = tapered_derivative(dists_, th, which[k], use_taper_ ? &tw : nullptr);
    if (!use_taper_) {
      s_k[k] = c.llt.solve(dg) / th.sigma2;
    } else {
      s_k[k] = c.llt_sp.solve(dg) / th.sigma2;
    }
  }

  InformationMatrices out;
  for (int k = 0; k < 3; ++k)
    for (int l = k; l < 3; ++l) {
      const double t = (s_k[k].array() * s_k[l].transpose().array()).sum();
      out.theta_info(k, l) = 0.5 * t;
      out.theta_info(l, k) = 0.5 * t;
    }
  out.beta_info = (c.Xw.transpose() * c.Xw) / th.sigma2;
  return out;
}

LikelihoodModel::WhitenedDesign LikelihoodModel::whitened_design(const CovParams& theta) {
  validate_cov_params(theta);
  ensure(theta.range, theta.nugget);
  const Cache& c = *cache_;
  const double sigma = std::sqrt(theta.sigma2);
  WhitenedDesign out;
  if (!is_alt(variant_, use_taper_)) {
    out.X = c.Xw / sigma;
    out.y = c.yw / sigma;
  } else {
    // W^T W = M/sigma2 requires a factor of M itself
    CholeskyFactor fm = factorize(SymmetricMatrix::from_sparse_lower(c.m_sp));
    out.X = fm.lower_t(data_.X) / sigma;
    out.y = fm.lower_t(data_.y).col(0) / sigma;
  }
  return out;
}

double loglik(const SpatialDataset& data, const ModelState& state, LikelihoodVariant variant,
              const TaperSpec& taper) {
  LikelihoodModel m(data, variant, taper);
  return m.loglik(state);
}

Eigen::Vector3d score_theta(const SpatialDataset& data, const ModelState& state,
                            LikelihoodVariant variant, const TaperSpec& taper) {
  LikelihoodModel m(data, variant, taper);
  return m.score_theta(state);
}

InformationMatrices information(const SpatialDataset& data, const ModelState& state,
                                LikelihoodVariant variant, const TaperSpec& taper) {
  LikelihoodModel m(data, variant, taper);
  return m.information(state);
}

Eigen::VectorXd gls_beta(const SpatialDataset& data, const CovParams& theta,
                         LikelihoodVariant variant, const TaperSpec& taper) {
  LikelihoodModel m(data, variant, taper);
  return m.gls_beta(theta);
}

double profile_sigma2(const SpatialDataset& data, const Eigen::VectorXd& beta, double range,
                      double nugget, LikelihoodVariant variant, const TaperSpec& taper) {
  LikelihoodModel m(data, variant, taper);
  return m.profile_sigma2(beta, range, nugget);
}

}  // namespace spasel
