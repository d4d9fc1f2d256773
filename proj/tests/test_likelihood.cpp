#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "spasel/covariance.hpp"
#include "spasel/errors.hpp"
#include "spasel/estimators.hpp"
#include "spasel/likelihood.hpp"

using namespace spasel;

namespace {

// Fixed 5-point instance with independently computed dense-arithmetic
// reference values (numpy, float64) for every variant.
struct OracleInstance {
  SpatialDataset data;
  Eigen::VectorXd beta{{0.5, -0.25}};
  CovParams theta{1.5, 0.25, 2.0};
  TaperSpec taper = TaperSpec::linear(2.0);

  OracleInstance() {
    data.sites.coords.resize(5, 2);
    data.sites.coords << 0.0, 0.0, 1.0, 0.0, 0.0, 1.5, 2.0, 1.0, 1.2, 0.3;
    data.X.resize(5, 2);
    data.X << 1.0, 0.5, -1.0, 0.2, 0.3, -0.7, 2.0, 1.0, -0.5, 0.4;
    data.y.resize(5);
    data.y << 0.7, -1.1, 0.4, 2.0, -0.3;
  }
};

LikelihoodModel make_model(const OracleInstance& inst, LikelihoodVariant v) {
  return LikelihoodModel(inst.data, v,
                         v == LikelihoodVariant::full ? TaperSpec::none() : inst.taper);
}

}  // namespace

TEST_CASE("log-likelihood reference values per variant") {
  OracleInstance inst;
  ModelState state{inst.beta, inst.theta};

  LikelihoodModel full = make_model(inst, LikelihoodVariant::full);
  LikelihoodModel tap = make_model(inst, LikelihoodVariant::tapered);
  LikelihoodModel alt = make_model(inst, LikelihoodVariant::tapered_alt);

  CHECK(full.loglik(state) == doctest::Approx(-6.567254577206245).epsilon(1e-12));
  CHECK(tap.loglik(state) == doctest::Approx(-6.715302097141467).epsilon(1e-12));
  CHECK(alt.loglik(state) == doctest::Approx(-6.703100942255801).epsilon(1e-12));
}

TEST_CASE("generalized least squares reference values per variant") {
  OracleInstance inst;
  LikelihoodModel full = make_model(inst, LikelihoodVariant::full);
  LikelihoodModel tap = make_model(inst, LikelihoodVariant::tapered);
  LikelihoodModel alt = make_model(inst, LikelihoodVariant::tapered_alt);

  Eigen::VectorXd b = full.gls_beta(inst.theta);
  CHECK(b[0] == doctest::Approx(0.9706672818771481).epsilon(1e-11));
  CHECK(b[1] == doctest::Approx(-0.0741343570017195).epsilon(1e-11));
  b = tap.gls_beta(inst.theta);
  CHECK(b[0] == doctest::Approx(0.9759325445868114).epsilon(1e-11));
  CHECK(b[1] == doctest::Approx(-0.06974374742238718).epsilon(1e-11));
  b = alt.gls_beta(inst.theta);
  CHECK(b[0] == doctest::Approx(0.9797082468131566).epsilon(1e-11));
  CHECK(b[1] == doctest::Approx(-0.06031353591855253).epsilon(1e-11));
}

TEST_CASE("profiled sigma2 reference values per variant") {
  OracleInstance inst;
  LikelihoodModel full = make_model(inst, LikelihoodVariant::full);
  LikelihoodModel tap = make_model(inst, LikelihoodVariant::tapered);
  LikelihoodModel alt = make_model(inst, LikelihoodVariant::tapered_alt);
  const double r = inst.theta.range, c = inst.theta.nugget;

  CHECK(full.profile_sigma2(inst.beta, r, c) ==
        doctest::Approx(0.5453761711469034).epsilon(1e-11));
  CHECK(tap.profile_sigma2(inst.beta, r, c) ==
        doctest::Approx(0.44695589745881587).epsilon(1e-11));
  CHECK(alt.profile_sigma2(inst.beta, r, c) ==
        doctest::Approx(0.4371949735502839).epsilon(1e-11));
}

TEST_CASE("score reference values per variant") {
  OracleInstance inst;
  ModelState state{inst.beta, inst.theta};

  Eigen::Vector3d s = make_model(inst, LikelihoodVariant::full).score_theta(state);
  CHECK(s[0] == doctest::Approx(0.18117384304764303).epsilon(1e-10));
  CHECK(s[1] == doctest::Approx(-0.8123074639153423).epsilon(1e-10));
  CHECK(s[2] == doctest::Approx(-0.9091398930331853).epsilon(1e-10));

  s = make_model(inst, LikelihoodVariant::tapered).score_theta(state);
  CHECK(s[0] == doctest::Approx(0.04667920478868729).epsilon(1e-10));
  CHECK(s[1] == doctest::Approx(-0.38089897446995).epsilon(1e-10));
  CHECK(s[2] == doctest::Approx(-0.9706525640882402).epsilon(1e-10));

  s = make_model(inst, LikelihoodVariant::tapered_alt).score_theta(state);
  CHECK(s[0] == doctest::Approx(0.05570059806248731).epsilon(1e-10));
  CHECK(s[1] == doctest::Approx(-0.3686278998868162).epsilon(1e-10));
  CHECK(s[2] == doctest::Approx(-0.9767531415310726).epsilon(1e-10));
}

TEST_CASE("information matrix reference values (tapered)") {
  OracleInstance inst;
  LikelihoodModel tap = make_model(inst, LikelihoodVariant::tapered);
  InformationMatrices info = tap.information({inst.beta, inst.theta});

  CHECK(info.theta_info(0, 0) == doctest::Approx(0.03118200041297148).epsilon(1e-10));
  CHECK(info.theta_info(0, 1) == doctest::Approx(-0.1517535107772252).epsilon(1e-10));
  CHECK(info.theta_info(0, 2) == doctest::Approx(-0.04275397815972368).epsilon(1e-10));
  CHECK(info.theta_info(1, 1) == doctest::Approx(1.021780351923569).epsilon(1e-10));
  CHECK(info.theta_info(1, 2) == doctest::Approx(0.25214603959509974).epsilon(1e-10));
  CHECK(info.theta_info(2, 2) == doctest::Approx(0.625).epsilon(1e-10));
  CHECK((info.theta_info - info.theta_info.transpose()).norm() <= 1e-12);

  CHECK(info.beta_info(0, 0) == doctest::Approx(3.5815786445976117).epsilon(1e-10));
  CHECK(info.beta_info(0, 1) == doctest::Approx(1.107234196375678).epsilon(1e-10));
  CHECK(info.beta_info(1, 1) == doctest::Approx(0.9164815453498849).epsilon(1e-10));
}

TEST_CASE("single observation log-likelihood") {
  SpatialDataset data;
  data.sites.coords.resize(1, 2);
  data.sites.coords << 0.0, 0.0;
  data.X.resize(1, 1);
  data.X << 1.0;
  data.y.resize(1);
  data.y << 2.5;
  LikelihoodModel m(data, LikelihoodVariant::full, TaperSpec::none());
  // Residual zero, sigma2 = 1: loglik is -log(2 pi)/2.
  Eigen::VectorXd beta(1);
  beta << 2.5;
  CHECK(m.loglik({beta, {1.0, 0.0, 1.0}}) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-14));
}

TEST_CASE("profiled sigma2 reduces to the mean square on identity correlation") {
  // Sites so far apart the correlation underflows to zero.
  SpatialDataset data;
  data.sites.coords.resize(4, 2);
  data.sites.coords << 0, 0, 1e6, 0, 0, 1e6, 1e6, 1e6;
  data.X = Eigen::MatrixXd::Ones(4, 1);
  data.y = Eigen::VectorXd::Ones(4);
  LikelihoodModel m(data, LikelihoodVariant::full, TaperSpec::none());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(1);
  CHECK(m.profile_sigma2(beta, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadratic-form identity against explicit inverses") {
  std::mt19937 gen(29);
  for (int rep = 0; rep < 10; ++rep) {
    std::uniform_int_distribution<int> nn(4, 20);
    int n = nn(gen);
    SpatialDataset data = testutil::random_dataset(gen, n, 2, 6.0);
    CovParams theta{1.1, 0.2, 1.7};
    Eigen::VectorXd beta = testutil::random_vector(gen, 2);
    Eigen::VectorXd resid = data.y - data.X * beta;
    const double omega = 2.5;

    SymmetricMatrix d = pairwise_distances(data.sites);
    Eigen::MatrixXd gamma = build_covariance(d, theta).to_dense();
    Eigen::MatrixXd gamma_t =
        build_tapered_covariance(d, theta, TaperSpec::linear(omega)).to_dense();
    Eigen::MatrixXd taper_w(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        taper_w(i, j) =
            i == j ? 1.0 : taper_weight(d.coeff(i, j), TaperSpec::linear(omega));

    auto ref_ll = [n](const Eigen::MatrixXd& g, double quad) {
      return -0.5 * (n * std::log(2.0 * std::acos(-1.0)) +
                     std::log(g.determinant()) + quad);
    };
    Eigen::MatrixXd gt_inv = gamma_t.inverse();

    LikelihoodModel full(data, LikelihoodVariant::full, TaperSpec::none());
    CHECK(full.loglik({beta, theta}) ==
          doctest::Approx(ref_ll(gamma, resid.dot(gamma.inverse() * resid))).epsilon(1e-9));

    LikelihoodModel tap(data, LikelihoodVariant::tapered, TaperSpec::linear(omega));
    CHECK(tap.loglik({beta, theta}) ==
          doctest::Approx(ref_ll(gamma_t, resid.dot(gt_inv * resid))).epsilon(1e-9));

    LikelihoodModel alt(data, LikelihoodVariant::tapered_alt, TaperSpec::linear(omega));
    Eigen::MatrixXd m_mat = gt_inv.cwiseProduct(taper_w);
    CHECK(alt.loglik({beta, theta}) ==
          doctest::Approx(ref_ll(gamma_t, resid.dot(m_mat * resid))).epsilon(1e-9));
  }
}

TEST_CASE("with no taper every variant equals the full likelihood") {
  std::mt19937 gen(31);
  for (int rep = 0; rep < 20; ++rep) {
    std::uniform_int_distribution<int> nn(3, 30);
    int n = nn(gen);
    SpatialDataset data = testutil::random_dataset(gen, n, 2, 8.0);
    CovParams theta{1.6, 0.15, 2.4};
    Eigen::VectorXd beta = testutil::random_vector(gen, 2);

    LikelihoodModel full(data, LikelihoodVariant::full, TaperSpec::none());
    LikelihoodModel tap(data, LikelihoodVariant::tapered, TaperSpec::none());
    LikelihoodModel alt(data, LikelihoodVariant::tapered_alt, TaperSpec::none());
    const double ll = full.loglik({beta, theta});
    CHECK(std::abs(tap.loglik({beta, theta}) - ll) <= 1e-12 * std::abs(ll));
    CHECK(std::abs(alt.loglik({beta, theta}) - ll) <= 1e-12 * std::abs(ll));
  }
}

TEST_CASE("score matches central finite differences on random instances") {
  std::mt19937 gen(37);
  auto fd_check = [&](LikelihoodVariant v, const TaperSpec& taper) {
    std::uniform_int_distribution<int> nn(5, 50);
    int n = nn(gen);
    SpatialDataset data = testutil::random_dataset(gen, n, 3, 7.0);
    std::uniform_real_distribution<double> ur(0.6, 2.5), uc(0.05, 0.6), us(0.5, 3.0);
    CovParams theta{ur(gen), uc(gen), us(gen)};
    Eigen::VectorXd beta = testutil::random_vector(gen, 3);

    LikelihoodModel m(data, v, taper);
    Eigen::Vector3d s = m.score_theta({beta, theta});

    auto ll_at = [&](double r, double c, double s2) {
      return m.loglik({beta, {r, c, s2}});
    };
    const double h = 1e-5;
    Eigen::Vector3d fd;
    fd[0] = (ll_at(theta.range + h, theta.nugget, theta.sigma2) -
             ll_at(theta.range - h, theta.nugget, theta.sigma2)) /
            (2 * h);
    fd[1] = (ll_at(theta.range, theta.nugget + h, theta.sigma2) -
             ll_at(theta.range, theta.nugget - h, theta.sigma2)) /
            (2 * h);
    fd[2] = (ll_at(theta.range, theta.nugget, theta.sigma2 + h) -
             ll_at(theta.range, theta.nugget, theta.sigma2 - h)) /
            (2 * h);
    for (int k = 0; k < 3; ++k)
      CHECK(std::abs(s[k] - fd[k]) <= 1e-5 * std::max(1.0, std::abs(fd[k])));
  };

  for (int rep = 0; rep < 6; ++rep) {
    fd_check(LikelihoodVariant::full, TaperSpec::none());
    fd_check(LikelihoodVariant::tapered, TaperSpec::linear(3.0));
    fd_check(LikelihoodVariant::tapered_alt, TaperSpec::linear(3.0));
  }
}

TEST_CASE("beta score vanishes at the GLS solution") {
  std::mt19937 gen(41);
  for (LikelihoodVariant v :
       {LikelihoodVariant::full, LikelihoodVariant::tapered, LikelihoodVariant::tapered_alt}) {
    SpatialDataset data = testutil::random_dataset(gen, 25, 3, 6.0);
    TaperSpec taper = v == LikelihoodVariant::full ? TaperSpec::none() : TaperSpec::linear(2.0);
    LikelihoodModel m(data, v, taper);
    CovParams theta{1.2, 0.1, 2.0};
    Eigen::VectorXd beta = m.gls_beta(theta);
    auto wd = m.whitened_design(theta);
    Eigen::VectorXd grad = wd.X.transpose() * (wd.y - wd.X * beta);
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("sigma2 score vanishes at the profiled value") {
  std::mt19937 gen(43);
  SpatialDataset data = testutil::random_dataset(gen, 20, 2, 6.0);
  LikelihoodModel m(data, LikelihoodVariant::tapered, TaperSpec::linear(2.5));
  Eigen::VectorXd beta = testutil::random_vector(gen, 2);
  const double r = 1.3, c = 0.2;
  const double s2 = m.profile_sigma2(beta, r, c);
  Eigen::Vector3d s = m.score_theta({beta, {r, c, s2}});
  CHECK(std::abs(s[2]) <= 1e-10);
}

TEST_CASE("beta information is positive definite for full-rank designs") {
  std::mt19937 gen(47);
  SpatialDataset data = testutil::random_dataset(gen, 30, 4, 7.0);
  LikelihoodModel m(data, LikelihoodVariant::tapered, TaperSpec::linear(2.0));
  InformationMatrices info =
      m.information({Eigen::VectorXd::Zero(4), CovParams{1.0, 0.2, 2.0}});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info.beta_info);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("alt whitening reproduces the alt quadratic-form matrix") {
  std::mt19937 gen(53);
  SpatialDataset data = testutil::random_dataset(gen, 15, 2, 5.0);
  const double omega = 2.0;
  LikelihoodModel alt(data, LikelihoodVariant::tapered_alt, TaperSpec::linear(omega));
  CovParams theta{1.0, 0.15, 1.0};
  auto wd = alt.whitened_design(theta);

  SymmetricMatrix d = pairwise_distances(data.sites);
  Eigen::MatrixXd gt = build_tapered_covariance(d, theta, TaperSpec::linear(omega)).to_dense();
  Eigen::MatrixXd taper_w(15, 15);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j)
      taper_w(i, j) = i == j ? 1.0 : taper_weight(d.coeff(i, j), TaperSpec::linear(omega));
  Eigen::MatrixXd m_mat = gt.inverse().cwiseProduct(taper_w);

  Eigen::MatrixXd lhs = wd.X.transpose() * wd.X;
  Eigen::MatrixXd rhs = data.X.transpose() * m_mat * data.X;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * rhs.norm());
}

TEST_CASE("score is approximately zero at the fitted maximum") {
  std::mt19937 gen(59);
  Eigen::VectorXd beta_true(2);
  beta_true << 1.5, -0.5;
  SpatialDataset data =
      testutil::model_dataset(gen, 60, 2, beta_true, {1.0, 0.2, 2.0}, 8.0);
  FitResult fit = fit_mle(data, LikelihoodVariant::full, TaperSpec::none());
  LikelihoodModel m(data, LikelihoodVariant::full, TaperSpec::none());
  Eigen::Vector3d s = m.score_theta({fit.beta, fit.theta});
  // Scale-free comparison: multiply by the natural parameter scales.
  CHECK(std::abs(s[0] * fit.theta.range) <= 2e-3);
  CHECK(std::abs(s[1]) <= 2e-3);
  CHECK(std::abs(s[2] * fit.theta.sigma2) <= 2e-3);
}

TEST_CASE("constructor validation") {
  SpatialDataset data;
  data.sites.coords.resize(2, 2);
  data.sites.coords << 0, 0, 1, 1;
  data.X.resize(2, 1);
  data.X << 1, 2;
  data.y.resize(2);
  data.y << 1, std::nan("");
  CHECK_THROWS_AS(LikelihoodModel(data, LikelihoodVariant::full, TaperSpec::none()),
                  InvalidParameter);
  data.y << 1, 2;
  CHECK_NOTHROW(LikelihoodModel(data, LikelihoodVariant::full, TaperSpec::none()));
  // Tapered variants require a taper; full requires none.
  CHECK_THROWS_AS(LikelihoodModel(data, LikelihoodVariant::full, TaperSpec::linear(1.0)),
                  ConfigError);
}
