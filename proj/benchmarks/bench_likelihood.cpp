// Micro-benchmarks for the numeric hot paths: covariance assembly and
// factorization, log-likelihood evaluations (dense vs. tapered sparse), and
// the penalized coordinate-descent solver.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "spasel/estimators.hpp"
#include "spasel/likelihood.hpp"
#include "spasel/simulation.hpp"

using namespace spasel;

namespace {

// Deterministic scenario replicate at the requested size; omega = side / 4.
SpatialDataset make_data(Eigen::Index n) {
  ScenarioSpec spec;
  spec.side = std::sqrt(static_cast<double>(n) / 4.0);
  spec.seed = 1234;
  return simulate_dataset(spec, 0);
}

double scenario_omega(Eigen::Index n) { return std::sqrt(static_cast<double>(n) / 4.0) / 4.0; }

// Alternating parameter values so cached factorizations cannot be reused.
const CovParams kThetaA{1.0, 0.2, 9.0};
const CovParams kThetaB{1.1, 0.25, 8.5};

void bench_loglik(benchmark::State& state, LikelihoodVariant variant) {
  const Eigen::Index n = state.range(0);
  const SpatialDataset data = make_data(n);
  const TaperSpec taper = variant == LikelihoodVariant::full
                              ? TaperSpec::none()
                              : TaperSpec::linear(scenario_omega(n));
  LikelihoodModel model(data, variant, taper);
  bool flip = false;
  for (auto _ : state) {
    flip = !flip;
    const CovParams& theta = flip ? kThetaA : kThetaB;
    const ProfiledFit fit = model.profiled_fit(theta.range, theta.nugget);
    benchmark::DoNotOptimize(fit.loglik);
  }
}

void BM_loglik_full(benchmark::State& state) { bench_loglik(state, LikelihoodVariant::full); }
void BM_loglik_tapered(benchmark::State& state) {
  bench_loglik(state, LikelihoodVariant::tapered);
}
void BM_loglik_tapered_alt(benchmark::State& state) {
  bench_loglik(state, LikelihoodVariant::tapered_alt);
}

void BM_factorize_dense(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const SpatialDataset data = make_data(n);
  const SymmetricMatrix dists = pairwise_distances(data.sites);
  bool flip = false;
  for (auto _ : state) {
    flip = !flip;
    CholeskyFactor f = factorize(build_covariance(dists, flip ? kThetaA : kThetaB));
    benchmark::DoNotOptimize(f.log_det());
  }
}

void BM_factorize_tapered(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const SpatialDataset data = make_data(n);
  const SymmetricMatrix dists = pairwise_distances(data.sites);
  const TaperSpec taper = TaperSpec::linear(scenario_omega(n));
  bool flip = false;
  for (auto _ : state) {
    flip = !flip;
    CholeskyFactor f =
        factorize(build_tapered_covariance(dists, flip ? kThetaA : kThetaB, taper));
    benchmark::DoNotOptimize(f.log_det());
  }
}

void BM_weighted_lasso(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  std::mt19937 gen(7);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, 7);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < 7; ++j) x(i, j) = normal(gen);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(7);
  beta[0] = 4.0;
  beta[1] = 3.0;
  Eigen::VectorXd y = x * beta;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += normal(gen);
  const Eigen::VectorXd weights = Eigen::VectorXd::Constant(7, 0.1);
  for (auto _ : state) {
    Eigen::VectorXd b = weighted_lasso(x, y, weights, static_cast<double>(n));
    benchmark::DoNotOptimize(b.sum());
  }
}

}  // namespace

BENCHMARK(BM_loglik_full)->Arg(100)->Arg(400)->Arg(900)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_loglik_tapered)->Arg(100)->Arg(400)->Arg(900)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_loglik_tapered_alt)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_factorize_dense)->Arg(400)->Arg(900)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_factorize_tapered)->Arg(400)->Arg(900)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_weighted_lasso)->Arg(400)->Arg(2000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
