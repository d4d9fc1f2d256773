#include "spasel/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace spasel {

// Relative slack under which two BIC values count as tied (and the larger
// lambda wins). Wide enough to absorb last-ulp noise between mathematically
// identical fits, far below any statistically meaningful BIC difference.
constexpr double kBicTieTol = 1e-10;

LambdaGrid LambdaGrid::log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidParameter("log grid needs 0 < lo <= hi");
  if (count < 1) throw InvalidParameter("grid needs at least one level");
  LambdaGrid g;
  if (count == 1 || lo == hi) {
    g.values = {hi};
    return g;
  }
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  g.values.resize(count);
  for (int i = 0; i < count; ++i)
    g.values[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
  g.values.front() = lo;
  g.values.back() = hi;
  return g;
}

LambdaGrid LambdaGrid::default_for(const Eigen::MatrixXd& xw, const Eigen::VectorXd& yw,
                                   int count) {
  const double n = static_cast<double>(xw.rows());
  double lmax = (xw.transpose() * yw).cwiseAbs().maxCoeff() / n;
  if (!(lmax > 0.0) || !std::isfinite(lmax)) lmax = 1e-12;
  return log_spaced(1e-3 * lmax, lmax, count);
}

void LambdaGrid::validate() const {
  if (values.empty()) throw InvalidParameter("empty lambda grid");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      throw InvalidParameter("lambda levels must be finite and >= 0");
    if (i > 0 && values[i] <= values[i - 1])
      throw InvalidParameter("lambda levels must be strictly increasing");
  }
}

double bic_score(const SpatialDataset& data, const FitResult& fit, LikelihoodVariant variant,
                 const TaperSpec& taper) {
  const double n = static_cast<double>(data.n());
  const int k = static_cast<int>(fit.selected.size());
  double sigma2;
  if (!std::isfinite(fit.theta.range)) {
    sigma2 = std::max((data.y - data.X * fit.beta).squaredNorm() / n, 1e-300);
  } else {
    sigma2 = std::max(
        profile_sigma2(data, fit.beta, fit.theta.range, fit.theta.nugget, variant, taper),
        1e-300);
  }
  return n * std::log(sigma2) + k * std::log(n);
}

namespace {

struct Scorer {
  // same-model scoring reuses the fitting model's profile; cross-variant
  // scoring keeps its own model
  LikelihoodModel* same = nullptr;
  std::unique_ptr<LikelihoodModel> other;
  // Every lambda is scored under the initializer's correlation parameters:
  // the path comparison must be a nested-model contrast on one whitening.
  // Scoring at each fit's re-estimated theta lets the process absorb the
  // misfit of a wrongly dropped covariate and overstates sparsity.
  double range = kNaN;
  double nugget = 0.0;

  double operator()(const SpatialDataset& data, const FitResult& fit) {
    const double n = static_cast<double>(data.n());
    const int k = static_cast<int>(fit.selected.size());
    double sigma2;
    if (!std::isfinite(range)) {
      sigma2 = std::max((data.y - data.X * fit.beta).squaredNorm() / n, 1e-300);
    } else {
      LikelihoodModel& m = other ? *other : *same;
      sigma2 = std::max(m.profile_sigma2(fit.beta, range, nugget), 1e-300);
    }
    return n * std::log(sigma2) + k * std::log(n);
  }
};

TuningResult tune_impl(const SpatialDataset& data, LikelihoodVariant variant,
                       const TaperSpec& taper, std::optional<LambdaGrid> grid,
                       const OptimizerConfig& cfg, double scad_a, int grid_size,
                       std::optional<LikelihoodVariant> scoring_variant,
                       std::optional<TaperSpec> scoring_taper, const FitResult* given_init) {
  LikelihoodModel model(data, variant, taper);

  TuningResult out;
  if (given_init) {
    out.initializer = *given_init;
    out.initializer_fits = 0;
  } else {
    OptimizerConfig init_cfg = cfg;
    init_cfg.compute_se = false;
    out.initializer = fit_mle(model, init_cfg);
    out.initializer_fits = 1;
  }

  LikelihoodModel::WhitenedDesign wd = model.whitened_design(out.initializer.theta);
  if (grid) {
    grid->validate();
    out.grid = *grid;
  } else {
    out.grid = LambdaGrid::default_for(wd.X, wd.y, grid_size);
  }

  Scorer scorer;
  scorer.range = out.initializer.theta.range;
  scorer.nugget = out.initializer.theta.nugget;
  if (scoring_variant || scoring_taper) {
    const LikelihoodVariant sv = scoring_variant.value_or(variant);
    const TaperSpec st = scoring_taper.value_or(taper);
    if (sv != variant || st.family != taper.family || st.omega != taper.omega)
      scorer.other = std::make_unique<LikelihoodModel>(data, sv, st);
    else
      scorer.same = &model;
  } else {
    scorer.same = &model;
  }

  OptimizerConfig path_cfg = cfg;
  path_cfg.compute_se = false;

  double best_bic = std::numeric_limits<double>::infinity();
  std::vector<std::string> failures;
  for (double lambda : out.grid.values) {
    LambdaRecord rec;
    rec.lambda = lambda;
    try {
      FitResult fit =
          fit_ose_from(model, {lambda, scad_a}, path_cfg, out.initializer);
      rec.selected_count = static_cast<int>(fit.selected.size());
      rec.sigma2 = fit.theta.sigma2;
      rec.bic = scorer(data, fit);
      rec.fit = std::move(fit);
      // Ties resolve toward the larger (later) lambda. Equal-support fits on a
      // weight plateau are mathematically identical but their scores carry
      // last-ulp solver noise, so the tie needs a tolerance to be detectable.
      if (rec.bic <= best_bic + kBicTieTol * std::max(1.0, std::abs(best_bic))) {
        if (rec.bic < best_bic) best_bic = rec.bic;
        out.chosen_index = static_cast<int>(out.records.size());
      }
    } catch (const Error& e) {
      rec.error = e.what();
      failures.push_back(rec.error);
    }
    out.records.push_back(std::move(rec));
  }
  if (out.chosen_index < 0)
    throw TuningFailed("every lambda level failed", failures);

  out.chosen = *out.records[out.chosen_index].fit;
  out.chosen.bic = out.records[out.chosen_index].bic;
  if (cfg.compute_se) attach_standard_errors(model, out.chosen);
  return out;
}

}  // namespace

TuningResult tune_lambda(const SpatialDataset& data, LikelihoodVariant variant,
                         const TaperSpec& taper, std::optional<LambdaGrid> grid,
                         const OptimizerConfig& cfg, double scad_a, int grid_size,
                         std::optional<LikelihoodVariant> scoring_variant,
                         std::optional<TaperSpec> scoring_taper) {
  return tune_impl(data, variant, taper, std::move(grid), cfg, scad_a, grid_size,
                   scoring_variant, scoring_taper, nullptr);
}

TuningResult tune_lambda_from(const SpatialDataset& data, LikelihoodVariant variant,
                              const TaperSpec& taper, std::optional<LambdaGrid> grid,
                              const OptimizerConfig& cfg, const FitResult& init, double scad_a,
                              int grid_size, std::optional<LikelihoodVariant> scoring_variant,
                              std::optional<TaperSpec> scoring_taper) {
  return tune_impl(data, variant, taper, std::move(grid), cfg, scad_a, grid_size,
                   scoring_variant, scoring_taper, &init);
}

TuningResult tune_lambda_baseline(const SpatialDataset& data, std::optional<LambdaGrid> grid,
                                  const OptimizerConfig& cfg, double scad_a, int grid_size) {
  OptimizerConfig path_cfg = cfg;
  path_cfg.compute_se = false;

  TuningResult out;
  out.initializer = fit_baseline_iid(data, {0.0, scad_a}, path_cfg);  // plain OLS
  out.initializer_fits = 0;

  if (grid) {
    grid->validate();
    out.grid = *grid;
  } else {
    const double sigma = std::sqrt(out.initializer.theta.sigma2);
    out.grid = LambdaGrid::default_for(data.X / sigma, data.y / sigma, grid_size);
  }

  const double n = static_cast<double>(data.n());
  double best_bic = std::numeric_limits<double>::infinity();
  std::vector<std::string> failures;
  for (double lambda : out.grid.values) {
    LambdaRecord rec;
    rec.lambda = lambda;
    try {
      FitResult fit = fit_baseline_iid(data, {lambda, scad_a}, path_cfg);
      rec.selected_count = static_cast<int>(fit.selected.size());
      rec.sigma2 = fit.theta.sigma2;
      rec.bic = n * std::log(rec.sigma2) + rec.selected_count * std::log(n);
      rec.fit = std::move(fit);
      if (rec.bic <= best_bic + kBicTieTol * std::max(1.0, std::abs(best_bic))) {
        if (rec.bic < best_bic) best_bic = rec.bic;
        out.chosen_index = static_cast<int>(out.records.size());
      }
    } catch (const Error& e) {
      rec.error = e.what();
      failures.push_back(rec.error);
    }
    out.records.push_back(std::move(rec));
  }
  if (out.chosen_index < 0)
    throw TuningFailed("every lambda level failed", failures);

  out.chosen = *out.records[out.chosen_index].fit;
  if (cfg.compute_se) attach_standard_errors_iid(data, out.chosen);
  return out;
}

}  // namespace spasel
