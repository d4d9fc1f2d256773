#include "spasel/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spasel/num_format.hpp"

namespace spasel {

Standardization standardize_in_place(SpatialDataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  if (n < 2) throw InvalidParameter("need at least two observations");
  Standardization s;
  s.x_mean.resize(p);
  s.x_sd.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    s.x_mean[j] = data.X.col(j).mean();
    data.X.col(j).array() -= s.x_mean[j];
    s.x_sd[j] = std::sqrt(data.X.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (!(s.x_sd[j] > 0.0))
      throw RankDeficientDesign("covariate column " + std::to_string(j + 1) + " is constant");
    data.X.col(j) /= s.x_sd[j];
  }
  s.y_mean = data.y.mean();
  data.y.array() -= s.y_mean;
  return s;
}

void RunConfig::validate() const {
  const bool tapered_variant =
      variant == LikelihoodVariant::tapered || variant == LikelihoodVariant::tapered_alt;
  if (variant == LikelihoodVariant::full && taper.family != TaperFamily::none)
    throw ConfigError("the full variant uses no taper");
  if (tapered_variant && taper.family != TaperFamily::linear)
    throw ConfigError("tapered variants need --taper linear with --omega");
  if (taper.family == TaperFamily::linear && !(taper.omega > 0.0 && std::isfinite(taper.omega)))
    throw ConfigError("omega must be finite and > 0");
  if (lambda_mode == LambdaMode::fixed && (!std::isfinite(lambda) || lambda < 0.0))
    throw ConfigError("fixed lambda must be finite and >= 0");
  if (!(scad_a > 2.0)) throw ConfigError("penalty shape a must be > 2");
  if (grid_size < 1) throw ConfigError("grid size must be >= 1");
  if (grid_min.has_value() != grid_max.has_value())
    throw ConfigError("grid bounds must be given together");
  if (grid_min && !(*grid_min > 0.0 && *grid_max >= *grid_min))
    throw ConfigError("grid bounds need 0 < min <= max");
}

FitOutput run_fit(LoadedDataset input, const RunConfig& cfg) {
  cfg.validate();
  FitOutput out;
  out.config = cfg;
  out.standardization = standardize_in_place(input.data);
  out.input = std::move(input);
  const SpatialDataset& data = out.input.data;

  if (cfg.lambda_mode == LambdaMode::tune) {
    std::optional<LambdaGrid> grid;
    if (cfg.grid_min) grid = LambdaGrid::log_spaced(*cfg.grid_min, *cfg.grid_max, cfg.grid_size);
    std::optional<LikelihoodVariant> scoring_variant;
    std::optional<TaperSpec> scoring_taper;
    if (cfg.bic_full_covariance) {
      scoring_variant = LikelihoodVariant::full;
      scoring_taper = TaperSpec::none();
    }
    TuningResult tuned = tune_lambda(data, cfg.variant, cfg.taper, std::move(grid),
                                     cfg.optimizer, cfg.scad_a, cfg.grid_size, scoring_variant,
                                     scoring_taper);
    out.fit = tuned.chosen;
    out.tuning = std::move(tuned);
  } else {
    out.fit = fit_ose(data, cfg.variant, cfg.taper, {cfg.lambda, cfg.scad_a}, cfg.optimizer);
    if (cfg.bic_full_covariance)
      out.fit.bic = bic_score(data, out.fit, LikelihoodVariant::full, TaperSpec::none());
  }
  return out;
}

const char* variant_name(LikelihoodVariant v) {
  switch (v) {
    case LikelihoodVariant::full: return "full";
    case LikelihoodVariant::tapered: return "tapered";
    case LikelihoodVariant::tapered_alt: return "tapered_alt";
  }
  return "full";
}

const char* taper_name(TaperFamily f) {
  return f == TaperFamily::linear ? "linear" : "none";
}

std::string render_fit_table(const FitOutput& out) {
  const FitResult& fit = out.fit;
  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"term", "estimate", "se"});
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    const bool dropped = fit.beta[j] == 0.0;
    rows.push_back({out.input.covariate_names[j],
                    dropped ? "--" : format_fixed(fit.beta[j], 3),
                    dropped ? "--" : format_fixed(fit.se_beta[j], 3)});
  }
  rows.push_back({"range", format_fixed(fit.theta.range, 3), format_fixed(fit.se_theta[0], 3)});
  rows.push_back(
      {"nugget", format_fixed(fit.theta.nugget, 3), format_fixed(fit.se_theta[1], 3)});
  rows.push_back(
      {"sigma2", format_fixed(fit.theta.sigma2, 3), format_fixed(fit.se_theta[2], 3)});
  rows.push_back({"", "", ""});
  rows.push_back({"loglik", format_fixed(fit.loglik, 3), ""});
  rows.push_back({"bic", format_fixed(fit.bic, 3), ""});
  if (std::isfinite(fit.diagnostics.lambda))
    rows.push_back({"lambda", format_fixed(fit.diagnostics.lambda, 4), ""});

  std::array<std::size_t, 3> width{};
  for (const auto& r : rows)
    for (int c = 0; c < 3; ++c) width[c] = std::max(width[c], r[c].size());

  std::ostringstream os;
  for (const auto& r : rows) {
    if (r[0].empty() && r[1].empty()) {
      os << '\n';
      continue;
    }
    os << r[0] << std::string(width[0] - r[0].size() + 2, ' ') << r[1];
    if (!r[2].empty()) os << std::string(width[1] - r[1].size() + 2, ' ') << r[2];
    os << '\n';
  }
  return os.str();
}

}  // namespace spasel
