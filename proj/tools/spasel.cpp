// spasel: fit spatial linear models with selection, run simulation studies,
// and merge saved results into comparison tables.
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spasel/dataset_io.hpp"
#include "spasel/errors.hpp"
#include "spasel/num_format.hpp"
#include "spasel/report.hpp"
#include "spasel/result_io.hpp"
#include "spasel/simulation.hpp"
#include "spasel/workflow.hpp"

namespace {

using namespace spasel;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

struct FitArgs {
  std::string input;
  std::string coords = "x,y";
  std::string response = "y";
  std::string covariates;  // empty: every remaining column
  std::string variant;     // empty: inferred from taper
  std::string taper;       // empty: inferred from omega
  double omega = kNaN;
  std::string lambda = "tune";
  double a = 3.7;
  int grid_size = 30;
  double grid_min = kNaN;
  double grid_max = kNaN;
  bool bic_full_covariance = false;
  std::uint64_t seed = 0;
  std::string out = "fit.json";
};

int cmd_fit(const FitArgs& args) {
  RunConfig cfg;

  // Flag inference: --omega implies a linear taper; a linear taper implies
  // the tapered variant. Explicit flags always win; run_fit validates the
  // final combination.
  std::string taper = args.taper;
  if (taper.empty()) taper = std::isfinite(args.omega) ? "linear" : "none";
  std::string variant = args.variant;
  if (variant.empty()) variant = (taper == "linear") ? "tapered" : "full";

  if (variant == "full") {
    cfg.variant = LikelihoodVariant::full;
  } else if (variant == "tapered") {
    cfg.variant = LikelihoodVariant::tapered;
  } else if (variant == "tapered-alt") {
    cfg.variant = LikelihoodVariant::tapered_alt;
  } else {
    throw ConfigError("unknown variant '" + variant + "' (full, tapered, tapered-alt)");
  }
  if (taper == "none") {
    cfg.taper = TaperSpec::none();
  } else if (taper == "linear") {
    cfg.taper = TaperSpec::linear(args.omega);
  } else {
    throw ConfigError("unknown taper '" + taper + "' (none, linear)");
  }

  if (args.lambda == "tune") {
    cfg.lambda_mode = LambdaMode::tune;
  } else {
    cfg.lambda_mode = LambdaMode::fixed;
    const char* b = args.lambda.data();
    const char* e = b + args.lambda.size();
    auto [ptr, ec] = std::from_chars(b, e, cfg.lambda);
    if (ec != std::errc{} || ptr != e)
      throw ConfigError("--lambda expects a number or 'tune', got '" + args.lambda + "'");
  }
  cfg.scad_a = args.a;
  cfg.grid_size = args.grid_size;
  if (std::isfinite(args.grid_min)) cfg.grid_min = args.grid_min;
  if (std::isfinite(args.grid_max)) cfg.grid_max = args.grid_max;
  cfg.bic_full_covariance = args.bic_full_covariance;
  cfg.seed = args.seed;

  const std::vector<std::string> coords = split_commas(args.coords);
  if (coords.size() != 2)
    throw ConfigError("--coords expects exactly two column names, e.g. x,y");
  std::vector<std::string> covariates;
  if (!args.covariates.empty()) covariates = split_commas(args.covariates);

  LoadedDataset input =
      read_dataset_csv(args.input, {coords[0], coords[1]}, args.response, covariates);
  FitOutput out = run_fit(std::move(input), cfg);

  std::cout << render_fit_table(out);
  write_text_file(args.out, fit_output_to_json(out));
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

struct SimulateArgs {
  double side = 10.0;
  double density = 4.0;
  int p = 7;
  double rho = 0.5;
  int reps = 100;
  std::uint64_t seed = 0;
  double omega = kNaN;
  int workers = 1;
  int grid_size = 30;
  double a = 3.7;
  std::string out = ".";
  bool dump_data = false;
};

int cmd_simulate(const SimulateArgs& args) {
  ScenarioSpec spec;
  spec.side = args.side;
  spec.density = args.density;
  spec.p = args.p;
  spec.rho = args.rho;
  spec.replicates = args.reps;
  spec.seed = args.seed;
  if (std::isfinite(args.omega)) spec.omega = args.omega;
  spec.workers = args.workers;
  spec.grid_size = args.grid_size;
  spec.scad_a = args.a;

  const std::filesystem::path dir(args.out);
  std::filesystem::create_directories(dir);

  if (args.dump_data) {
    for (int i = 0; i < spec.replicates; ++i) {
      SpatialDataset data = simulate_dataset(spec, i);
      LoadedDataset ld;
      ld.data = std::move(data);
      ld.coord_names = {"sx", "sy"};
      ld.response_name = "y";
      for (Eigen::Index j = 0; j < ld.data.p(); ++j)
        ld.covariate_names.push_back("x" + std::to_string(j + 1));
      write_dataset_csv(dir / ("replicate_" + std::to_string(i) + ".csv"), ld);
    }
  }

  ScenarioResult result = run_scenario(spec, [&](int done, int total) {
    std::fprintf(stderr, "replicate %d/%d\n", done, total);
  });

  {
    std::ostringstream csv;
    write_scenario_csv(result, csv);
    write_text_file(dir / "scenario.csv", csv.str());
  }
  write_text_file(dir / "scenario.json", scenario_result_to_json(result));

  std::cout << "n=" << result.n << "  omega=" << format_double(result.omega)
            << "  replicates=" << result.spec.replicates << "\n\n"
            << render_scenario_table(result) << "\n"
            << "elapsed " << format_fixed(result.elapsed_seconds, 1) << " s ("
            << format_fixed(result.elapsed_seconds / result.spec.replicates, 2)
            << " s/replicate)\n"
            << "wrote " << (dir / "scenario.csv").string() << ", "
            << (dir / "scenario.json").string() << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<StoredResult> results;
  results.reserve(inputs.size());
  for (const std::string& path : inputs) results.push_back(read_result_json(path));
  const std::string text = render_report(results);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial linear model fitting with simultaneous variable selection"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "Fit one dataset; prints a coefficient table and writes JSON");
  fit->add_option("input", fit_args.input, "CSV file with header")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--coords", fit_args.coords, "site coordinate columns (two names)")
      ->capture_default_str();
  fit->add_option("--response", fit_args.response, "response column")->capture_default_str();
  fit->add_option("--covariates", fit_args.covariates,
                  "covariate columns (default: every remaining column)");
  fit->add_option("--variant", fit_args.variant,
                  "likelihood variant: full, tapered, tapered-alt (default: tapered "
                  "when a taper is given, else full)");
  fit->add_option("--taper", fit_args.taper,
                  "taper family: none, linear (default: linear when --omega is given)");
  fit->add_option("--omega", fit_args.omega, "taper radius (> 0)");
  fit->add_option("--lambda", fit_args.lambda, "penalty level, or 'tune' for BIC selection")
      ->capture_default_str();
  fit->add_option("--a", fit_args.a, "penalty shape parameter (> 2)")->capture_default_str();
  fit->add_option("--grid-size", fit_args.grid_size, "number of candidate penalty levels")
      ->capture_default_str();
  fit->add_option("--grid-min", fit_args.grid_min, "smallest candidate penalty level");
  fit->add_option("--grid-max", fit_args.grid_max, "largest candidate penalty level");
  fit->add_flag("--bic-full-covariance", fit_args.bic_full_covariance,
                "score BIC under the untapered covariance");
  fit->add_option("--seed", fit_args.seed, "seed echoed into outputs")->capture_default_str();
  fit->add_option("--out", fit_args.out, "output JSON path")->capture_default_str();

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run the repeated-sampling comparison and write summary files");
  sim->add_option("--side,--l", sim_args.side, "square edge length l; N = density * l^2")
      ->capture_default_str();
  sim->add_option("--density", sim_args.density, "sites per unit area")->capture_default_str();
  sim->add_option("--p", sim_args.p, "number of covariates")->capture_default_str();
  sim->add_option("--rho", sim_args.rho, "covariate equicorrelation")->capture_default_str();
  sim->add_option("--reps", sim_args.reps, "number of replicates")->capture_default_str();
  sim->add_option("--seed", sim_args.seed, "base seed")->capture_default_str();
  sim->add_option("--omega", sim_args.omega, "taper radius (default l/4)");
  sim->add_option("--workers", sim_args.workers, "concurrent replicates")
      ->capture_default_str();
  sim->add_option("--grid-size", sim_args.grid_size, "penalty grid size")
      ->capture_default_str();
  sim->add_option("--a", sim_args.a, "penalty shape parameter")->capture_default_str();
  sim->add_option("--out", sim_args.out, "output directory")->capture_default_str();
  sim->add_flag("--dump-data", sim_args.dump_data,
                "also write each replicate's dataset as replicate_<i>.csv");

  std::vector<std::string> report_inputs;
  std::string report_out;
  CLI::App* rep = app.add_subcommand("report", "Merge result JSON files into one table");
  rep->add_option("inputs", report_inputs, "result JSON files")->required();
  rep->add_option("--out", report_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;  // help/version exit clean; usage errors are config errors
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_args);
    if (sim->parsed()) return cmd_simulate(sim_args);
    return cmd_report(report_inputs, report_out);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateSites& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RankDeficientDesign& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const TuningFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
