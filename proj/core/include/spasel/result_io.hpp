#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "spasel/simulation.hpp"
#include "spasel/workflow.hpp"

namespace spasel {

inline constexpr int kSchemaVersion = 1;

// JSON serializations carry schema_version and a kind tag ("fit" or
// "scenario"). Non-finite numbers serialize as null.
std::string fit_output_to_json(const FitOutput& out);
std::string scenario_result_to_json(const ScenarioResult& result);

void write_text_file(const std::filesystem::path& path, const std::string& content);

// Typed view of a stored result, sufficient for reporting.
struct StoredBeta {
  std::string name;
  double estimate = kNaN;
  double se = kNaN;  // NaN encodes null
};

struct StoredFit {
  std::string source;
  std::string method;
  std::string variant;
  std::string taper;
  double omega = kNaN;
  double lambda = kNaN;
  std::vector<StoredBeta> beta;
  CovParams theta{kNaN, kNaN, kNaN};
  Eigen::Vector3d se_theta{kNaN, kNaN, kNaN};
  double loglik = kNaN;
  double bic = kNaN;
};

struct StoredScenario {
  std::string source;
  Eigen::Index n = 0;
  int replicates = 0;
  std::vector<std::string> methods;
  std::vector<std::string> statistics;
  std::vector<double> truth;
  std::vector<std::vector<double>> values;  // [statistic][method]
};

using StoredResult = std::variant<StoredFit, StoredScenario>;

// Throws SchemaMismatch for unknown schema_version or kind, ParseError for
// files that are not valid JSON.
StoredResult read_result_json(const std::filesystem::path& path);

}  // namespace spasel
