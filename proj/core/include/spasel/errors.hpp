#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spasel {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two sites closer than the duplicate tolerance (1e-12).
class DegenerateSites : public Error {
 public:
  using Error::Error;
};

// A parameter outside its admissible region (r <= 0, c outside [0,1), ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Cholesky pivot breakdown. smallest_pivot is the most negative (or smallest)
// diagonal entry of the LDL^T fallback, for diagnostics.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, double pivot)
      : Error(what), smallest_pivot(pivot) {}
  double smallest_pivot;
};

// Design matrix without full column rank where a GLS solve needs one.
class RankDeficientDesign : public Error {
 public:
  using Error::Error;
};

// Iterative procedure ran out of iterations. trace holds the objective
// values seen along the way.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> history)
      : Error(what), trace(std::move(history)) {}
  std::vector<double> trace;
};

// Every candidate penalty level failed; per_lambda collects the reasons.
class TuningFailed : public Error {
 public:
  TuningFailed(const std::string& what, std::vector<std::string> reasons)
      : Error(what), per_lambda(std::move(reasons)) {}
  std::vector<std::string> per_lambda;
};

// Malformed input file. line is 1-based; 0 means "not attributable to a line".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line_number = 0)
      : Error(what), line(line_number) {}
  std::size_t line;
};

// A result file whose schema_version this build does not understand.
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

// Inconsistent run configuration (flag combinations, bad grids, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace spasel
