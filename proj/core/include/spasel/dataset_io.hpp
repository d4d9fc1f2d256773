#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spasel/types.hpp"

namespace spasel {

struct LoadedDataset {
  SpatialDataset data;
  std::vector<std::string> coord_names;      // two entries
  std::string response_name;
  std::vector<std::string> covariate_names;  // one per column of X
};

// Strict CSV: one header row, comma separators, every cell a finite number,
// no missing values. Errors carry 1-based line numbers. An empty `covariates`
// selects every column that is not a coordinate or the response, in header
// order.
LoadedDataset read_dataset_csv(const std::filesystem::path& path,
                               const std::vector<std::string>& coord_names,
                               const std::string& response_name,
                               const std::vector<std::string>& covariates = {});

// Full-precision CSV (round-trips exactly) with columns: coords, response,
// covariates.
void write_dataset_csv(const std::filesystem::path& path, const LoadedDataset& ds);

}  // namespace spasel
