#pragma once

#include <string>
#include <vector>

#include "spasel/result_io.hpp"

namespace spasel {

// Merge previously written result files into comparison tables. Fit results
// are shown side by side, one column per source file, with coefficient rows
// in first-seen order ("--" marks terms a fit dropped or never had). Scenario
// results render one block per source. Mixed inputs produce a fits section
// followed by a scenarios section.
std::string render_report(const std::vector<StoredResult>& results);

// The same table cmd_simulate prints after a run: one row per summary
// statistic, one column per method.
std::string render_scenario_table(const ScenarioResult& result);

}  // namespace spasel
