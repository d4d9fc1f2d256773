#include "spasel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "spasel/num_format.hpp"
#include "spasel/simulation.hpp"

namespace spasel {

namespace {

// Left-aligned first column, right-aligned value columns, two-space gutters.
std::string layout_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) os << "  ";
      const std::string& cell = row[c];
      if (c == 0) {
        os << cell << std::string(width[c] - cell.size(), ' ');
      } else {
        os << std::string(width[c] - cell.size(), ' ') << cell;
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string value_cell(double v, int decimals = 3) {
  return format_fixed(v, decimals);  // "--" for non-finite
}

// "estimate (se)"; dropped terms (exact zero, no se) render as "--".
std::string estimate_cell(double estimate, double se) {
  if (estimate == 0.0 && !std::isfinite(se)) return "--";
  if (!std::isfinite(estimate)) return "--";
  std::string cell = format_fixed(estimate, 3);
  if (std::isfinite(se)) cell += " (" + format_fixed(se, 3) + ")";
  return cell;
}

const StoredBeta* find_beta(const StoredFit& fit, const std::string& name) {
  for (const StoredBeta& b : fit.beta)
    if (b.name == name) return &b;
  return nullptr;
}

std::string render_fit_section(const std::vector<const StoredFit*>& fits) {
  std::vector<std::string> names;  // union of coefficient names, first-seen order
  for (const StoredFit* fit : fits)
    for (const StoredBeta& b : fit->beta)
      if (std::find(names.begin(), names.end(), b.name) == names.end())
        names.push_back(b.name);

  std::vector<std::vector<std::string>> rows;
  auto row = [&](const std::string& label, auto&& cell) {
    std::vector<std::string> r{label};
    for (const StoredFit* fit : fits) r.push_back(cell(*fit));
    rows.push_back(std::move(r));
  };

  row("term", [](const StoredFit& f) { return f.source; });
  row("method", [](const StoredFit& f) { return f.method; });
  row("model", [](const StoredFit& f) {
    std::string m = f.variant;
    if (f.taper != "none") {
      m += ", " + f.taper;
      if (std::isfinite(f.omega)) m += " omega=" + format_fixed(f.omega, 3);
    }
    return m;
  });
  for (const std::string& name : names) {
    row(name, [&](const StoredFit& f) {
      const StoredBeta* b = find_beta(f, name);
      return b ? estimate_cell(b->estimate, b->se) : std::string("--");
    });
  }
  row("range", [](const StoredFit& f) {
    return estimate_cell(f.theta.range, f.se_theta[0]);
  });
  row("nugget", [](const StoredFit& f) {
    return estimate_cell(f.theta.nugget, f.se_theta[1]);
  });
  row("sigma2", [](const StoredFit& f) {
    return estimate_cell(f.theta.sigma2, f.se_theta[2]);
  });
  row("loglik", [](const StoredFit& f) { return value_cell(f.loglik); });
  row("bic", [](const StoredFit& f) { return value_cell(f.bic); });
  row("lambda", [](const StoredFit& f) { return format_fixed(f.lambda, 4); });

  return "Fits\n\n" + layout_table(rows);
}

std::string render_scenario_section(const StoredScenario& sc) {
  std::ostringstream os;
  os << "Scenario " << sc.source << " (n=" << sc.n << ", replicates=" << sc.replicates
     << ")\n\n";
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"statistic", "truth"};
  header.insert(header.end(), sc.methods.begin(), sc.methods.end());
  rows.push_back(std::move(header));
  for (std::size_t i = 0; i < sc.statistics.size(); ++i) {
    std::vector<std::string> r{sc.statistics[i], value_cell(sc.truth[i], 2)};
    for (double v : sc.values[i]) r.push_back(value_cell(v, 3));
    rows.push_back(std::move(r));
  }
  os << layout_table(rows);
  return os.str();
}

}  // namespace

std::string render_report(const std::vector<StoredResult>& results) {
  std::vector<const StoredFit*> fits;
  std::vector<const StoredScenario*> scenarios;
  for (const StoredResult& r : results) {
    if (const auto* fit = std::get_if<StoredFit>(&r)) fits.push_back(fit);
    if (const auto* sc = std::get_if<StoredScenario>(&r)) scenarios.push_back(sc);
  }
  std::string out;
  if (!fits.empty()) out += render_fit_section(fits);
  for (const StoredScenario* sc : scenarios) {
    if (!out.empty()) out += '\n';
    out += render_scenario_section(*sc);
  }
  return out;
}

std::string render_scenario_table(const ScenarioResult& result) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"statistic", "truth"};
  for (const MethodSummary& s : result.summary) header.push_back(s.name);
  rows.push_back(std::move(header));
  for (const SummaryRow& r : scenario_summary_rows(result)) {
    std::vector<std::string> cells{r.statistic, value_cell(r.truth, 2)};
    for (double v : r.values) cells.push_back(value_cell(v, 3));
    rows.push_back(std::move(cells));
  }
  return layout_table(rows);
}

}  // namespace spasel
