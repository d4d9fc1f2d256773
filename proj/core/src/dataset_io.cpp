#include "spasel/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "spasel/errors.hpp"
#include "spasel/num_format.hpp"

namespace spasel {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line, const std::string& column) {
  if (cell.empty())
    throw ParseError("line " + std::to_string(line) + ": missing value in column " + column,
                     line);
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line) + ": '" + cell +
                         "' is not a finite number (column " + column + ")",
                     line);
  return v;
}

}  // namespace

LoadedDataset read_dataset_csv(const std::filesystem::path& path,
                               const std::vector<std::string>& coord_names,
                               const std::string& response_name,
                               const std::vector<std::string>& covariates) {
  if (coord_names.size() != 2) throw ParseError("exactly two coordinate columns required");
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path.string(), 1);
  const std::vector<std::string> header = split_csv_line(line);
  for (std::size_t i = 0; i < header.size(); ++i)
    for (std::size_t j = i + 1; j < header.size(); ++j)
      if (header[i] == header[j])
        throw ParseError("line 1: duplicate column '" + header[i] + "'", 1);

  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ParseError("line 1: column '" + name + "' not found", 1);
    return static_cast<std::size_t>(it - header.begin());
  };

  LoadedDataset out;
  out.coord_names = coord_names;
  out.response_name = response_name;
  const std::size_t cx = column_of(coord_names[0]);
  const std::size_t cy = column_of(coord_names[1]);
  const std::size_t cr = column_of(response_name);
  if (cx == cy || cx == cr || cy == cr)
    throw ParseError("line 1: coordinate and response columns must be distinct", 1);

  std::vector<std::size_t> xcols;
  if (covariates.empty()) {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (k != cx && k != cy && k != cr) {
        xcols.push_back(k);
        out.covariate_names.push_back(header[k]);
      }
  } else {
    for (const std::string& name : covariates) {
      const std::size_t k = column_of(name);
      if (k == cx || k == cy || k == cr)
        throw ParseError("line 1: covariate '" + name + "' reuses a coordinate or response",
                         1);
      xcols.push_back(k);
      out.covariate_names.push_back(name);
    }
  }
  if (xcols.empty()) throw ParseError("no covariate columns", 1);

  std::vector<std::array<double, 2>> coords;
  std::vector<double> ys;
  std::vector<std::vector<double>> xs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       lineno);
    coords.push_back({parse_cell(cells[cx], lineno, header[cx]),
                      parse_cell(cells[cy], lineno, header[cy])});
    ys.push_back(parse_cell(cells[cr], lineno, header[cr]));
    std::vector<double> xrow(xcols.size());
    for (std::size_t k = 0; k < xcols.size(); ++k)
      xrow[k] = parse_cell(cells[xcols[k]], lineno, header[xcols[k]]);
    xs.push_back(std::move(xrow));
  }
  if (coords.empty()) throw ParseError("no data rows in " + path.string(), lineno);

  const Eigen::Index n = static_cast<Eigen::Index>(coords.size());
  const Eigen::Index p = static_cast<Eigen::Index>(xcols.size());
  out.data.sites.coords.resize(n, 2);
  out.data.y.resize(n);
  out.data.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.data.sites.coords(i, 0) = coords[i][0];
    out.data.sites.coords(i, 1) = coords[i][1];
    out.data.y[i] = ys[i];
    for (Eigen::Index j = 0; j < p; ++j) out.data.X(i, j) = xs[i][j];
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const LoadedDataset& ds) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot write " + path.string());
  os << ds.coord_names[0] << ',' << ds.coord_names[1] << ',' << ds.response_name;
  for (const std::string& name : ds.covariate_names) os << ',' << name;
  os << '\n';
  for (Eigen::Index i = 0; i < ds.data.n(); ++i) {
    os << format_double(ds.data.sites.coords(i, 0)) << ','
       << format_double(ds.data.sites.coords(i, 1)) << ',' << format_double(ds.data.y[i]);
    for (Eigen::Index j = 0; j < ds.data.p(); ++j)
      os << ',' << format_double(ds.data.X(i, j));
    os << '\n';
  }
}

}  // namespace spasel
