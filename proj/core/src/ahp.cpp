#include "softbody/ahp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "softbody/error.hpp"

namespace softbody::ahp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_number(std::string_view cell) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::InvalidMatrix, "not a number: '" + std::string(cell) + "'");
  }
  return out;
}

double parse_cell(std::string_view cell) {
  const std::size_t slash = cell.find('/');
  if (slash == std::string_view::npos) return parse_number(cell);
  const double num = parse_number(trim(cell.substr(0, slash)));
  const double den = parse_number(trim(cell.substr(slash + 1)));
  if (den == 0.0) throw Error(ErrorCode::InvalidMatrix, "zero denominator in '" + std::string(cell) + "'");
  return num / den;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<std::string> validate(const ComparisonMatrix& m) {
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorCode::InvalidMatrix, "a comparison matrix needs at least two labels");
  if (std::set<std::string>(m.labels.begin(), m.labels.end()).size() != n) {
    throw Error(ErrorCode::InvalidMatrix, "labels must be unique");
  }
  if (m.entries.size() != n) throw Error(ErrorCode::InvalidMatrix, "row count differs from label count");
  for (const auto& row : m.entries) {
    if (row.size() != n) throw Error(ErrorCode::InvalidMatrix, "matrix is not square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = m.entries[i][j];
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw Error(ErrorCode::NonpositiveEntry, "entry (" + m.labels[i] + "," + m.labels[j] + ") must be positive");
      }
    }
    if (std::abs(m.entries[i][i] - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidMatrix, "diagonal entry for " + m.labels[i] + " is not 1");
    }
  }
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double product = m.entries[i][j] * m.entries[j][i];
      if (std::abs(product - 1.0) > kReciprocityTolerance) {
        warnings.push_back(m.labels[i] + "/" + m.labels[j] + " reciprocity off: a_ij*a_ji = " + fixed(product, 6));
      }
    }
  }
  return warnings;
}

std::vector<std::vector<double>> normalize(const ComparisonMatrix& m) {
  validate(m);
  const std::size_t n = m.size();
  std::vector<double> column_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) column_sum[j] += m.entries[i][j];
  }
  std::vector<std::vector<double>> out(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i][j] = m.entries[i][j] / column_sum[j];
  }
  return out;
}

PriorityVector priority_vector(const ComparisonMatrix& m) {
  const auto normalized = normalize(m);
  PriorityVector pv{m.labels, {}};
  pv.values.reserve(m.size());
  for (const auto& row : normalized) {
    double sum = 0.0;
    for (double v : row) sum += v;
    pv.values.push_back(sum / static_cast<double>(row.size()));
  }
  return pv;
}

std::vector<CostValuePoint> cost_value_points(const PriorityVector& value, const PriorityVector& cost) {
  if (value.labels.size() != value.values.size() || cost.labels.size() != cost.values.size()) {
    throw Error(ErrorCode::InvalidMatrix, "priority vector labels and values differ in length");
  }
  std::vector<std::string> a = value.labels;
  std::vector<std::string> b = cost.labels;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error(ErrorCode::LabelMismatch, "value and cost vectors cover different labels");

  struct Ranked {
    CostValuePoint point;
    double ratio;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < value.labels.size(); ++i) {
    const auto at = std::find(cost.labels.begin(), cost.labels.end(), value.labels[i]) - cost.labels.begin();
    const double c = cost.values[static_cast<std::size_t>(at)];
    const double v = value.values[i];
    if (!(c > 0.0)) throw Error(ErrorCode::NonpositiveEntry, "cost of " + value.labels[i] + " must be positive");
    ranked.push_back({{value.labels[i], 100.0 * c, 100.0 * v}, v / c});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
    if (x.ratio != y.ratio) return x.ratio > y.ratio;
    return x.point.label < y.point.label;
  });
  std::vector<CostValuePoint> out;
  for (auto& r : ranked) out.push_back(std::move(r.point));
  return out;
}

ComparisonMatrix parse_matrix_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!trim(line).empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::InvalidMatrix, "empty matrix file");

  ComparisonMatrix m;
  const auto header = split_cells(lines.front());
  for (std::size_t i = 1; i < header.size(); ++i) m.labels.emplace_back(header[i]);
  if (lines.size() - 1 != m.labels.size()) {
    throw Error(ErrorCode::InvalidMatrix, "expected one row per header label");
  }
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_cells(lines[r]);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::InvalidMatrix, "row " + std::to_string(r) + " has the wrong number of cells");
    }
    if (cells[0] != m.labels[r - 1]) {
      throw Error(ErrorCode::InvalidMatrix,
                  "row label '" + std::string(cells[0]) + "' does not match header '" + m.labels[r - 1] + "'");
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_cell(cells[c]));
    m.entries.push_back(std::move(row));
  }
  validate(m);
  return m;
}

ComparisonMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix_csv(buf.str());
}

std::string points_csv(const std::vector<CostValuePoint>& points) {
  std::string out = "label,cost_percent,value_percent\n";
  for (const CostValuePoint& p : points) {
    out += p.label + "," + fixed(p.cost_percent, 6) + "," + fixed(p.value_percent, 6) + "\n";
  }
  return out;
}

}  // namespace softbody::ahp
