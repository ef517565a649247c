#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace softbody::ahp {

struct ComparisonMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> entries;  // row-major, n x n

  std::size_t size() const { return labels.size(); }
};

struct PriorityVector {
  std::vector<std::string> labels;
  std::vector<double> values;
};

struct CostValuePoint {
  std::string label;
  double cost_percent = 0.0;
  double value_percent = 0.0;
};

inline constexpr double kReciprocityTolerance = 0.05;

/// Structural checks: square, n >= 2, unique labels, unit diagonal (InvalidMatrix)
/// and positive finite entries (NonpositiveEntry). Returns one warning per pair
/// whose reciprocity is off by more than the tolerance.
std::vector<std::string> validate(const ComparisonMatrix& m);

/// Each column divided by its sum.
std::vector<std::vector<double>> normalize(const ComparisonMatrix& m);

/// Row means of the normalized matrix.
PriorityVector priority_vector(const ComparisonMatrix& m);

/// Ordered by value/cost ratio descending, then label ascending.
std::vector<CostValuePoint> cost_value_points(const PriorityVector& value, const PriorityVector& cost);

/// Header row: a corner cell then the labels; one row per label in the same
/// order. Cells may be decimals or fractions like "1/3".
ComparisonMatrix parse_matrix_csv(std::string_view text);
ComparisonMatrix read_matrix_csv(const std::filesystem::path& path);

std::string points_csv(const std::vector<CostValuePoint>& points);

}  // namespace softbody::ahp
