#pragma once

// Numeric CSV ingestion. A single optional header row is detected
// automatically: the first row counts as a header when any of its cells is
// not a number. Decimal point is '.', independent of the global locale.

#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "confound/spectral.hpp"

namespace confound {

struct CsvTable {
  // Header names, or "col0", "col1", ... when the file has no header.
  std::vector<std::string> names;
  bool has_header = false;
  // rows x columns.
  Eigen::MatrixXd values;
};

CsvTable parse_csv(const std::string& text, char delimiter = ',');
CsvTable read_csv(const std::filesystem::path& path, char delimiter = ',');

// Column chosen by header name or zero-based position.
using ColumnRef = std::variant<std::string, std::size_t>;

// Interprets a command-line target: an exact header name wins, otherwise an
// all-digit string is taken as a zero-based index.
ColumnRef parse_column_ref(const std::string& text);

std::size_t resolve_column(const CsvTable& table, const ColumnRef& ref);

// The chosen column becomes y and the rest X, in file order. With normalize,
// every predictor column is divided by its standard deviation (1/n form).
DataMatrix split_target(const CsvTable& table, std::size_t target, bool normalize);

DataMatrix ingest_csv(const std::filesystem::path& path, const ColumnRef& target, bool normalize,
                      char delimiter = ',');

}  // namespace confound
