#include "confound/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "confound/error.hpp"

namespace confound {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    cells.push_back(unquote(trim(line.substr(start, pos - start))));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string location(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

CsvTable parse_csv(const std::string& text, char delimiter) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  {
    std::string_view rest(text);
    std::size_t number = 0;
    while (!rest.empty()) {
      const auto pos = rest.find('\n');
      const std::string_view line = rest.substr(0, pos);
      ++number;
      if (!trim(line).empty()) lines.emplace_back(number, line);
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "file contains no rows");

  CsvTable table;
  const auto first = split(lines.front().second, delimiter);
  table.has_header = std::any_of(first.begin(), first.end(),
                                 [](std::string_view c) { return !parse_number(c); });
  const std::size_t columns = first.size();
  if (table.has_header) {
    for (auto cell : first) table.names.emplace_back(cell);
  } else {
    for (std::size_t j = 0; j < columns; ++j) table.names.push_back("col" + std::to_string(j));
  }

  const std::size_t begin = table.has_header ? 1 : 0;
  const auto rows = static_cast<Eigen::Index>(lines.size() - begin);
  table.values.resize(rows, static_cast<Eigen::Index>(columns));
  for (std::size_t i = begin; i < lines.size(); ++i) {
    const auto& [number, line] = lines[i];
    const auto cells = split(line, delimiter);
    if (cells.size() != columns)
      throw Error(ErrorCode::ParseError, location(number, std::min(cells.size(), columns) + 1) + ": expected " +
                                             std::to_string(columns) + " cells, found " +
                                             std::to_string(cells.size()));
    for (std::size_t j = 0; j < columns; ++j) {
      const auto value = parse_number(cells[j]);
      if (!value)
        throw Error(ErrorCode::NonNumeric, location(number, j + 1) + ": '" +
                                               std::string(cells[j]) + "' is not a number");
      table.values(static_cast<Eigen::Index>(i - begin), static_cast<Eigen::Index>(j)) = *value;
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), delimiter);
}

ColumnRef parse_column_ref(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
        return c >= '0' && c <= '9';
      })) {
    std::size_t index = 0;
    std::from_chars(text.data(), text.data() + text.size(), index);
    return index;
  }
  return text;
}

std::size_t resolve_column(const CsvTable& table, const ColumnRef& ref) {
  if (const auto* name = std::get_if<std::string>(&ref)) {
    const auto it = std::find(table.names.begin(), table.names.end(), *name);
    if (!table.has_header || it == table.names.end())
      throw Error(ErrorCode::MissingColumn, "no column named '" + *name + "'");
    return static_cast<std::size_t>(it - table.names.begin());
  }
  const std::size_t index = std::get<std::size_t>(ref);
  // A purely numeric header name takes precedence over the position.
  if (table.has_header) {
    const auto it = std::find(table.names.begin(), table.names.end(), std::to_string(index));
    if (it != table.names.end()) return static_cast<std::size_t>(it - table.names.begin());
  }
  if (index >= table.names.size())
    throw Error(ErrorCode::MissingColumn, "column index " + std::to_string(index) +
                                              " out of range for " +
                                              std::to_string(table.names.size()) + " columns");
  return index;
}

DataMatrix split_target(const CsvTable& table, std::size_t target, bool normalize) {
  const Eigen::Index cols = table.values.cols();
  const Eigen::Index rows = table.values.rows();
  if (static_cast<Eigen::Index>(target) >= cols)
    throw Error(ErrorCode::MissingColumn, "target column out of range");
  if (cols < 2)
    throw Error(ErrorCode::BadDimensions, "need a target and at least one predictor column");

  Eigen::MatrixXd x(rows, cols - 1);
  std::vector<std::string> names;
  Eigen::Index out = 0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (j == static_cast<Eigen::Index>(target)) continue;
    x.col(out) = table.values.col(j);
    names.push_back(table.names[static_cast<std::size_t>(j)]);
    if (normalize) {
      const double mean = x.col(out).mean();
      const double sd = std::sqrt((x.col(out).array() - mean).square().mean());
      if (!(sd > 0.0))
        throw Error(ErrorCode::ConstantColumn,
                    "column '" + names.back() + "' has zero variance");
      x.col(out) /= sd;
    }
    ++out;
  }
  Eigen::VectorXd y = table.values.col(static_cast<Eigen::Index>(target));
  return DataMatrix(std::move(x), std::move(y), std::move(names));
}

DataMatrix ingest_csv(const std::filesystem::path& path, const ColumnRef& target, bool normalize,
                      char delimiter) {
  const CsvTable table = read_csv(path, delimiter);
  return split_target(table, resolve_column(table, target), normalize);
}

}  // namespace confound
