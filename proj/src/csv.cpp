#include "wicm/csv.hpp"

#include "wicm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wicm {

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_finite(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

}  // namespace

NamedDataset parse_csv_text(const std::string& text, const std::string& response_column) {
  std::istringstream stream(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(stream, line)) {
    if (!trim(line).empty()) {
      for (const auto& name : split_csv_line(line)) header.push_back(trim(name));
      break;
    }
  }
  if (header.empty()) throw Error(ErrorKind::EmptyFile, "no header row");

  Index response_index = -1;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == response_column) response_index = static_cast<Index>(k);
  }
  if (response_index < 0) {
    throw Error(ErrorKind::MissingColumn, "response column '" + response_column + "' not in header");
  }
  if (header.size() < 2) throw Error(ErrorKind::MissingColumn, "no predictor columns");

  std::vector<std::vector<double>> rows;
  std::size_t line_number = 1;
  while (std::getline(stream, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const std::size_t row_number = rows.size() + 1;
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::NonNumericCell,
                  "row " + std::to_string(row_number) + " (line " + std::to_string(line_number) +
                      ") has " + std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!parse_finite(trim(cells[k]), values[k])) {
        throw Error(ErrorKind::NonNumericCell,
                    "row " + std::to_string(row_number) + " (line " + std::to_string(line_number) +
                        "), column '" + header[k] + "': '" + cells[k] + "' is not a finite number");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyFile, "no data rows");

  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(header.size()) - 1;
  MatrixXd X(n, d);
  VectorXd y(n);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (static_cast<Index>(k) != response_index) names.push_back(header[k]);
  }
  for (Index i = 0; i < n; ++i) {
    Index col = 0;
    for (Index k = 0; k <= d; ++k) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      if (k == response_index) {
        y(i) = v;
      } else {
        X(i, col++) = v;
      }
    }
  }
  return NamedDataset{Dataset(std::move(X), std::move(y)), std::move(names), response_column};
}

NamedDataset ingest_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::EmptyFile, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv_text(buffer.str(), response_column);
}

std::string to_csv_text(const Dataset& data, const std::vector<std::string>& predictor_names,
                        const std::string& response_name) {
  if (static_cast<Index>(predictor_names.size()) != data.d()) {
    throw Error(ErrorKind::InvalidArgument, "predictor name count does not match d");
  }
  std::string out;
  for (const auto& name : predictor_names) out += name + ",";
  out += response_name + "\n";
  for (Index i = 0; i < data.n(); ++i) {
    for (Index k = 0; k < data.d(); ++k) out += format_number(data.X()(i, k)) + ",";
    out += format_number(data.y()(i)) + "\n";
  }
  return out;
}

void write_csv(const std::string& path, const Dataset& data,
               const std::vector<std::string>& predictor_names, const std::string& response_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << to_csv_text(data, predictor_names, response_name);
}

std::vector<std::string> default_predictor_names(Index d) {
  std::vector<std::string> names;
  for (Index k = 1; k <= d; ++k) names.push_back("x" + std::to_string(k));
  return names;
}

}  // namespace wicm
