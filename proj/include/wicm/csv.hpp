#pragma once

#include "wicm/model.hpp"

#include <string>
#include <vector>

namespace wicm {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Splits a comma-separated line; no quoting is recognized.
std::vector<std::string> split_csv_line(const std::string& line);

struct NamedDataset {
  Dataset data;
  std::vector<std::string> predictor_names;
  std::string response_name;
};

/// Reads a header-first CSV. Every column except `response_column` becomes a
/// predictor in header order. Cells must be finite decimal numbers.
/// Throws MissingColumn, NonNumericCell (with row and column) or EmptyFile.
NamedDataset ingest_csv(const std::string& path, const std::string& response_column);
NamedDataset parse_csv_text(const std::string& text, const std::string& response_column);

/// Writes predictors then the response, with a header row.
std::string to_csv_text(const Dataset& data, const std::vector<std::string>& predictor_names,
                        const std::string& response_name);
void write_csv(const std::string& path, const Dataset& data,
               const std::vector<std::string>& predictor_names, const std::string& response_name);

/// Default predictor names x1..xd.
std::vector<std::string> default_predictor_names(Index d);

}  // namespace wicm
