#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsub/types.hpp"

namespace dsub::cli {

/// Columns are named by header text, or by 1-based position when no header
/// column carries that exact name.
struct IngestSpec {
  std::filesystem::path path;
  char delimiter = ',';
  bool header = true;
  std::optional<std::string> response;
  /// Empty means every column except the response.
  std::vector<std::string> covariates;
  /// Data rows (after the header) dropped from the top of the file.
  Index skip_rows = 0;
  /// Columns replaced by their natural log; non-positive values reject the
  /// row. "*" stands for every covariate column.
  std::vector<std::string> log_columns;
};

struct IngestResult {
  DataMatrix data;
  std::vector<std::string> covariate_names;
  std::optional<std::string> response_name;
  Index rows_read = 0;
  /// Rows with an empty/NA cell or a non-positive value under a log transform.
  Index rows_rejected = 0;
  /// Original 0-based data-row number of every kept row.
  std::vector<Index> source_rows;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

IngestResult ingest(const IngestSpec& spec);

/// Comma-separated list, trimmed; empty input gives an empty list.
std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace dsub::cli
