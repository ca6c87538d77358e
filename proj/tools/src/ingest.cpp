#include "dsub/cli/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

namespace dsub::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "?";
}

std::size_t resolve(const std::string& id, const std::vector<std::string>& names) {
  const auto it = std::find(names.begin(), names.end(), id);
  if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  std::size_t pos = 0;
  const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), pos);
  if (ec == std::errc() && ptr == id.data() + id.size() && pos >= 1 && pos <= names.size()) {
    return pos - 1;
  }
  throw IngestError("column '" + id + "' not found");
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  for (std::string_view f : split_fields(text, sep)) out.emplace_back(f);
  return out;
}

IngestResult ingest(const IngestSpec& spec) {
  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + spec.path.string());
  if (spec.skip_rows < 0) throw IngestError("skip_rows must be non-negative");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw IngestError(spec.path.string() + ": empty file");
  const auto first = split_fields(line, spec.delimiter);
  bool pending_first = false;
  if (spec.header) {
    for (auto f : first) names.push_back(unquote(f));
  } else {
    for (std::size_t j = 0; j < first.size(); ++j) names.push_back(std::to_string(j + 1));
    pending_first = true;
  }
  const std::size_t width = names.size();

  std::optional<std::size_t> response_col;
  if (spec.response) response_col = resolve(*spec.response, names);
  std::vector<std::size_t> cov_cols;
  if (spec.covariates.empty()) {
    for (std::size_t j = 0; j < width; ++j) {
      if (!response_col || j != *response_col) cov_cols.push_back(j);
    }
  } else {
    for (const auto& c : spec.covariates) cov_cols.push_back(resolve(c, names));
  }
  if (cov_cols.empty()) throw IngestError("no covariate columns selected");
  for (std::size_t j : cov_cols) {
    if (response_col && j == *response_col) {
      throw IngestError("response column '" + names[j] + "' is also a covariate");
    }
    if (std::count(cov_cols.begin(), cov_cols.end(), j) > 1) {
      throw IngestError("covariate column '" + names[j] + "' listed twice");
    }
  }
  std::vector<char> log_flag(width, 0);
  for (const auto& c : spec.log_columns) {
    if (c == "*") {
      for (std::size_t j : cov_cols) log_flag[j] = 1;
    } else {
      log_flag[resolve(c, names)] = 1;
    }
  }

  IngestResult res;
  for (std::size_t j : cov_cols) res.covariate_names.push_back(names[j]);
  if (response_col) res.response_name = names[*response_col];

  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> row(width);
  std::vector<char> missing(width);
  Index data_row = -1;
  while (pending_first || next_line()) {
    pending_first = false;
    ++data_row;
    if (data_row < spec.skip_rows) continue;
    const auto fields = split_fields(line, spec.delimiter);
    if (fields.size() != width) {
      throw IngestError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " fields, found " +
                        std::to_string(fields.size()));
    }
    ++res.rows_read;
    bool reject = false;
    auto parse = [&](std::size_t j) {
      const std::string_view cell = fields[j];
      if (is_missing(cell)) {
        reject = true;
        return;
      }
      double v = 0.0;
      const char* b = cell.data();
      const char* e = cell.data() + cell.size();
      if (*b == '+') ++b;
      const auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
        throw IngestError("line " + std::to_string(line_no) + ", column '" + names[j] +
                          "': non-numeric value '" + std::string(cell) + "'");
      }
      if (log_flag[j]) {
        if (!(v > 0.0)) {
          reject = true;
          return;
        }
        v = std::log(v);
      }
      row[j] = v;
    };
    for (std::size_t j : cov_cols) parse(j);
    if (response_col) parse(*response_col);
    if (reject) {
      ++res.rows_rejected;
      continue;
    }
    for (std::size_t j : cov_cols) xs.push_back(row[j]);
    if (response_col) ys.push_back(row[*response_col]);
    res.source_rows.push_back(data_row);
  }
  if (res.rows_read == 0) throw IngestError(spec.path.string() + ": no data rows");
  if (res.source_rows.empty()) throw IngestError(spec.path.string() + ": every row was rejected");

  const auto n = static_cast<Index>(res.source_rows.size());
  const auto p = static_cast<Index>(cov_cols.size());
  res.data.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(xs.data(), n, p);
  if (response_col) res.data.y = Eigen::Map<const Vector>(ys.data(), n);
  return res;
}

}  // namespace dsub::cli
