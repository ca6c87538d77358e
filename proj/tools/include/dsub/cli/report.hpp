#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dsub/cli/config.hpp"
#include "dsub/exchange.hpp"
#include "dsub/metrics.hpp"
#include "dsub/sim.hpp"

namespace dsub::cli {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string checksum_hex(std::string_view bytes);
std::string file_checksum(const std::filesystem::path& path);

/// Shortest round-trip text for a double.
std::string format_double(double v);

/// Writes `content` and returns its checksum.
std::string write_artifact(const std::filesystem::path& path, const std::string& content);

std::string dump(const Json& j);

Json to_json(const metrics::EfficiencyReport& e);
Json to_json(const sim::Summary& s);
Json summary_json(const std::vector<sim::MethodSummary>& summary);

/// One row per record: keys, status, scores. No wall-clock fields.
std::string records_csv(const std::vector<sim::ExperimentRecord>& records);
/// (method, repetition, seconds) per record.
std::string record_timings_csv(const std::vector<sim::ExperimentRecord>& records);

std::string indices_text(const std::vector<Index>& indices);
std::vector<Index> read_indices(const std::filesystem::path& path);

struct HullPair {
  Index a = 0;
  Index b = 0;
  std::string name_a;
  std::string name_b;
  metrics::Hull2d full;
  metrics::Hull2d sub;
  std::vector<metrics::Point2> sub_points;
};

std::string hull_svg(const HullPair& pair);

}  // namespace dsub::cli
