#include "dsub/cli/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dsub::cli {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string checksum_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return std::string("fnv1a64:") + buf;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checksum_hex(ss.str());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string write_artifact(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
  return checksum_hex(content);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const metrics::EfficiencyReport& e) {
  return {{"d_eff", e.d_eff},
          {"a_eff", e.a_eff},
          {"gen_variance", e.gen_variance},
          {"log_gen_variance", e.log_gen_variance},
          {"log_det_q", e.log_det_q}};
}

Json to_json(const sim::Summary& s) {
  return {{"mean", s.mean}, {"q05", s.q05}, {"q50", s.q50}, {"q95", s.q95}};
}

Json summary_json(const std::vector<sim::MethodSummary>& summary) {
  Json out = Json::array();
  for (const auto& m : summary) {
    out.push_back({{"method", std::string(sim::to_string(m.method))},
                   {"ok", m.ok},
                   {"failed", m.failed},
                   {"mse_intercept", to_json(m.mse_intercept)},
                   {"mse_slopes", to_json(m.mse_slopes)},
                   {"d_eff", to_json(m.d_eff)},
                   {"a_eff", to_json(m.a_eff)},
                   {"log_gen_variance", to_json(m.log_gen_variance)}});
  }
  return out;
}

std::string records_csv(const std::vector<sim::ExperimentRecord>& records) {
  std::string out =
      "method,repetition,k,K,iterations,seed,ok,mse_intercept,mse_slopes,d_eff,a_eff,"
      "log_gen_variance,accepted_swaps,outliers_selected,error\n";
  for (const auto& r : records) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += std::string(sim::to_string(r.method)) + ',' + std::to_string(r.repetition) + ',' +
           std::to_string(r.k) + ',' + std::to_string(r.K) + ',' +
           std::to_string(r.iterations) + ',' + std::to_string(r.seed) + ',' +
           (r.ok ? "1" : "0") + ',' + format_double(r.mse.mse_intercept) + ',' +
           format_double(r.mse.mse_slopes) + ',' + format_double(r.efficiency.d_eff) + ',' +
           format_double(r.efficiency.a_eff) + ',' +
           format_double(r.efficiency.log_gen_variance) + ',' +
           std::to_string(r.accepted_swaps) + ',' + std::to_string(r.outliers_selected) + ',' +
           err + '\n';
  }
  return out;
}

std::string record_timings_csv(const std::vector<sim::ExperimentRecord>& records) {
  std::string out = "method,repetition,seconds\n";
  for (const auto& r : records) {
    out += std::string(sim::to_string(r.method)) + ',' + std::to_string(r.repetition) + ',' +
           format_double(r.seconds) + '\n';
  }
  return out;
}

std::string indices_text(const std::vector<Index>& indices) {
  std::string out;
  for (Index i : indices) out += std::to_string(i) + '\n';
  return out;
}

std::vector<Index> read_indices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Index> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + " is not a row index");
    }
    out.push_back(v);
  }
  return out;
}

std::string hull_svg(const HullPair& pair) {
  const auto& fv = pair.full.vertices;
  double xmin = fv.front().x, xmax = xmin, ymin = fv.front().y, ymax = ymin;
  for (const auto& q : fv) {
    xmin = std::min(xmin, q.x);
    xmax = std::max(xmax, q.x);
    ymin = std::min(ymin, q.y);
    ymax = std::max(ymax, q.y);
  }
  const double size = 400.0;
  const double margin = 20.0;
  const double sx = xmax > xmin ? (size - 2 * margin) / (xmax - xmin) : 1.0;
  const double sy = ymax > ymin ? (size - 2 * margin) / (ymax - ymin) : 1.0;
  auto px = [&](const metrics::Point2& q) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", margin + (q.x - xmin) * sx,
                  size - margin - (q.y - ymin) * sy);
    return std::string(buf);
  };
  auto polygon = [&](const std::vector<metrics::Point2>& v, const char* style) {
    std::string s = "  <polygon points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + px(v[i]);
    return s + "\" " + style + "/>\n";
  };
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" "
      "viewBox=\"0 0 400 400\">\n";
  svg += "  <title>" + pair.name_a + " vs " + pair.name_b + "</title>\n";
  svg += polygon(fv, "fill=\"#dddddd\" stroke=\"#555555\"");
  svg += polygon(pair.sub.vertices, "fill=\"none\" stroke=\"#cc2222\" stroke-width=\"2\"");
  for (const auto& q : pair.sub_points) {
    const std::string xy = px(q);
    const auto comma = xy.find(',');
    svg += "  <circle cx=\"" + xy.substr(0, comma) + "\" cy=\"" + xy.substr(comma + 1) +
           "\" r=\"2\" fill=\"#cc2222\"/>\n";
  }
  return svg + "</svg>\n";
}

}  // namespace dsub::cli
