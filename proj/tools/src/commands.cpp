#include "dsub/cli/commands.hpp"

#include <chrono>
#include <map>
#include <optional>

#include "dsub/cli/report.hpp"
#include "dsub/exchange.hpp"
#include "dsub/metrics.hpp"
#include "dsub/seeding.hpp"

#ifndef DSUB_VERSION
#define DSUB_VERSION "0.0.0"
#endif

namespace dsub::cli {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Artifacts {
  fs::path dir;
  Json outputs = Json::object();
  Json inputs = Json::object();

  void write(const std::string& name, const std::string& content) {
    outputs[name] = write_artifact(dir / name, content);
  }
  /// Sidecars carry wall-clock data; they are written but not checksummed.
  void sidecar(const std::string& name, const std::string& content) {
    write_artifact(dir / name, content);
  }
  void input(const fs::path& path) { inputs[path.string()] = file_checksum(path); }
};

template <class T>
T field(const Json& spec, const char* key) {
  if (!spec.contains(key)) throw sim::ConfigError(key, "missing");
  try {
    return spec.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw sim::ConfigError(key, "wrong type");
  }
}

Selection seed_selection(const DataMatrix& data, sim::Method method, Index k,
                         std::uint64_t seed) {
  switch (method) {
    case sim::Method::uniform: return seeding::uniform_seed(data, k, seed);
    case sim::Method::iboss: return seeding::iboss_seed(data, k);
    case sim::Method::oss: return seeding::oss_seed(data, k);
    default: throw sim::ConfigError("seed_method", "must be uniform, iboss or oss");
  }
}

metrics::EfficiencyReport scaled_efficiency(const DataMatrix& data, const Selection& sel) {
  try {
    return metrics::efficiency(seeding::scale_to_unit_cube(data).first, sel);
  } catch (const std::invalid_argument&) {
    return metrics::efficiency(data, sel);
  }
}

Json records_json(const std::vector<sim::ExperimentRecord>& records) {
  Json out = Json::array();
  for (const auto& r : records) {
    Json j{{"method", std::string(sim::to_string(r.method))},
           {"repetition", r.repetition},
           {"k", r.k},
           {"K", r.K},
           {"iterations", r.iterations},
           {"seed", r.seed},
           {"ok", r.ok},
           {"error", r.error},
           {"mse_intercept", r.mse.mse_intercept},
           {"mse_slopes", r.mse.mse_slopes},
           {"efficiency", to_json(r.efficiency)},
           {"accepted_swaps", r.accepted_swaps},
           {"outliers_selected", r.outliers_selected}};
    if (!r.selection.empty()) j["selection"] = r.selection;
    out.push_back(std::move(j));
  }
  return out;
}

bool all_ok(const std::vector<sim::ExperimentRecord>& records) {
  for (const auto& r : records) {
    if (!r.ok) return false;
  }
  return true;
}

CommandOutcome run_select(const Json& spec, Artifacts& art) {
  const auto t0 = Clock::now();
  const IngestSpec in_spec = ingest_spec(spec.at("input"));
  art.input(in_spec.path);
  const IngestResult in = ingest(in_spec);
  const double t_ingest = since(t0);

  const sim::Method method = method_from_name(field<std::string>(spec, "method"), "method");
  const auto k = field<Index>(spec, "k");
  const auto K = field<Index>(spec, "K");
  const int iterations = field<int>(spec, "iterations");
  const bool early_stop = field<bool>(spec, "early_stop");
  const sim::Method seed_method =
      method_from_name(field<std::string>(spec, "seed_method"), "seed_method");
  const auto seed = field<std::uint64_t>(spec, "seed");

  const auto t1 = Clock::now();
  Selection sel;
  std::optional<exchange::ExchangeResult> ex;
  if (method == sim::Method::alg1 || method == sim::Method::valg1) {
    const Selection start = seed_selection(in.data, seed_method, k, seed);
    ex = method == sim::Method::alg1
             ? exchange::alg1(in.data, start, K, {iterations, early_stop})
             : exchange::valg1(in.data, start, K);
    sel = ex->selection;
  } else {
    sel = seed_selection(in.data, method, k, seed);
  }
  const double t_select = since(t1);

  Json report;
  report["command"] = "select";
  report["method"] = std::string(sim::to_string(method));
  report["n"] = in.data.n();
  report["p"] = in.data.p();
  report["rows_read"] = in.rows_read;
  report["rows_rejected"] = in.rows_rejected;
  report["covariates"] = in.covariate_names;
  report["k"] = k;
  report["efficiency_scale"] = "unit_cube";
  report["efficiency"] = to_json(scaled_efficiency(in.data, sel));
  if (ex) {
    const auto& tr = ex->trace;
    report["exchange"] = {{"seed_method", std::string(sim::to_string(seed_method))},
                          {"K", K},
                          {"pool_size", ex->pool.size()},
                          {"iterations_run", tr.iterations_run},
                          {"accepted_swaps", tr.accepted_swaps},
                          {"initial_log_gen_variance", tr.initial_log_v},
                          {"final_log_gen_variance", tr.final_log_v},
                          {"commits_per_iteration", tr.commits_per_iteration},
                          {"log_gen_variance_per_iteration", tr.log_v_per_iteration}};
  } else {
    report["exchange"] = nullptr;
  }
  art.write("indices.txt", indices_text(sel.indices));
  art.write("report.json", dump(report));

  std::string timings = "phase,seconds\ningest," + format_double(t_ingest) + "\nselect," +
                        format_double(t_select) + "\n";
  if (ex) {
    for (std::size_t i = 0; i < ex->trace.seconds_per_iteration.size(); ++i) {
      timings += "iteration_" + std::to_string(i + 1) + "_cumulative," +
                 format_double(ex->trace.seconds_per_iteration[i]) + "\n";
    }
  }
  art.sidecar("timings.csv", timings);

  CommandOutcome out;
  out.manifest["seeds"] = {{"seed", seed}};
  out.manifest["timings"] = {{"ingest_seconds", t_ingest}, {"select_seconds", t_select}};
  return out;
}

CommandOutcome write_batch(const char* command, const Json& config_json,
                           const sim::ExperimentReport& rep, Artifacts& art,
                           std::uint64_t rng_seed, double seconds) {
  Json report;
  report["command"] = command;
  report["config"] = config_json;
  report["summary"] = summary_json(rep.summary);
  report["records"] = records_json(rep.records);
  art.write("report.json", dump(report));
  art.write("records.csv", records_csv(rep.records));
  art.sidecar("timings.csv", record_timings_csv(rep.records));
  CommandOutcome out;
  out.batch_ok = all_ok(rep.records);
  out.manifest["seeds"] = {{"rng_seed", rng_seed}, {"per_repetition", "rng_seed + repetition"}};
  out.manifest["timings"] = {{"wall_seconds", seconds}};
  return out;
}

CommandOutcome run_simulate(const Json& spec, Artifacts& art) {
  const sim::ExperimentConfig cfg = experiment_config(spec.at("config"));
  const auto t0 = Clock::now();
  const auto rep = sim::run_experiment(cfg);
  return write_batch("simulate", to_json(cfg), rep, art, cfg.rng_seed, since(t0));
}

CommandOutcome run_bootstrap(const Json& spec, Artifacts& art) {
  const IngestSpec in_spec = ingest_spec(spec.at("input"));
  art.input(in_spec.path);
  const IngestResult in = ingest(in_spec);
  if (!in.data.has_response()) throw sim::ConfigError("input.response", "bootstrap needs a response column");
  const sim::BootstrapConfig cfg = bootstrap_config(spec.at("config"));
  sim::validate(cfg, in.data);
  const auto t0 = Clock::now();
  const auto rep = sim::bootstrap_mse(in.data, cfg);
  return write_batch("bootstrap", to_json(cfg), rep, art, cfg.rng_seed, since(t0));
}

CommandOutcome run_timing(const Json& spec, Artifacts& art) {
  const sim::TimingConfig cfg = timing_config(spec.at("config"));
  const auto t0 = Clock::now();
  const auto rows = sim::timing_study(cfg);
  const double wall = since(t0);

  Json report;
  report["command"] = "timing";
  report["config"] = to_json(cfg);
  Json jr = Json::array();
  std::string timings = "k,K,iterations,algorithm,mean_seconds\n";
  std::map<std::pair<Index, Index>, std::pair<std::vector<double>, std::vector<double>>> cells;
  for (const auto& r : rows) {
    jr.push_back({{"k", r.k},
                  {"K", r.K},
                  {"iterations", r.iterations},
                  {"algorithm", std::string(sim::to_string(r.algorithm))},
                  {"mean_pct_gv_increase", r.mean_pct_gv_increase}});
    timings += std::to_string(r.k) + ',' + std::to_string(r.K) + ',' +
               std::to_string(r.iterations) + ',' + std::string(sim::to_string(r.algorithm)) +
               ',' + format_double(r.mean_seconds) + '\n';
    if (r.algorithm == sim::Method::alg1) {
      auto& cell = cells[{r.k, r.K}];
      cell.first.push_back(r.iterations);
      cell.second.push_back(r.mean_seconds);
    }
  }
  report["rows"] = jr;
  art.write("report.json", dump(report));
  art.sidecar("timings.csv", timings);

  Json r2 = Json::array();
  for (const auto& [key, xy] : cells) {
    if (xy.first.size() < 2) continue;
    r2.push_back({{"k", key.first},
                  {"K", key.second},
                  {"r2_seconds_vs_iterations", sim::linear_fit_r2(xy.first, xy.second)}});
  }
  CommandOutcome out;
  out.manifest["seeds"] = {{"rng_seed", cfg.rng_seed}, {"per_repetition", "rng_seed + repetition"}};
  out.manifest["timings"] = {{"wall_seconds", wall}, {"linear_fit", r2}};
  return out;
}

Index resolve_covariate(const Json& id, const std::vector<std::string>& names) {
  if (id.is_number_integer()) {
    const auto pos = id.get<Index>();
    if (pos >= 1 && pos <= static_cast<Index>(names.size())) return pos - 1;
  } else if (id.is_string()) {
    const auto s = id.get<std::string>();
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == s) return static_cast<Index>(j);
    }
  }
  throw sim::ConfigError("pairs", "no covariate " + id.dump());
}

CommandOutcome run_hull(const Json& spec, Artifacts& art) {
  const IngestSpec in_spec = ingest_spec(spec.at("input"));
  art.input(in_spec.path);
  const IngestResult in = ingest(in_spec);
  const fs::path sel_path = field<std::string>(spec, "selection");
  art.input(sel_path);
  const Selection sel{read_indices(sel_path), SelectionSource::custom};
  validate_selection(sel, in.data.n());
  const bool svg = field<bool>(spec, "svg");
  if (!spec.contains("pairs") || !spec.at("pairs").is_array() || spec.at("pairs").empty()) {
    throw sim::ConfigError("pairs", "at least one covariate pair is required");
  }

  Json report;
  report["command"] = "hull";
  report["k"] = sel.size();
  report["n"] = in.data.n();
  Json pairs = Json::array();
  for (const auto& pj : spec.at("pairs")) {
    if (!pj.is_array() || pj.size() != 2) throw sim::ConfigError("pairs", "each pair needs two columns");
    HullPair hp;
    hp.a = resolve_covariate(pj[0], in.covariate_names);
    hp.b = resolve_covariate(pj[1], in.covariate_names);
    if (hp.a == hp.b) throw sim::ConfigError("pairs", "a pair needs two distinct columns");
    hp.name_a = in.covariate_names[static_cast<std::size_t>(hp.a)];
    hp.name_b = in.covariate_names[static_cast<std::size_t>(hp.b)];
    std::vector<metrics::Point2> all(static_cast<std::size_t>(in.data.n()));
    for (Index i = 0; i < in.data.n(); ++i) {
      all[static_cast<std::size_t>(i)] = {in.data.x(i, hp.a), in.data.x(i, hp.b)};
    }
    for (Index i : sel.indices) hp.sub_points.push_back(all[static_cast<std::size_t>(i)]);
    hp.full = metrics::hull_2d(all);
    hp.sub = metrics::hull_2d(hp.sub_points);
    auto poly = [](const metrics::Hull2d& h) {
      Json v = Json::array();
      for (const auto& q : h.vertices) v.push_back({q.x, q.y});
      return Json{{"vertices", v}, {"area", h.area}};
    };
    pairs.push_back({{"columns", {hp.a + 1, hp.b + 1}},
                     {"names", {hp.name_a, hp.name_b}},
                     {"full", poly(hp.full)},
                     {"subdata", poly(hp.sub)},
                     {"area_ratio", hp.full.area > 0 ? hp.sub.area / hp.full.area : 1.0}});
    if (svg) {
      art.write("hull_" + std::to_string(hp.a + 1) + "_" + std::to_string(hp.b + 1) + ".svg",
                hull_svg(hp));
    }
  }
  report["pairs"] = pairs;
  art.write("hull.json", dump(report));
  return {};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SingularMatrixError*>(&e) || dynamic_cast<const DowndateError*>(&e)) {
    return exit_numerical;
  }
  if (dynamic_cast<const IngestError*>(&e) || dynamic_cast<const sim::ConfigError*>(&e)) {
    return exit_input;
  }
  if (dynamic_cast<const std::invalid_argument*>(&e)) return exit_usage;
  return exit_other;
}

Json to_json(const IngestSpec& s) {
  Json j;
  j["path"] = fs::absolute(s.path).lexically_normal().string();
  j["delimiter"] = std::string(1, s.delimiter);
  j["header"] = s.header;
  j["response"] = s.response ? Json(*s.response) : Json(nullptr);
  j["covariates"] = s.covariates;
  j["skip_rows"] = s.skip_rows;
  j["log_columns"] = s.log_columns;
  return j;
}

IngestSpec ingest_spec(const Json& j) {
  IngestSpec s;
  s.path = field<std::string>(j, "path");
  const auto delim = field<std::string>(j, "delimiter");
  if (delim.size() != 1) throw sim::ConfigError("delimiter", "must be a single character");
  s.delimiter = delim[0];
  s.header = field<bool>(j, "header");
  if (j.contains("response") && !j.at("response").is_null()) {
    s.response = field<std::string>(j, "response");
  }
  s.covariates = field<std::vector<std::string>>(j, "covariates");
  s.skip_rows = field<Index>(j, "skip_rows");
  s.log_columns = field<std::vector<std::string>>(j, "log_columns");
  return s;
}

CommandOutcome run_command(const Json& spec, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  Artifacts art{out_dir};
  const auto command = field<std::string>(spec, "command");
  const auto t0 = Clock::now();
  CommandOutcome out;
  if (command == "select") {
    out = run_select(spec, art);
  } else if (command == "simulate") {
    out = run_simulate(spec, art);
  } else if (command == "bootstrap") {
    out = run_bootstrap(spec, art);
  } else if (command == "timing") {
    out = run_timing(spec, art);
  } else if (command == "hull") {
    out = run_hull(spec, art);
  } else {
    throw sim::ConfigError("command", "unknown command '" + command + "'");
  }
  if (!out.manifest.is_object()) out.manifest = Json::object();
  Json m;
  m["tool"] = "dsub";
  m["version"] = DSUB_VERSION;
  m["spec"] = spec;
  m["seeds"] = out.manifest.value("seeds", Json::object());
  m["inputs"] = art.inputs;
  m["outputs"] = art.outputs;
  Json timings = out.manifest.value("timings", Json::object());
  timings["total_seconds"] = since(t0);
  m["timings"] = timings;
  m["batch_ok"] = out.batch_ok;
  write_artifact(out_dir / "manifest.json", dump(m));
  out.manifest = std::move(m);
  return out;
}

ReplayOutcome replay(const fs::path& manifest_path, const fs::path& out_dir) {
  const Json m = load_json(manifest_path);
  if (!m.contains("spec") || !m.contains("outputs")) {
    throw sim::ConfigError("<manifest>", "not a dsub manifest");
  }
  if (m.contains("inputs")) {
    for (const auto& [path, sum] : m.at("inputs").items()) {
      std::string now;
      try {
        now = file_checksum(path);
      } catch (const Error& e) {
        throw IngestError(e.what());
      }
      if (now != sum.get<std::string>()) {
        throw IngestError(path + ": checksum differs from the manifest");
      }
    }
  }
  ReplayOutcome res;
  res.run = run_command(m.at("spec"), out_dir);
  const Json& want = m.at("outputs");
  const Json& got = res.run.manifest.at("outputs");
  for (const auto& [name, sum] : want.items()) {
    if (!got.contains(name) || got.at(name) != sum) res.mismatched.push_back(name);
  }
  for (const auto& [name, sum] : got.items()) {
    if (!want.contains(name)) res.mismatched.push_back(name);
  }
  res.identical = res.mismatched.empty();
  return res;
}

}  // namespace dsub::cli
