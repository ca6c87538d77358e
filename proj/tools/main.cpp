#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dsub/cli/commands.hpp"
#include "dsub/cli/report.hpp"

namespace fs = std::filesystem;
using namespace dsub;
using cli::Json;

namespace {

struct IngestFlags {
  std::string input;
  std::string delimiter = ",";
  bool no_header = false;
  std::string response;
  std::vector<std::string> columns;
  Index skip_rows = 0;
  std::vector<std::string> log_columns;
  bool log_all = false;

  void attach(CLI::App* app, bool need_response) {
    app->add_option("-i,--input", input, "delimiter-separated data file")->required();
    app->add_option("--delimiter", delimiter, "field separator")->capture_default_str();
    app->add_flag("--no-header", no_header, "first line is data; columns are 1-based positions");
    auto* r = app->add_option("--response", response, "response column (name or position)");
    if (need_response) r->required();
    app->add_option("--columns", columns, "covariate columns (default: all but the response)")
        ->delimiter(',');
    app->add_option("--skip-rows", skip_rows, "data rows dropped from the top")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--log-columns", log_columns, "columns to log-transform")->delimiter(',');
    app->add_flag("--log", log_all, "log-transform every covariate");
  }

  Json spec() const {
    cli::IngestSpec s;
    s.path = input;
    if (delimiter == "\\t" || delimiter == "tab") {
      s.delimiter = '\t';
    } else if (delimiter.size() == 1) {
      s.delimiter = delimiter[0];
    } else {
      throw std::invalid_argument("--delimiter must be one character");
    }
    s.header = !no_header;
    if (!response.empty()) s.response = response;
    s.covariates = columns;
    s.skip_rows = skip_rows;
    s.log_columns = log_columns;
    if (log_all) s.log_columns.push_back("*");
    return cli::to_json(s);
  }
};

std::string absolute(const std::string& path) {
  return fs::absolute(path).lexically_normal().string();
}

void print_batch(const Json& report) {
  std::printf("%-8s %4s %4s %12s %12s %9s %9s\n", "method", "ok", "fail", "mse_slopes",
              "mse_icept", "d_eff", "a_eff");
  for (const auto& m : report.at("summary")) {
    std::printf("%-8s %4d %4d %12.5g %12.5g %9.4f %9.4f\n",
                m.at("method").get<std::string>().c_str(), m.at("ok").get<int>(),
                m.at("failed").get<int>(), m.at("mse_slopes").at("mean").get<double>(),
                m.at("mse_intercept").at("mean").get<double>(),
                m.at("d_eff").at("mean").get<double>(), m.at("a_eff").at("mean").get<double>());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsub: subdata selection for linear regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DSUB_VERSION);
  std::string out_dir = "dsub-out";
  const std::vector<std::string> method_names{"uniform", "iboss", "oss", "alg1", "valg1"};
  const std::vector<std::string> seed_names{"uniform", "iboss", "oss"};

  auto* select = app.add_subcommand("select", "select k rows from a dataset");
  IngestFlags select_in;
  select_in.attach(select, false);
  std::string method;
  Index k = 0;
  Index K = 10;
  int iterations = 5;
  bool early_stop = false;
  std::string seed_method = "oss";
  std::uint64_t seed = 20240501;
  select->add_option("-m,--method", method, "selection method")
      ->required()
      ->check(CLI::IsMember(method_names));
  select->add_option("-k", k, "subdata size")->required()->check(CLI::PositiveNumber);
  select->add_option("-K", K, "extremes per covariate in the candidate pool")
      ->capture_default_str();
  select->add_option("--iterations", iterations, "alg1 passes")->capture_default_str();
  select->add_flag("--early-stop", early_stop, "stop alg1 after a pass with no swap");
  select->add_option("--seed-method", seed_method, "starting subdata for alg1/valg1")
      ->check(CLI::IsMember(seed_names))
      ->capture_default_str();
  select->add_option("--seed", seed, "rng seed")->capture_default_str();
  select->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "run a simulation study from a config");
  std::string config_path;
  int threads = 0;
  simulate->add_option("-c,--config", config_path, "JSON config")->required();
  simulate->add_option("--threads", threads, "override the config's thread count");
  simulate->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* bootstrap = app.add_subcommand("bootstrap", "bootstrap MSE on a dataset");
  IngestFlags boot_in;
  boot_in.attach(bootstrap, true);
  bootstrap->add_option("-c,--config", config_path, "JSON config")->required();
  bootstrap->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* timing = app.add_subcommand("timing", "iteration/time study");
  timing->add_option("-c,--config", config_path, "JSON config")->required();
  timing->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* hull = app.add_subcommand("hull", "convex hulls of covariate pairs");
  IngestFlags hull_in;
  hull_in.attach(hull, false);
  std::string indices_path;
  std::vector<std::string> pairs;
  bool svg = false;
  hull->add_option("--indices", indices_path, "selected row indices, one per line")->required();
  hull->add_option("--pair", pairs, "covariate pair A,B (names or 1-based positions)")
      ->required();
  hull->add_flag("--svg", svg, "also write one SVG per pair");
  hull->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare artifacts");
  std::string manifest_path;
  replay->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  replay->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::exit_ok : cli::exit_usage;
  }

  try {
    Json spec;
    if (*select) {
      spec = {{"command", "select"},
              {"input", select_in.spec()},
              {"method", method},
              {"k", k},
              {"K", K},
              {"iterations", iterations},
              {"early_stop", early_stop},
              {"seed_method", seed_method},
              {"seed", seed}};
    } else if (*simulate) {
      Json cfg = cli::load_json(config_path);
      if (threads > 0) cfg["threads"] = threads;
      spec = {{"command", "simulate"}, {"config", cli::to_json(cli::experiment_config(cfg))}};
    } else if (*bootstrap) {
      spec = {{"command", "bootstrap"},
              {"input", boot_in.spec()},
              {"config", cli::to_json(cli::bootstrap_config(cli::load_json(config_path)))}};
    } else if (*timing) {
      spec = {{"command", "timing"},
              {"config", cli::to_json(cli::timing_config(cli::load_json(config_path)))}};
    } else if (*hull) {
      Json jp = Json::array();
      for (const auto& p : pairs) {
        const auto parts = cli::split_list(p);
        if (parts.size() != 2) throw std::invalid_argument("--pair expects A,B");
        Json pair = Json::array();
        for (const auto& c : parts) {
          const bool digits = !c.empty() && c.find_first_not_of("0123456789") == std::string::npos;
          pair.push_back(digits ? Json(std::stoll(c)) : Json(c));
        }
        jp.push_back(pair);
      }
      spec = {{"command", "hull"},
              {"input", hull_in.spec()},
              {"selection", absolute(indices_path)},
              {"pairs", jp},
              {"svg", svg}};
    }

    if (*replay) {
      const auto res = cli::replay(manifest_path, out_dir);
      if (res.identical) {
        std::printf("replay identical: %zu artifacts in %s\n",
                    res.run.manifest.at("outputs").size(), out_dir.c_str());
        return cli::exit_ok;
      }
      for (const auto& name : res.mismatched) std::printf("replay differs: %s\n", name.c_str());
      return cli::exit_other;
    }

    const auto out = cli::run_command(spec, out_dir);
    const std::string cmd = spec.at("command");
    if (cmd == "simulate" || cmd == "bootstrap") {
      print_batch(cli::load_json(fs::path(out_dir) / "report.json"));
    } else if (cmd == "select") {
      const Json rep = cli::load_json(fs::path(out_dir) / "report.json");
      std::printf("selected %lld of %lld rows  d_eff %.4f  a_eff %.4f  log V %.6g\n",
                  static_cast<long long>(rep.at("k").get<Index>()),
                  static_cast<long long>(rep.at("n").get<Index>()),
                  rep.at("efficiency").at("d_eff").get<double>(),
                  rep.at("efficiency").at("a_eff").get<double>(),
                  rep.at("efficiency").at("log_gen_variance").get<double>());
    }
    std::printf("wrote %s\n", (fs::path(out_dir) / "manifest.json").c_str());
    return out.batch_ok ? cli::exit_ok : cli::exit_numerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dsub: %s\n", e.what());
    return cli::exit_code_for(e);
  }
}
