#include "dsub/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace dsub::cli {
namespace {

using sim::ConfigError;

class Reader {
 public:
  Reader(const Json& j, std::set<std::string> allowed) : j_(j) {
    if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) throw ConfigError(key, "unknown field");
    }
  }

  template <class T>
  void get(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(key, "wrong type");
    }
  }

  void get_index(const char* key, Index& out) const {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    out = v.get<Index>();
  }

  void get_int(const char* key, int& out) const {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    out = v.get<int>();
  }

  void get_seed(const char* key, std::uint64_t& out) const {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(key, "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void get_methods(const char* key, std::vector<sim::Method>& out) const {
    if (!j_.contains(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(key, "expected a list of method names");
    out.clear();
    for (const auto& m : v) {
      if (!m.is_string()) throw ConfigError(key, "expected a list of method names");
      out.push_back(method_from_name(m.get<std::string>(), key));
    }
  }

  void get_method(const char* key, sim::Method& out) const {
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_string()) throw ConfigError(key, "expected a method name");
    out = method_from_name(j_.at(key).get<std::string>(), key);
  }

  void get_vector(const char* key, Vector& out) const {
    if (!j_.contains(key)) return;
    std::vector<double> v;
    get(key, v);
    out = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  }

  const Json* child(const char* key) const {
    if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
    return &j_.at(key);
  }

 private:
  const Json& j_;
};

// Re-raise a nested error with the parent key prefixed to its field.
[[noreturn]] void rethrow_nested(const std::string& parent, const ConfigError& e) {
  const std::string what = e.what();
  const std::string message = what.substr(std::min(what.size(), e.field().size() + 2));
  throw ConfigError(parent + "." + e.field(), message);
}

Json methods_json(const std::vector<sim::Method>& ms) {
  Json out = Json::array();
  for (auto m : ms) out.push_back(std::string(sim::to_string(m)));
  return out;
}

Json vector_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", path.string() + ": " + e.what());
  }
}

sim::Method method_from_name(const std::string& name, const std::string& field) {
  const auto m = sim::parse_method(name);
  if (!m) throw ConfigError(field, "unknown method '" + name + "'");
  return *m;
}

sim::ExperimentConfig experiment_config(const Json& j) {
  const Reader r(j, {"n", "p", "k", "K", "rho", "repetitions", "alg1_iterations",
                     "alg1_early_stop", "methods", "seed_method", "rng_seed", "outliers",
                     "model", "store_selections", "threads"});
  sim::ExperimentConfig c;
  r.get_index("n", c.n);
  r.get_index("p", c.p);
  r.get_index("k", c.k);
  r.get_index("K", c.K);
  r.get("rho", c.rho);
  r.get_int("repetitions", c.repetitions);
  r.get_int("alg1_iterations", c.alg1_iterations);
  r.get("alg1_early_stop", c.alg1_early_stop);
  r.get_methods("methods", c.methods);
  r.get_method("seed_method", c.seed_method);
  r.get_seed("rng_seed", c.rng_seed);
  r.get("store_selections", c.store_selections);
  r.get_int("threads", c.threads);
  if (const Json* o = r.child("outliers")) {
    try {
      const Reader ro(*o, {"count", "mean_shift"});
      sim::OutlierSpec spec;
      ro.get_index("count", spec.count);
      ro.get_vector("mean_shift", spec.mean_shift);
      c.outliers = spec;
    } catch (const ConfigError& e) {
      rethrow_nested("outliers", e);
    }
  }
  if (const Json* m = r.child("model")) {
    try {
      const Reader rm(*m, {"beta0", "beta1", "sigma2"});
      rm.get("beta0", c.model.beta0);
      rm.get_vector("beta1", c.model.beta1);
      rm.get("sigma2", c.model.sigma2);
    } catch (const ConfigError& e) {
      rethrow_nested("model", e);
    }
  }
  sim::validate(c);
  return c;
}

sim::BootstrapConfig bootstrap_config(const Json& j) {
  const Reader r(j, {"k", "K", "B", "methods", "alg1_iterations", "seed_method", "rng_seed",
                     "store_selections"});
  sim::BootstrapConfig c;
  r.get_index("k", c.k);
  r.get_index("K", c.K);
  r.get_int("B", c.B);
  r.get_methods("methods", c.methods);
  r.get_int("alg1_iterations", c.alg1_iterations);
  r.get_method("seed_method", c.seed_method);
  r.get_seed("rng_seed", c.rng_seed);
  r.get("store_selections", c.store_selections);
  return c;
}

sim::TimingConfig timing_config(const Json& j) {
  const Reader r(j, {"n", "p", "rho", "ks", "Ks", "iterations", "repetitions", "seed_method",
                     "include_valg1", "rng_seed"});
  sim::TimingConfig c;
  r.get_index("n", c.n);
  r.get_index("p", c.p);
  r.get("rho", c.rho);
  r.get("ks", c.ks);
  r.get("Ks", c.Ks);
  r.get("iterations", c.iterations);
  r.get_int("repetitions", c.repetitions);
  r.get_method("seed_method", c.seed_method);
  r.get("include_valg1", c.include_valg1);
  r.get_seed("rng_seed", c.rng_seed);
  sim::validate(c);
  return c;
}

Json to_json(const sim::ExperimentConfig& c) {
  Json j;
  j["n"] = c.n;
  j["p"] = c.p;
  j["k"] = c.k;
  j["K"] = c.K;
  j["rho"] = c.rho;
  j["repetitions"] = c.repetitions;
  j["alg1_iterations"] = c.alg1_iterations;
  j["alg1_early_stop"] = c.alg1_early_stop;
  j["methods"] = methods_json(c.methods);
  j["seed_method"] = std::string(sim::to_string(c.seed_method));
  j["rng_seed"] = c.rng_seed;
  if (c.outliers) {
    j["outliers"] = {{"count", c.outliers->count},
                     {"mean_shift", vector_json(c.outliers->mean_shift)}};
  } else {
    j["outliers"] = nullptr;
  }
  j["model"] = {{"beta0", c.model.beta0},
                {"beta1", vector_json(c.model.beta1)},
                {"sigma2", c.model.sigma2}};
  j["store_selections"] = c.store_selections;
  j["threads"] = c.threads;
  return j;
}

Json to_json(const sim::BootstrapConfig& c) {
  Json j;
  j["k"] = c.k;
  j["K"] = c.K;
  j["B"] = c.B;
  j["methods"] = methods_json(c.methods);
  j["alg1_iterations"] = c.alg1_iterations;
  j["seed_method"] = std::string(sim::to_string(c.seed_method));
  j["rng_seed"] = c.rng_seed;
  j["store_selections"] = c.store_selections;
  return j;
}

Json to_json(const sim::TimingConfig& c) {
  Json j;
  j["n"] = c.n;
  j["p"] = c.p;
  j["rho"] = c.rho;
  j["ks"] = c.ks;
  j["Ks"] = c.Ks;
  j["iterations"] = c.iterations;
  j["repetitions"] = c.repetitions;
  j["seed_method"] = std::string(sim::to_string(c.seed_method));
  j["include_valg1"] = c.include_valg1;
  j["rng_seed"] = c.rng_seed;
  return j;
}

}  // namespace dsub::cli
