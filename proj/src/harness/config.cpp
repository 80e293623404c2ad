#include "mflab/harness/config.hpp"

#include <cstdio>
#include <fstream>

namespace mflab {

namespace {

struct NamedExperiment {
  Experiment e;
  const char* name;
};

constexpr NamedExperiment kExperiments[] = {
    {Experiment::Ergodicity, "ergodicity"}, {Experiment::Drift, "drift"},
    {Experiment::GammaRates, "gamma-rates"}, {Experiment::Increment, "increment"},
    {Experiment::Ntk, "ntk"},               {Experiment::Ode, "ode"},
    {Experiment::Validate, "validate"},
};

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t positive_count(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw ConfigError("config key '" + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

} // namespace

std::string experiment_name(Experiment e) {
  for (const auto& ne : kExperiments) {
    if (ne.e == e) {
      return ne.name;
    }
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& ne : kExperiments) {
    if (name == ne.name) {
      return ne.e;
    }
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig ExperimentConfig::defaults(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
  case Experiment::Ergodicity:
    c.N_grid = {100, 1000, 10000};
    c.paths = 20;
    c.steps = 5000;
    break;
  case Experiment::Drift:
    c.N_grid = {200, 800, 3200};
    c.seeds = 10;
    c.T = 1.0;
    break;
  case Experiment::GammaRates:
    c.N_grid = {100, 400, 1600, 6400};
    c.seeds = 50;
    c.T = 0.5;
    break;
  case Experiment::Increment:
    c.N_grid = {100, 1000};
    c.seeds = 5;
    c.T = 1.0;
    break;
  case Experiment::Ntk:
    c.N_grid = {500, 2000, 8000};
    c.seeds = 20;
    c.T = 1.0;
    break;
  case Experiment::Ode:
    c.M = 256;
    c.ode_T = 10.0;
    break;
  case Experiment::Validate:
    break;
  }
  return c;
}

ModelConfig ExperimentConfig::model(std::size_t N, std::uint64_t s) const {
  ModelConfig m;
  m.N = N;
  m.d = 1;
  m.beta = beta;
  m.gamma = gamma;
  m.alpha = alpha;
  m.seed = s;
  m.c_index = c_index;
  m.b_form = b_form;
  return m;
}

Activation ExperimentConfig::activation() const {
  return activation_scale == 1.0 ? Activation::standard() : Activation::scaled(activation_scale);
}

DynamicsSpec ExperimentConfig::dynamics_spec() const {
  if (dynamics == "rotation-tanh") {
    BuiltinOptions o;
    o.output_scale = output_scale;
    o.eta_halfwidth = eta_halfwidth;
    o.eps_halfwidth = eps_halfwidth;
    o.L = L;
    return make_builtin_rotation_tanh(o);
  }
  if (dynamics == "null") {
    return make_null_dynamics(1);
  }
  throw ConfigError("unknown dynamics '" + dynamics + "'");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment_name(experiment);
  j["N_grid"] = N_grid;
  j["paths"] = paths;
  j["steps"] = steps;
  j["T"] = T;
  j["seed"] = seed;
  j["seeds"] = seeds;
  j["model"] = {{"beta", beta},
                {"gamma", gamma},
                {"alpha", alpha},
                {"c_update", c_index == CUpdateIndex::Own ? "own" : "last-unit"},
                {"b_update", b_form == BUpdateForm::Gradient ? "gradient" : "listing"},
                {"activation_scale", activation_scale}};
  j["dynamics"] = {{"name", dynamics},
                   {"output_scale", output_scale},
                   {"eta_halfwidth", eta_halfwidth},
                   {"eps_halfwidth", eps_halfwidth}};
  if (L) {
    j["dynamics"]["L"] = *L;
  }
  j["lambda_samples"] = lambda_samples;
  j["M"] = M;
  j["burn_in"] = burn_in;
  j["stride"] = stride;
  j["burn_in_tol"] = burn_in_tol;
  j["harvest"] = harvest == Harvest::SingleChain ? "single-chain" : "iid-restarts";
  j["ode_T"] = ode_T;
  j["dt"] = dt;
  j["oracle_M"] = oracle_M;
  j["zero_targets"] = zero_targets;
  j["shared_theta"] = shared_theta;
  j["init_seeds"] = init_seeds;
  j["jobs"] = jobs;
  j["allow_assumption_violation"] = allow_assumption_violation;
  j["out"] = out_dir;
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  auto j = to_json();
  j.erase("jobs");
  j.erase("out");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "experiment") {
      const auto e = parse_experiment(get_as<std::string>(v, k));
      if (e != c.experiment) {
        throw ConfigError("config is for '" + experiment_name(e) + "', not '" +
                          experiment_name(c.experiment) + "'");
      }
    } else if (k == "N_grid") {
      c.N_grid.clear();
      if (!v.is_array() || v.empty()) {
        throw ConfigError("N_grid must be a non-empty array");
      }
      for (const auto& n : v) {
        c.N_grid.push_back(positive_count(n, k));
      }
    } else if (k == "paths") {
      c.paths = positive_count(v, k);
    } else if (k == "steps") {
      c.steps = positive_count(v, k);
    } else if (k == "T") {
      c.T = get_as<double>(v, k);
    } else if (k == "seed") {
      c.seed = get_as<std::uint64_t>(v, k);
    } else if (k == "seeds") {
      c.seeds = positive_count(v, k);
    } else if (k == "model") {
      if (!v.is_object()) {
        throw ConfigError("'model' must be an object");
      }
      for (auto m = v.begin(); m != v.end(); ++m) {
        const std::string& mk = m.key();
        if (mk == "beta") {
          c.beta = get_as<double>(*m, mk);
        } else if (mk == "gamma") {
          c.gamma = get_as<double>(*m, mk);
        } else if (mk == "alpha") {
          c.alpha = get_as<double>(*m, mk);
        } else if (mk == "activation_scale") {
          c.activation_scale = get_as<double>(*m, mk);
        } else if (mk == "c_update") {
          const auto s = get_as<std::string>(*m, mk);
          if (s == "own") {
            c.c_index = CUpdateIndex::Own;
          } else if (s == "last-unit") {
            c.c_index = CUpdateIndex::LastUnit;
          } else {
            throw ConfigError("c_update must be 'own' or 'last-unit'");
          }
        } else if (mk == "b_update") {
          const auto s = get_as<std::string>(*m, mk);
          if (s == "gradient") {
            c.b_form = BUpdateForm::Gradient;
          } else if (s == "listing") {
            c.b_form = BUpdateForm::Listing;
          } else {
            throw ConfigError("b_update must be 'gradient' or 'listing'");
          }
        } else {
          throw ConfigError("unknown model key '" + mk + "'");
        }
      }
    } else if (k == "dynamics") {
      if (!v.is_object()) {
        throw ConfigError("'dynamics' must be an object");
      }
      for (auto m = v.begin(); m != v.end(); ++m) {
        const std::string& mk = m.key();
        if (mk == "name") {
          c.dynamics = get_as<std::string>(*m, mk);
        } else if (mk == "output_scale") {
          c.output_scale = get_as<double>(*m, mk);
        } else if (mk == "eta_halfwidth") {
          c.eta_halfwidth = get_as<double>(*m, mk);
        } else if (mk == "eps_halfwidth") {
          c.eps_halfwidth = get_as<double>(*m, mk);
        } else if (mk == "L") {
          c.L = get_as<double>(*m, mk);
        } else {
          throw ConfigError("unknown dynamics key '" + mk + "'");
        }
      }
    } else if (k == "lambda_samples") {
      c.lambda_samples = positive_count(v, k);
    } else if (k == "M") {
      c.M = positive_count(v, k);
    } else if (k == "burn_in") {
      c.burn_in = get_as<std::uint64_t>(v, k);
    } else if (k == "stride") {
      c.stride = positive_count(v, k);
    } else if (k == "burn_in_tol") {
      c.burn_in_tol = get_as<double>(v, k);
    } else if (k == "harvest") {
      const auto s = get_as<std::string>(v, k);
      if (s == "single-chain") {
        c.harvest = Harvest::SingleChain;
      } else if (s == "iid-restarts") {
        c.harvest = Harvest::IidRestarts;
      } else {
        throw ConfigError("harvest must be 'single-chain' or 'iid-restarts'");
      }
    } else if (k == "ode_T") {
      c.ode_T = get_as<double>(v, k);
    } else if (k == "dt") {
      c.dt = get_as<double>(v, k);
    } else if (k == "oracle_M") {
      c.oracle_M = positive_count(v, k);
    } else if (k == "zero_targets") {
      c.zero_targets = get_as<bool>(v, k);
    } else if (k == "shared_theta") {
      c.shared_theta = get_as<bool>(v, k);
    } else if (k == "init_seeds") {
      c.init_seeds = positive_count(v, k);
    } else if (k == "jobs") {
      c.jobs = positive_count(v, k);
    } else if (k == "allow_assumption_violation") {
      c.allow_assumption_violation = get_as<bool>(v, k);
    } else if (k == "out") {
      c.out_dir = get_as<std::string>(v, k);
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

ValidationOutcome validate_config(const ExperimentConfig& cfg) {
  cfg.model(cfg.N_grid.empty() ? 1 : cfg.N_grid.front(), cfg.seed).validate();
  if (cfg.experiment != Experiment::Ode && cfg.experiment != Experiment::Validate &&
      cfg.N_grid.empty()) {
    throw ConfigError("N_grid is empty");
  }
  if (!(cfg.T > 0.0) || !(cfg.ode_T >= 0.0) || !(cfg.dt > 0.0)) {
    throw ConfigError("horizons and dt must be positive");
  }
  if (!(cfg.activation_scale > 0.0 && cfg.activation_scale <= 1.0)) {
    throw ConfigError("activation_scale must lie in (0, 1]");
  }
  const auto spec = cfg.dynamics_spec();
  ValidationOutcome out;
  out.report = validate_assumptions(spec, cfg.activation(), ScalingWindow{cfg.beta, cfg.gamma});
  if (!out.report.passes()) {
    if (!cfg.allow_assumption_violation) {
      throw ConfigError("assumptions violated: " + out.report.summary());
    }
    out.overridden = true;
  }
  return out;
}

} // namespace mflab
