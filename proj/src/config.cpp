#include "seglab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace seglab {

using nlohmann::json;

namespace {

std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(join_key(prefix, it.key()), "unknown key");
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "expected a finite number");
  return x;
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, "expected a list of numbers");
  if (v.empty()) throw ConfigError(key, "list must not be empty");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename T, typename F>
void read(const json& obj, const std::string& prefix, const char* key, std::optional<T>& dst, F conv) {
  if (obj.contains(key)) dst = conv(obj.at(key), join_key(prefix, key));
}

template <typename T, typename F>
void read(const json& obj, const std::string& prefix, const char* key, T& dst, F conv) {
  if (obj.contains(key)) dst = conv(obj.at(key), join_key(prefix, key));
}

DomainConfig parse_domain(const json& j) {
  reject_unknown(j, "domain", {"kind", "width", "height", "radius", "m", "h", "mask", "sidecar"});
  DomainConfig d;
  if (!j.contains("kind")) throw ConfigError("domain.kind", "missing required key 'domain.kind'");
  try {
    d.kind = domain_kind_from_string(as_string(j.at("kind"), "domain.kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("domain.kind", e.what());
  }
  read(j, "domain", "width", d.width, as_number);
  read(j, "domain", "height", d.height, as_number);
  read(j, "domain", "radius", d.radius, as_number);
  read(j, "domain", "m", d.m, as_number);
  read(j, "domain", "h", d.h, as_number);
  read(j, "domain", "mask", d.mask, as_string);
  read(j, "domain", "sidecar", d.sidecar, as_string);
  if (!(d.h > 0)) throw ConfigError("domain.h", "must be positive");
  if (d.kind == DomainKind::custom && (d.mask.empty() || d.sidecar.empty()))
    throw ConfigError("domain.mask", "custom domains need 'mask' and 'sidecar' paths");
  return d;
}

json domain_json(const DomainConfig& d) {
  json j;
  j["kind"] = to_string(d.kind);
  switch (d.kind) {
    case DomainKind::rectangle:
      j["width"] = d.width;
      j["height"] = d.height;
      j["h"] = d.h;
      break;
    case DomainKind::disc:
      j["radius"] = d.radius;
      j["h"] = d.h;
      break;
    case DomainKind::wedge:
      j["m"] = d.m;
      j["h"] = d.h;
      break;
    case DomainKind::custom:
      j["mask"] = d.mask;
      j["sidecar"] = d.sidecar;
      break;
  }
  return j;
}

}  // namespace

MaskPtr DomainConfig::build() const {
  try {
    switch (kind) {
      case DomainKind::rectangle:
        return build_rectangle(width, height, h);
      case DomainKind::disc:
        return build_disc(radius, h);
      case DomainKind::wedge:
        return build_wedge(m, h);
      case DomainKind::custom:
        return read_mask(mask, sidecar);
    }
  } catch (const std::exception& e) {
    throw ConfigError("domain", e.what());
  }
  throw ConfigError("domain", "unsupported kind");
}

SolverConfig parse_solver(const json& j, const std::string& prefix) {
  reject_unknown(j, prefix,
                 {"max_iters", "tol_energy", "tol_residual", "step0", "armijo", "restarts", "seed", "coexist_eta",
                  "stall_window", "accelerate", "max_outer", "jobs"});
  SolverConfig s;
  read(j, prefix, "max_iters", s.max_iters, as_int);
  read(j, prefix, "tol_energy", s.tol_energy, as_number);
  read(j, prefix, "tol_residual", s.tol_residual, as_number);
  read(j, prefix, "step0", s.step0, as_number);
  if (j.contains("armijo")) {
    const std::string ap = join_key(prefix, "armijo");
    const json& a = j.at("armijo");
    reject_unknown(a, ap, {"shrink", "sufficient", "growth"});
    read(a, ap, "shrink", s.armijo.shrink, as_number);
    read(a, ap, "sufficient", s.armijo.sufficient, as_number);
    read(a, ap, "growth", s.armijo.growth, as_number);
  }
  read(j, prefix, "restarts", s.restarts, as_int);
  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(join_key(prefix, "seed"), "expected a nonnegative integer");
    s.seed = v.get<std::uint64_t>();
  }
  read(j, prefix, "coexist_eta", s.coexist_eta, as_number);
  read(j, prefix, "stall_window", s.stall_window, as_int);
  read(j, prefix, "accelerate", s.accelerate, as_bool);
  read(j, prefix, "max_outer", s.max_outer, as_int);
  read(j, prefix, "jobs", s.jobs, as_int);
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ConfigError(prefix, e.what());
  }
  return s;
}

json to_json(const SolverConfig& s) {
  json j;
  j["max_iters"] = s.max_iters;
  j["tol_energy"] = s.tol_energy;
  if (s.tol_residual) j["tol_residual"] = *s.tol_residual;
  if (s.step0) j["step0"] = *s.step0;
  j["armijo"] = {{"shrink", s.armijo.shrink}, {"sufficient", s.armijo.sufficient}, {"growth", s.armijo.growth}};
  j["restarts"] = s.restarts;
  j["seed"] = s.seed;
  if (s.coexist_eta) j["coexist_eta"] = *s.coexist_eta;
  j["stall_window"] = s.stall_window;
  j["accelerate"] = s.accelerate;
  j["max_outer"] = s.max_outer;
  j["jobs"] = s.jobs;
  return j;
}

RunConfig parse_config(const json& j) {
  reject_unknown(j, "",
                 {"experiment", "domain", "k", "lambda", "kappa", "eps", "identical", "nonlinearity", "coupling",
                  "solver", "lambdas", "kappas", "eps_grid", "deltas", "kappa_schedule", "eps2",
                  "bisect_steps", "stop_at_failure", "mode", "output"});
  RunConfig c;
  read(j, "", "experiment", c.experiment, as_string);
  if (j.contains("domain")) c.domain = parse_domain(j.at("domain"));
  read(j, "", "k", c.k, as_int);
  if (c.k && (*c.k < 1 || *c.k > kMaxSpecies)) throw ConfigError("k", "species count out of range");
  read(j, "", "lambda", c.lambda, as_number);
  if (c.lambda && !(*c.lambda > 0)) throw ConfigError("lambda", "must be positive");
  read(j, "", "kappa", c.kappa, as_number);
  if (c.kappa && !(*c.kappa >= 0)) throw ConfigError("kappa", "must be nonnegative");
  if (j.contains("eps")) {
    const json& e = j.at("eps");
    if (e.is_number()) {
      if (!c.k) throw ConfigError("eps", "a scalar eps needs 'k' to broadcast");
      c.eps = std::vector<double>(static_cast<std::size_t>(std::max(*c.k - 1, 0)), as_number(e, "eps"));
    } else if (e.is_array() && e.empty()) {
      c.eps = std::vector<double>{};
    } else {
      c.eps = as_list(e, "eps");
    }
    for (double v : *c.eps)
      if (!(v > 0 && v < 1)) throw ConfigError("eps", "every eps must lie in (0, 1)");
  }
  read(j, "", "identical", c.identical, as_bool);
  read(j, "", "nonlinearity", c.nonlinearity, as_string);
  if (c.nonlinearity != "logistic")
    throw ConfigError("nonlinearity", "unknown nonlinearity '" + c.nonlinearity + "' (only 'logistic')");
  read(j, "", "coupling", c.coupling, as_string);
  if (c.coupling != "quartic") throw ConfigError("coupling", "unknown coupling '" + c.coupling + "' (only 'quartic')");
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  read(j, "", "lambdas", c.lambdas, as_list);
  read(j, "", "kappas", c.kappas, as_list);
  read(j, "", "eps_grid", c.eps_grid, as_list);
  read(j, "", "deltas", c.deltas, as_list);
  read(j, "", "kappa_schedule", c.kappa_schedule, as_list);
  read(j, "", "eps2", c.eps2, as_number);
  read(j, "", "bisect_steps", c.bisect_steps, as_int);
  if (c.bisect_steps && *c.bisect_steps < 0) throw ConfigError("bisect_steps", "must be nonnegative");
  read(j, "", "stop_at_failure", c.stop_at_failure, as_bool);
  read(j, "", "mode", c.mode, as_string);
  if (c.mode && *c.mode != "free" && *c.mode != "partition")
    throw ConfigError("mode", "expected 'free' or 'partition'");
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, "output", {"dir", "dump_fields", "quiet"});
    read(o, "output", "dir", c.out_dir, as_string);
    read(o, "output", "dump_fields", c.dump_fields, as_bool);
    read(o, "output", "quiet", c.quiet, as_bool);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  if (c.experiment) j["experiment"] = *c.experiment;
  if (c.domain) j["domain"] = domain_json(*c.domain);
  if (c.k) j["k"] = *c.k;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.kappa) j["kappa"] = *c.kappa;
  if (c.eps) j["eps"] = *c.eps;
  if (c.identical) j["identical"] = *c.identical;
  j["nonlinearity"] = c.nonlinearity;
  j["coupling"] = c.coupling;
  j["solver"] = to_json(c.solver);
  if (c.lambdas) j["lambdas"] = *c.lambdas;
  if (c.kappas) j["kappas"] = *c.kappas;
  if (c.eps_grid) j["eps_grid"] = *c.eps_grid;
  if (c.deltas) j["deltas"] = *c.deltas;
  if (c.kappa_schedule) j["kappa_schedule"] = *c.kappa_schedule;
  if (c.eps2) j["eps2"] = *c.eps2;
  if (c.bisect_steps) j["bisect_steps"] = *c.bisect_steps;
  if (c.stop_at_failure) j["stop_at_failure"] = *c.stop_at_failure;
  if (c.mode) j["mode"] = *c.mode;
  j["output"] = {{"dir", c.out_dir}, {"dump_fields", c.dump_fields}, {"quiet", c.quiet}};
  return j;
}

System RunConfig::make_system(const MaskPtr& mask) const {
  const int species = need(k, "k");
  const double lam = need(lambda, "lambda");
  System sys;
  sys.mask = mask;
  const bool same = identical.value_or(false);
  if (same || species == 1) {
    sys.family = ScaledFamily<double>::same_law(logistic<double>(), species);
  } else {
    const std::vector<double>& e = need(eps, "eps");
    if (static_cast<int>(e.size()) != species - 1)
      throw ConfigError("eps", "need k - 1 = " + std::to_string(species - 1) + " values");
    sys.family = ScaledFamily<double>(logistic<double>(), species, e);
  }
  sys.coupling = coupling_quartic<double>(species);
  sys.lambda = lam;
  sys.kappa = kappa.value_or(0.0);
  sys.u = FieldSet<double>::Zero(mask->size(), species);
  return sys;
}

RunConfig default_config(const std::string& name) {
  RunConfig c;
  c.experiment = name;
  DomainConfig square;
  DomainConfig disc;
  disc.kind = DomainKind::disc;
  disc.h = 1.0 / 64.0;
  DomainConfig wedge;
  wedge.kind = DomainKind::wedge;

  if (name == "minimize") {
    square.h = 1.0 / 64.0;
    c.domain = square;
    c.k = 1;
    c.lambda = 200.0;
    c.kappa = 0.0;
  } else if (name == "partition") {
    wedge.h = 1.0 / 64.0;
    c.domain = wedge;
    c.k = 2;
    c.lambda = 1000.0;
    c.eps = std::vector<double>{0.1};
  } else if (name == "eig") {
    c.domain = square;
  } else if (name == "extinction") {
    c.domain = square;
    c.k = 3;
    c.lambda = 200.0;
  } else if (name == "eps-threshold") {
    c.domain = disc;
    c.k = 2;
    c.lambda = 200.0;
    c.kappa = 400.0;
    c.eps_grid = std::vector<double>{0.144, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    c.bisect_steps = 3;
    c.stop_at_failure = true;
  } else if (name == "limiti") {
    c.domain = square;
    c.lambdas = std::vector<double>{50, 100, 200, 400, 800};
  } else if (name == "wedge-bound") {
    wedge.h = 1.0 / 256.0;
    c.domain = wedge;
    c.lambda = 200.0;
  } else if (name == "cutoff") {
    wedge.h = 1.0 / 256.0;
    c.domain = wedge;
    c.lambda = 200.0;
    c.deltas = std::vector<double>{1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  } else if (name == "system2") {
    c.domain = wedge;
    c.k = 2;
    c.lambda = 200.0;
    c.eps2 = 0.625;
    c.kappa_schedule = std::vector<double>{10, 30, 100, 300, 1000};
  } else if (name == "sweep") {
    square.h = 1.0 / 32.0;
    c.domain = square;
    c.k = 2;
    c.lambdas = std::vector<double>{100, 200};
    c.kappas = std::vector<double>{0, 100};
    c.eps_grid = std::vector<double>{0.5};
    c.mode = "free";
  } else {
    throw ConfigError("experiment", "unknown experiment '" + name + "'");
  }
  return c;
}

}  // namespace seglab
