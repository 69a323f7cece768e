#pragma once

#include "seglab/geometry.hpp"
#include "seglab/solve.hpp"

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace seglab {

/// Configuration problem tied to a key path such as "solver.max_iters".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct DomainConfig {
  DomainKind kind = DomainKind::rectangle;
  double width = 1.0;
  double height = 1.0;
  double radius = 1.0;
  double m = 2.0;
  double h = 1.0 / 128.0;
  /// Mask CSV and sidecar for kind custom.
  std::string mask;
  std::string sidecar;

  /// Throws ConfigError("domain", ...) when the mask cannot be built.
  MaskPtr build() const;
};

/// Parsed run configuration. Unset optionals were absent from the file.
struct RunConfig {
  std::optional<std::string> experiment;
  std::optional<DomainConfig> domain;
  std::optional<int> k;
  std::optional<double> lambda;
  std::optional<double> kappa;
  /// eps_2 .. eps_k; a single number in the file is broadcast.
  std::optional<std::vector<double>> eps;
  std::optional<bool> identical;
  std::string nonlinearity = "logistic";
  std::string coupling = "quartic";
  SolverConfig solver;

  std::optional<std::vector<double>> lambdas;
  std::optional<std::vector<double>> kappas;
  std::optional<std::vector<double>> eps_grid;
  std::optional<std::vector<double>> deltas;
  std::optional<std::vector<double>> kappa_schedule;
  std::optional<double> eps2;
  std::optional<int> bisect_steps;
  std::optional<bool> stop_at_failure;
  std::optional<std::string> mode;

  std::string out_dir = "out";
  bool dump_fields = false;
  bool quiet = false;

  template <typename T>
  const T& need(const std::optional<T>& v, const std::string& key) const {
    if (!v) throw ConfigError(key, "missing required key '" + key + "'");
    return *v;
  }

  /// k, lambda and eps resolved into a system with zero densities; kappa
  /// defaults to 0.
  System make_system(const MaskPtr& mask) const;
};

/// Strict parse: unknown keys and wrong types are ConfigErrors naming the key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig parse_solver(const nlohmann::json& j, const std::string& prefix = "solver");

/// Built-in configuration for a command or experiment name; throws
/// ConfigError for unknown names.
RunConfig default_config(const std::string& name);

}  // namespace seglab
