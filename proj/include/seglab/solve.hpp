#pragma once

#include "seglab/energy.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace seglab {

using System = SpeciesSystem<double>;
using Report = EnergyReport<double>;

class NonFiniteEnergy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Armijo {
  double shrink = 0.5;
  double sufficient = 1e-4;
  double growth = 1.1;
};

struct SolverConfig {
  int max_iters = 50000;
  /// Relative energy decrease regarded as a stall.
  double tol_energy = 1e-10;
  /// Sup norm of the projected gradient; unset means 1e-6 * lambda.
  std::optional<double> tol_residual;
  /// Unset means h^2 / 8.
  std::optional<double> step0;
  Armijo armijo;
  /// Random starts on top of the structured ones.
  int restarts = 8;
  std::uint64_t seed = 0;
  /// L2 mass above which a species counts as alive; unset means
  /// 1e-3 * beta_i * sqrt(|Omega|).
  std::optional<double> coexist_eta;
  int stall_window = 20;
  /// Momentum extrapolation with restart; accepted iterates stay monotone.
  bool accelerate = true;
  /// Cap on descent / interface-move rounds of the partition solver.
  int max_outer = 400;
  /// Worker threads for independent starts.
  int jobs = 1;

  void validate() const;
  double residual_tolerance(double lambda) const { return tol_residual.value_or(1e-6 * lambda); }
  double initial_step(double h) const { return step0.value_or(h * h / 8.0); }
  double eta(const System& sys, int i) const;
};

struct MinimizeResult {
  System system;
  Report report;
  int iters = 0;
  /// Descent / interface-move rounds (partition solver only).
  int rounds = 0;
  bool converged = false;
  std::vector<bool> alive;
  std::string start_label;
  /// Sup norm of the projected gradient at the returned state.
  double residual = 0.0;
  /// Energy after every accepted step, starting with the projected input.
  std::vector<double> energy_trace;

  int alive_count() const;
};

/// Labelled initial densities, one column per species.
struct Start {
  std::string label;
  FieldSet<double> u;
};

struct InitializerSet {
  std::vector<Start> starts;
  std::vector<std::string> warnings;
};

/// Smooth step: 0 on (-inf, 1], 1 on [2, inf), C^2 in between.
double smooth_cutoff(double s);

/// Structured and random starting densities:
///   single   - species 0 is min(beta, sqrt(lambda) * dist-to-boundary), others 0;
///   seeded   - species 0 as above, cut off around rescaled copies
///              (beta_i / beta) * u_0((x - x0) / eps_i) of itself placed for the
///              other species (on a wedge species 1 sits at the vertex; identical
///              laws use scale 1 / (k + 1) in place of eps_i);
///   uniform  - every species at beta_i / 2;
///   random-r - nodewise uniform on [0, beta_i], seeded with seed + 3 + r.
InitializerSet default_initializers(const MaskPtr& mask, const ScaledFamily<double>& fam, double lambda,
                                    const SolverConfig& cfg);

/// Copy of `prototype` with the given densities.
System with_fields(const System& prototype, const FieldSet<double>& u);

/// Keep at every node only the largest density (ties go to the lowest
/// species index).
FieldSet<double> segregate(const FieldSet<double>& u);
bool is_segregated(const FieldSet<double>& u);

std::vector<bool> alive_flags(const System& sys, const SolverConfig& cfg);

/// Sup norm of the gradient restricted to directions that keep 0 <= u <= upper.
double projected_residual(const FieldSet<double>& u, const FieldSet<double>& grad, const FieldSet<double>& upper);

/// Per-species caps beta_i broadcast to every node.
FieldSet<double> species_caps(const System& sys);

/// Projected gradient descent of the full energy on the box [0, beta_i],
/// with Armijo backtracking.
MinimizeResult minimize_free(const System& sys0, const SolverConfig& cfg);

/// Descent of the free energy (kappa dropped) over segregated states.
/// Alternates box-constrained descent of every species on the nodes it owns,
/// single-node interface moves that lower the energy, and merges of two
/// species into one when that does not raise the energy. The output is
/// segregated nodewise.
MinimizeResult minimize_partition(const System& sys0, const SolverConfig& cfg);

enum class SolveMode { free, partition };

struct MultistartResult {
  MinimizeResult best;
  std::vector<MinimizeResult> runs;
  std::vector<std::string> warnings;
};

/// Runs every start and keeps the lowest energy (first wins ties). The
/// result is best-found, not certified global.
MultistartResult minimize_multistart(const System& prototype, const std::vector<Start>& starts, SolveMode mode,
                                     const SolverConfig& cfg);
/// Same with default_initializers.
MultistartResult minimize_multistart(const System& prototype, SolveMode mode, const SolverConfig& cfg);

struct ContinuationStep {
  double kappa = 0.0;
  MinimizeResult result;
  /// h^2 sum_nodes H(U).
  double overlap = 0.0;
  /// Energy estimate of inf I at this kappa.
  double level = 0.0;
};

/// Minimizes for each kappa of a strictly increasing schedule, warm-starting
/// from the previous minimizer.
std::vector<ContinuationStep> kappa_continuation(const System& sys0, const std::vector<double>& schedule,
                                                 const SolverConfig& cfg);

struct MergeCheck {
  double original = 0.0;
  double merged = 0.0;
  bool holds = false;
};

/// Energy of (sum_i u_i, 0, ..., 0) against U; holds when merging does not
/// raise the energy beyond `slack` (absolute, scaled by max(1, |E|)).
MergeCheck merge_test(const System& sys, double slack = 1e-12);

}  // namespace seglab
