#pragma once

#include "seglab/solve.hpp"

#include <optional>
#include <string>
#include <vector>

namespace seglab {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

/// k logistic species with quartic coupling and zero densities; species
/// i >= 1 use scale eps, or the same law when eps is empty.
System logistic_system(const MaskPtr& mask, int k, double lambda, double kappa, std::optional<double> eps);

// ---------------------------------------------------------------- extinction

struct ExtinctionReport {
  Verdict verdict = Verdict::inconclusive;
  MultistartResult runs;
  std::vector<MergeCheck> merges;  // one per run
  std::string message;
};

/// Partition multistart with k copies of the same law. PASS iff every run
/// ends with at most one alive species and the merge test holds on every
/// run; INCONCLUSIVE when the best run did not converge.
ExtinctionReport verify_extinction_identical(const MaskPtr& mask, int k, double lambda, const SolverConfig& cfg);

// ----------------------------------------------------------- epsilon scan

struct ScanPoint {
  double eps = 0.0;
  int alive = 0;
  bool coexist = false;
  bool bisection = false;
  MinimizeResult best;
};

struct ThresholdScan {
  Verdict verdict = Verdict::inconclusive;
  std::vector<ScanPoint> points;
  /// Largest grid value with full coexistence below the first grid failure.
  std::optional<double> grid_threshold;
  /// grid_threshold refined by bisection.
  std::optional<double> threshold;
  /// sqrt(lambda / (6 k^2 kappa)); unset for kappa = 0.
  std::optional<double> eps_star;
  bool degenerate = false;
  /// Alive count not non-decreasing in eps over all scanned points (logged
  /// only).
  bool monotonicity_violated = false;
  std::string message;
};

struct ScanOptions {
  int bisect_steps = 3;
  /// Stop the grid at the first value without coexistence.
  bool stop_at_failure = true;
};

/// Multistart free minimization over an increasing eps grid. The threshold
/// is the largest eps below which every tested value coexists. PASS iff the
/// threshold is at least eps_star and every tested eps in [eps_star,
/// threshold] coexists; with kappa = 0 PASS iff every tested value coexists.
ThresholdScan scan_epsilon_threshold(const MaskPtr& mask, int k, double lambda, double kappa,
                                     const std::vector<double>& eps_grid, const SolverConfig& cfg,
                                     const ScanOptions& opts = {});

// ----------------------------------------------------- large-lambda limit

struct LimitRow {
  double lambda = 0.0;
  /// Best-found minimum of J_1 divided by lambda.
  double scaled = 0.0;
  MinimizeResult best;
};

struct LimitTable {
  Verdict verdict = Verdict::inconclusive;
  std::vector<LimitRow> rows;
  double target = 0.0;  // -alpha |Omega|
  bool above_floor = false;
  bool decreasing = false;
  bool last_within = false;
  double last_relative_gap = 0.0;
  std::string message;
};

/// lambda^{-1} min J_1 for an increasing lambda list, compared with
/// -alpha |Omega|: every value >= target (1 + floor_slack), strictly
/// decreasing, last value within last_tol of the target.
LimitTable verify_limiti_asymptotics(const MaskPtr& mask, const std::vector<double>& lambdas, const SolverConfig& cfg,
                                     double floor_slack = 0.01, double last_tol = 0.10);

// ------------------------------------------------------------ wedge bound

struct WedgeBoundReport {
  Verdict verdict = Verdict::inconclusive;
  double gamma = 0.0;
  double tolerance = 0.0;
  /// max over nodes of u - gamma (x1^2 - m^2 x2^2).
  double max_excess = 0.0;
  Point worst = Point::Zero();
  std::optional<MinimizeResult> minimizer;
  std::string message;
};

/// gamma = lambda gmax / (2 (m^2 (N - 1) - 1)).
double wedge_gamma(double m, double lambda, double gmax);

/// Pointwise test u <= gamma (x1^2 - m^2 x2^2) + tol_factor h gamma on a
/// wedge mask.
WedgeBoundReport check_wedge_bound(const DomainMask& wedge, const Field<double>& u, double lambda, double gmax,
                                   double tol_factor = 10.0);

/// Minimizes J_1 on the wedge and checks the bound.
WedgeBoundReport verify_wedge_bound(const MaskPtr& wedge, double lambda, const SolverConfig& cfg);

// --------------------------------------------------------- cutoff scaling

/// phi(x1 / delta) u; delta = 0 returns u unchanged.
Field<double> apply_cutoff(const DomainMask& mask, const Field<double>& u, double delta);

struct CutoffRow {
  double delta = 0.0;
  double dJ = 0.0;
};

struct CutoffReport {
  Verdict verdict = Verdict::inconclusive;
  std::vector<CutoffRow> rows;
  double slope = 0.0;
  /// Values of delta whose cutoff did not raise the energy.
  std::vector<double> nonpositive;
  std::optional<MinimizeResult> minimizer;
  std::string message;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Change of J_1 when the minimizer on the wedge is cut off at x1 ~ delta;
/// PASS iff the fitted log-log slope is at least N + 1. Deltas must number at
/// least four and lie in [2h, 1/2].
CutoffReport verify_cutoff_scaling(const MaskPtr& wedge, double lambda, const std::vector<double>& deltas,
                                   const SolverConfig& cfg);

// ------------------------------------------------------------- kappa limit

struct System2Report {
  Verdict verdict = Verdict::inconclusive;
  std::vector<ContinuationStep> steps;
  /// Best-found partition minimum.
  double partition_level = 0.0;
  MinimizeResult partition;
  bool all_alive = false;
  double overlap_ratio = 0.0;
  bool overlap_dropped = false;
  bool levels_monotone = false;
  bool below_partition = false;
  /// |E(segregate(U)) - Lambda| / |Lambda| at the last kappa.
  double projection_gap = 0.0;
  bool gap_small = false;
  std::optional<double> failed_kappa;
  std::string message;
};

/// kappa continuation for two species on the wedge with growth scale eps2,
/// compared against the partition minimum. PASS iff both species are alive
/// at every kappa, the overlap drops by at least 1e3, the levels are
/// non-decreasing and below the partition level (tol_energy slack), and
/// segregating the last state changes its energy by less than 1%.
/// INCONCLUSIVE when a continuation step or the partition solve did not
/// converge.
System2Report verify_system2(const MaskPtr& wedge, double lambda, double eps2, const std::vector<double>& schedule,
                             const SolverConfig& cfg);

// ----------------------------------------------------------------- lambda0

struct Lambda0Row {
  double lambda = 0.0;
  double scaled = 0.0;
};

struct Lambda0Scan {
  double lambda1 = 0.0;
  /// -alpha |Omega| (1 - 1 / (2k)).
  double level = 0.0;
  std::vector<Lambda0Row> rows;
  std::optional<double> lambda0;
};

/// Smallest lambda on the grid 1.05 lambda1 * 1.3^j (up to lambda_max) whose
/// best-found lambda^{-1} min J_1 lies below -alpha |Omega| (1 - 1/(2k)).
Lambda0Scan estimate_lambda0(const MaskPtr& mask, int k, double lambda_max, const SolverConfig& cfg);

/// J_1(u_1) < -alpha lambda |Omega| / (2k) (1 - slack) for the first species.
bool gamma_bound_holds(const System& sys, double slack = 0.01);

}  // namespace seglab
