#include "seglab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace seglab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

System logistic_system(const MaskPtr& mask, int k, double lambda, double kappa, std::optional<double> eps) {
  System sys;
  sys.mask = mask;
  sys.family = eps ? ScaledFamily<double>(logistic<double>(), k, std::vector<double>(static_cast<std::size_t>(k - 1), *eps))
                   : ScaledFamily<double>::same_law(logistic<double>(), k);
  sys.coupling = coupling_quartic<double>(k);
  sys.lambda = lambda;
  sys.kappa = kappa;
  sys.u = FieldSet<double>::Zero(mask->size(), k);
  return sys;
}

namespace {

void require_above_lambda1(const DomainMask& mask, double lambda) {
  const double l1 = lambda1(mask);
  if (!(lambda > l1)) {
    std::ostringstream msg;
    msg << "lambda = " << lambda << " does not exceed lambda1 = " << l1;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ExtinctionReport verify_extinction_identical(const MaskPtr& mask, int k, double lambda, const SolverConfig& cfg) {
  if (k < 1) throw std::invalid_argument("extinction: k must be >= 1");
  require_above_lambda1(*mask, lambda);
  ExtinctionReport rep;
  const System proto = logistic_system(mask, k, lambda, 0.0, std::nullopt);
  rep.runs = minimize_multistart(proto, SolveMode::partition, cfg);
  bool ok = true;
  int worst = 0;
  for (const MinimizeResult& r : rep.runs.runs) {
    rep.merges.push_back(merge_test(r.system));
    ok = ok && r.alive_count() <= 1 && rep.merges.back().holds;
    worst = std::max(worst, r.alive_count());
  }
  std::ostringstream msg;
  msg << "runs=" << rep.runs.runs.size() << " max_alive=" << worst << " best=" << rep.runs.best.start_label;
  if (!rep.runs.best.converged) {
    rep.verdict = Verdict::inconclusive;
    msg << " best run did not converge";
  } else {
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
  }
  rep.message = msg.str();
  return rep;
}

ThresholdScan scan_epsilon_threshold(const MaskPtr& mask, int k, double lambda, double kappa,
                                     const std::vector<double>& eps_grid, const SolverConfig& cfg,
                                     const ScanOptions& opts) {
  if (k < 2) throw std::invalid_argument("scan: needs k >= 2");
  if (eps_grid.empty()) throw std::invalid_argument("scan: empty eps grid");
  for (std::size_t s = 0; s < eps_grid.size(); ++s) {
    if (!(eps_grid[s] > 0 && eps_grid[s] < 1)) throw std::invalid_argument("scan: eps values must lie in (0, 1)");
    if (s > 0 && !(eps_grid[s] > eps_grid[s - 1])) throw std::invalid_argument("scan: eps grid must be increasing");
  }
  if (opts.bisect_steps < 0) throw std::invalid_argument("scan: bisect_steps must be >= 0");

  ThresholdScan scan;
  if (kappa > 0) scan.eps_star = std::sqrt(lambda / (6.0 * k * k * kappa));

  auto run = [&](double eps, bool bisection) {
    const System proto = logistic_system(mask, k, lambda, kappa, eps);
    ScanPoint pt;
    pt.eps = eps;
    pt.bisection = bisection;
    pt.best = minimize_multistart(proto, SolveMode::free, cfg).best;
    pt.alive = pt.best.alive_count();
    pt.coexist = pt.alive == k;
    scan.points.push_back(pt);
    return pt.coexist;
  };

  std::optional<std::size_t> first_failure;
  for (std::size_t s = 0; s < eps_grid.size(); ++s) {
    const bool ok = run(eps_grid[s], false);
    if (!ok && !first_failure) {
      first_failure = s;
      if (opts.stop_at_failure) break;
    }
  }

  std::ostringstream msg;
  if (first_failure && *first_failure == 0) {
    scan.degenerate = true;
    msg << "no coexistence at the smallest eps " << eps_grid.front();
  } else {
    const std::size_t last_ok = first_failure ? *first_failure - 1 : eps_grid.size() - 1;
    scan.grid_threshold = eps_grid[last_ok];
    double lo = eps_grid[last_ok];
    if (first_failure) {
      double hi = eps_grid[*first_failure];
      for (int b = 0; b < opts.bisect_steps; ++b) {
        const double mid = 0.5 * (lo + hi);
        if (run(mid, true))
          lo = mid;
        else
          hi = mid;
      }
    }
    scan.threshold = lo;
    msg << "grid_threshold=" << *scan.grid_threshold << " threshold=" << lo;
    if (!first_failure) msg << " (coexistence at every grid value; threshold is a lower bound)";
  }

  if (scan.eps_star) {
    msg << " eps_star=" << *scan.eps_star;
    bool ok = scan.threshold && *scan.threshold >= *scan.eps_star;
    for (const ScanPoint& pt : scan.points)
      if (!pt.bisection && pt.eps >= *scan.eps_star && scan.threshold && pt.eps <= *scan.threshold)
        ok = ok && pt.coexist;
    scan.verdict = ok ? Verdict::pass : Verdict::fail;
  } else {
    bool ok = true;
    for (const ScanPoint& pt : scan.points) ok = ok && pt.coexist;
    scan.verdict = ok ? Verdict::pass : Verdict::fail;
  }
  std::vector<std::pair<double, int>> by_eps;
  for (const ScanPoint& pt : scan.points) by_eps.emplace_back(pt.eps, pt.alive);
  std::sort(by_eps.begin(), by_eps.end());
  for (std::size_t s = 1; s < by_eps.size(); ++s)
    if (by_eps[s].second < by_eps[s - 1].second) scan.monotonicity_violated = true;
  if (scan.monotonicity_violated) msg << " alive count decreases with eps";
  scan.message = msg.str();
  return scan;
}

LimitTable verify_limiti_asymptotics(const MaskPtr& mask, const std::vector<double>& lambdas, const SolverConfig& cfg,
                                     double floor_slack, double last_tol) {
  if (lambdas.empty()) throw std::invalid_argument("limit: empty lambda list");
  for (std::size_t s = 1; s < lambdas.size(); ++s)
    if (!(lambdas[s] > lambdas[s - 1])) throw std::invalid_argument("limit: lambda list must be increasing");
  require_above_lambda1(*mask, lambdas.front());

  LimitTable table;
  const Nonlinearity<double> g = logistic<double>();
  table.target = -g.alpha * domain_area(*mask);
  for (double lambda : lambdas) {
    LimitRow row;
    row.lambda = lambda;
    row.best = minimize_multistart(logistic_system(mask, 1, lambda, 0.0, std::nullopt), SolveMode::free, cfg).best;
    row.scaled = row.best.report.total / lambda;
    table.rows.push_back(std::move(row));
  }
  table.above_floor = true;
  table.decreasing = true;
  for (std::size_t s = 0; s < table.rows.size(); ++s) {
    table.above_floor = table.above_floor && table.rows[s].scaled >= table.target * (1.0 + floor_slack);
    if (s > 0) table.decreasing = table.decreasing && table.rows[s].scaled < table.rows[s - 1].scaled;
  }
  const double last = table.rows.back().scaled;
  table.last_relative_gap = std::abs(last - table.target) / std::abs(table.target);
  table.last_within = table.last_relative_gap <= last_tol;
  table.verdict = table.above_floor && table.decreasing && table.last_within ? Verdict::pass : Verdict::fail;
  std::ostringstream msg;
  msg << "target=" << table.target << " last=" << last << " relative_gap=" << table.last_relative_gap
      << " above_floor=" << table.above_floor << " decreasing=" << table.decreasing;
  table.message = msg.str();
  return table;
}

double wedge_gamma(double m, double lambda, double gmax) {
  const double denom = 2.0 * (m * m * (kDim - 1) - 1.0);
  if (!(denom > 0)) throw std::invalid_argument("wedge bound: needs m > 1");
  return lambda * gmax / denom;
}

WedgeBoundReport check_wedge_bound(const DomainMask& wedge, const Field<double>& u, double lambda, double gmax,
                                   double tol_factor) {
  if (wedge.kind() != DomainKind::wedge) throw std::invalid_argument("wedge bound: mask is not a wedge");
  if (u.size() != wedge.size()) throw std::invalid_argument("wedge bound: field size does not match mask");
  const double m = wedge.shape().m;
  WedgeBoundReport rep;
  rep.gamma = wedge_gamma(m, lambda, gmax);
  rep.tolerance = tol_factor * wedge.h() * rep.gamma;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < wedge.size(); ++p) {
    const Point x = wedge.position(p);
    const double excess = u[p] - rep.gamma * (x.x() * x.x() - m * m * x.y() * x.y());
    if (excess > rep.max_excess) {
      rep.max_excess = excess;
      rep.worst = x;
    }
  }
  rep.verdict = rep.max_excess <= rep.tolerance ? Verdict::pass : Verdict::fail;
  std::ostringstream msg;
  msg << "gamma=" << rep.gamma << " max_excess=" << rep.max_excess << " tolerance=" << rep.tolerance << " at ("
      << rep.worst.x() << ", " << rep.worst.y() << ")";
  rep.message = msg.str();
  return rep;
}

WedgeBoundReport verify_wedge_bound(const MaskPtr& wedge, double lambda, const SolverConfig& cfg) {
  const System proto = logistic_system(wedge, 1, lambda, 0.0, std::nullopt);
  MinimizeResult best = minimize_multistart(proto, SolveMode::free, cfg).best;
  WedgeBoundReport rep = check_wedge_bound(*wedge, best.system.u.col(0), lambda, proto.family.base.gmax);
  if (!best.converged) {
    rep.verdict = Verdict::inconclusive;
    rep.message += " minimizer did not converge";
  }
  rep.minimizer = std::move(best);
  return rep;
}

Field<double> apply_cutoff(const DomainMask& mask, const Field<double>& u, double delta) {
  if (delta < 0) throw std::invalid_argument("cutoff: delta must be nonnegative");
  Field<double> out = u;
  if (delta == 0) return out;
  for (Eigen::Index p = 0; p < mask.size(); ++p) out[p] *= smooth_cutoff(mask.position(p).x() / delta);
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope: need two or more points");
  double mx = 0, my = 0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    mx += std::log(x[s]);
    my += std::log(y[s]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    const double dx = std::log(x[s]) - mx;
    sxy += dx * (std::log(y[s]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

CutoffReport verify_cutoff_scaling(const MaskPtr& wedge, double lambda, const std::vector<double>& deltas,
                                   const SolverConfig& cfg) {
  if (wedge->kind() != DomainKind::wedge) throw std::invalid_argument("cutoff: mask is not a wedge");
  if (deltas.size() < 4) throw std::invalid_argument("cutoff: needs at least four values of delta");
  for (double d : deltas) {
    if (d < 2 * wedge->h()) throw std::invalid_argument("cutoff: delta below 2h is not resolved by the mesh");
    if (d > 0.5) throw std::invalid_argument("cutoff: delta must not exceed 1/2");
  }
  const System proto = logistic_system(wedge, 1, lambda, 0.0, std::nullopt);
  MinimizeResult best = minimize_multistart(proto, SolveMode::free, cfg).best;
  const Field<double> u = best.system.u.col(0);
  const double base = single_species_energy<double>({wedge, u}, 0, proto.family, lambda);

  CutoffReport rep;
  std::vector<double> xs, ys;
  for (double d : deltas) {
    const Field<double> cut = apply_cutoff(*wedge, u, d);
    CutoffRow row{d, single_species_energy<double>({wedge, cut}, 0, proto.family, lambda) - base};
    rep.rows.push_back(row);
    if (row.dJ > 0) {
      xs.push_back(d);
      ys.push_back(row.dJ);
    } else {
      rep.nonpositive.push_back(d);
    }
  }
  std::ostringstream msg;
  if (xs.size() < 2) {
    rep.verdict = Verdict::inconclusive;
    msg << "fewer than two positive energy changes";
  } else {
    rep.slope = loglog_slope(xs, ys);
    rep.verdict = rep.slope >= kDim + 1 ? Verdict::pass : Verdict::fail;
    msg << "slope=" << rep.slope << " reference=" << kDim + 2;
  }
  if (!rep.nonpositive.empty()) msg << " nonpositive_changes=" << rep.nonpositive.size();
  if (!best.converged) {
    rep.verdict = Verdict::inconclusive;
    msg << " minimizer did not converge";
  }
  rep.message = msg.str();
  rep.minimizer = std::move(best);
  return rep;
}

System2Report verify_system2(const MaskPtr& wedge, double lambda, double eps2, const std::vector<double>& schedule,
                             const SolverConfig& cfg) {
  if (schedule.empty()) throw std::invalid_argument("system2: empty kappa schedule");
  System2Report rep;
  System proto = logistic_system(wedge, 2, lambda, schedule.front(), eps2);
  const MinimizeResult first = minimize_multistart(proto, SolveMode::free, cfg).best;
  proto.u = first.system.u;
  rep.steps = kappa_continuation(proto, schedule, cfg);
  rep.partition = minimize_multistart(proto, SolveMode::partition, cfg).best;
  rep.partition_level = rep.partition.report.total;

  const double tol = cfg.tol_energy;
  const double c = rep.partition_level;
  rep.all_alive = true;
  rep.levels_monotone = true;
  rep.below_partition = true;
  for (std::size_t s = 0; s < rep.steps.size(); ++s) {
    const ContinuationStep& st = rep.steps[s];
    rep.all_alive = rep.all_alive && st.result.alive_count() == 2;
    if (s > 0) {
      const double prev = rep.steps[s - 1].level;
      rep.levels_monotone = rep.levels_monotone && st.level >= prev - tol * std::max(1.0, std::abs(prev));
    }
    rep.below_partition = rep.below_partition && st.level <= c + tol * std::max(1.0, std::abs(c));
    if (!st.result.converged && !rep.failed_kappa) rep.failed_kappa = st.kappa;
  }
  const double first_overlap = rep.steps.front().overlap;
  const double last_overlap = rep.steps.back().overlap;
  rep.overlap_ratio = last_overlap > 0 ? first_overlap / last_overlap : std::numeric_limits<double>::infinity();
  rep.overlap_dropped = rep.overlap_ratio >= 1e3;

  const ContinuationStep& last = rep.steps.back();
  System projected = last.result.system;
  projected.u = segregate(projected.u);
  const double projected_energy = energy_total(projected).total;
  rep.projection_gap = std::abs(projected_energy - last.level) / std::abs(last.level);
  rep.gap_small = rep.projection_gap < 0.01;

  std::ostringstream msg;
  msg << "all_alive=" << rep.all_alive << " overlap_ratio=" << rep.overlap_ratio
      << " levels_monotone=" << rep.levels_monotone << " below_partition=" << rep.below_partition
      << " partition_level=" << c << " projection_gap=" << rep.projection_gap;
  if (rep.failed_kappa) {
    rep.verdict = Verdict::inconclusive;
    msg << " no convergence at kappa=" << *rep.failed_kappa;
  } else if (!rep.partition.converged) {
    rep.verdict = Verdict::inconclusive;
    msg << " partition solve did not converge";
  } else {
    const bool ok = rep.all_alive && rep.overlap_dropped && rep.levels_monotone && rep.below_partition && rep.gap_small;
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
  }
  rep.message = msg.str();
  return rep;
}

Lambda0Scan estimate_lambda0(const MaskPtr& mask, int k, double lambda_max, const SolverConfig& cfg) {
  if (k < 1) throw std::invalid_argument("lambda0: k must be >= 1");
  Lambda0Scan scan;
  scan.lambda1 = lambda1(*mask);
  const Nonlinearity<double> g = logistic<double>();
  scan.level = -g.alpha * domain_area(*mask) * (1.0 - 1.0 / (2.0 * k));
  for (double lambda = 1.05 * scan.lambda1; lambda <= lambda_max; lambda *= 1.3) {
    const MinimizeResult best =
        minimize_multistart(logistic_system(mask, 1, lambda, 0.0, std::nullopt), SolveMode::free, cfg).best;
    scan.rows.push_back({lambda, best.report.total / lambda});
    if (scan.rows.back().scaled < scan.level) {
      scan.lambda0 = lambda;
      break;
    }
  }
  return scan;
}

bool gamma_bound_holds(const System& sys, double slack) {
  const Report rep = energy_total(sys);
  const double bound = sys.family.base.alpha * sys.lambda * domain_area(*sys.mask) / (2.0 * sys.species());
  return rep.species_energy(0) < -bound * (1.0 - slack);
}

}  // namespace seglab
