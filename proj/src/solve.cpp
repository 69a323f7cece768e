#include "seglab/solve.hpp"

#include "seglab/fields.hpp"
#include "seglab/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

namespace seglab {

void SolverConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("solver: max_iters must be >= 1");
  if (!(tol_energy > 0)) throw std::invalid_argument("solver: tol_energy must be positive");
  if (tol_residual && !(*tol_residual > 0)) throw std::invalid_argument("solver: tol_residual must be positive");
  if (step0 && !(*step0 > 0)) throw std::invalid_argument("solver: step0 must be positive");
  if (!(armijo.shrink > 0 && armijo.shrink < 1)) throw std::invalid_argument("solver: armijo shrink must lie in (0, 1)");
  if (!(armijo.sufficient > 0 && armijo.sufficient < 1))
    throw std::invalid_argument("solver: armijo sufficient-decrease constant must lie in (0, 1)");
  if (!(armijo.growth >= 1)) throw std::invalid_argument("solver: armijo growth must be >= 1");
  if (restarts < 0) throw std::invalid_argument("solver: restarts must be >= 0");
  if (coexist_eta && !(*coexist_eta > 0)) throw std::invalid_argument("solver: coexist_eta must be positive");
  if (stall_window < 1) throw std::invalid_argument("solver: stall_window must be >= 1");
  if (max_outer < 1) throw std::invalid_argument("solver: max_outer must be >= 1");
  if (jobs < 1) throw std::invalid_argument("solver: jobs must be >= 1");
}

double SolverConfig::eta(const System& sys, int i) const {
  if (coexist_eta) return *coexist_eta;
  return 1e-3 * sys.family.beta(i) * std::sqrt(sys.mask->measure());
}

int MinimizeResult::alive_count() const { return static_cast<int>(std::count(alive.begin(), alive.end(), true)); }

double smooth_cutoff(double s) {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  const double t = s - 1.0;
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

System with_fields(const System& prototype, const FieldSet<double>& u) {
  System out = prototype;
  out.u = u;
  return out;
}

FieldSet<double> segregate(const FieldSet<double>& u) {
  FieldSet<double> out = FieldSet<double>::Zero(u.rows(), u.cols());
  for (Eigen::Index p = 0; p < u.rows(); ++p) {
    Eigen::Index best = -1;
    double value = 0.0;
    for (Eigen::Index i = 0; i < u.cols(); ++i)
      if (u(p, i) > value) {
        value = u(p, i);
        best = i;
      }
    if (best >= 0) out(p, best) = value;
  }
  return out;
}

bool is_segregated(const FieldSet<double>& u) {
  for (Eigen::Index p = 0; p < u.rows(); ++p) {
    int nonzero = 0;
    for (Eigen::Index i = 0; i < u.cols(); ++i) nonzero += u(p, i) != 0.0;
    if (nonzero > 1) return false;
  }
  return true;
}

std::vector<bool> alive_flags(const System& sys, const SolverConfig& cfg) {
  std::vector<bool> out(static_cast<std::size_t>(sys.species()));
  for (int i = 0; i < sys.species(); ++i)
    out[static_cast<std::size_t>(i)] = l2_mass(*sys.mask, sys.u.col(i)) > cfg.eta(sys, i);
  return out;
}

double projected_residual(const FieldSet<double>& u, const FieldSet<double>& grad, const FieldSet<double>& upper) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i)
    for (Eigen::Index p = 0; p < u.rows(); ++p) {
      const double cap = upper(p, i);
      if (!(cap > 0)) continue;
      const double g = grad(p, i);
      double v;
      if (u(p, i) <= 0.0)
        v = std::max(-g, 0.0);
      else if (u(p, i) >= cap)
        v = std::max(g, 0.0);
      else
        v = std::abs(g);
      r = std::max(r, v);
    }
  return r;
}

FieldSet<double> species_caps(const System& sys) {
  FieldSet<double> caps(sys.mask->size(), sys.species());
  for (int i = 0; i < sys.species(); ++i) caps.col(i).setConstant(sys.family.beta(i));
  return caps;
}

namespace {

struct DescentOutcome {
  int iters = 0;
  bool converged = false;
  double residual = 0.0;
};

// Projected gradient descent on 0 <= u <= upper with Armijo backtracking.
// With acceleration the gradient step is taken from an extrapolated point;
// a step that would raise the energy above the current iterate is rejected
// and the momentum restarted, so accepted energies never increase. Energy
// comparisons use energy_change, which resolves decreases far below the
// rounding level of the total.
DescentOutcome projected_descent(System& sys, const FieldSet<double>& upper, const SolverConfig& cfg,
                                 std::vector<double>& trace) {
  const double h = sys.mask->h();
  const double h2 = h * h;
  const double tol_res = cfg.residual_tolerance(sys.lambda);
  const double step_init = cfg.initial_step(h);
  const double step_floor = step_init * 1e-14;
  double step = step_init;

  FieldSet<double> x = sys.u.max(0.0).min(upper);
  sys.u = x;
  FieldSet<double> gx;
  double ex = evaluate_system(sys, &gx).total;
  if (!std::isfinite(ex)) throw NonFiniteEnergy("energy is not finite at the initial state");
  bool gx_current = true;
  trace.push_back(ex);

  System trial = sys;
  FieldSet<double> x_prev = x;
  FieldSet<double> y, gy, xn;
  double t = 1.0;
  double momentum = 0.0;
  int stall = 0;
  DescentOutcome out;

  auto refresh_gradient = [&] {
    if (gx_current) return;
    trial.u = x;
    evaluate_system(trial, &gx);
    gx_current = true;
  };
  auto restart = [&] {
    momentum = 0.0;
    t = 1.0;
  };

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    // Energy of the step origin relative to x.
    double ey = 0.0;
    const FieldSet<double>* yp = &x;
    const FieldSet<double>* gyp = &gx;
    if (momentum > 0.0) {
      y = (x + momentum * (x - x_prev)).max(0.0).min(upper);
      trial.u = y;
      evaluate_system(trial, &gy);
      ey = energy_change(sys, x, y);
      if (!std::isfinite(ey)) {
        restart();
        continue;
      }
      yp = &y;
      gyp = &gy;
    } else {
      refresh_gradient();
    }

    bool accepted = false;
    double en = 0.0;
    while (step >= step_floor) {
      xn = (*yp - step * *gyp).max(0.0).min(upper);
      const double change = energy_change(sys, *yp, xn);
      const double slope = h2 * (*gyp * (xn - *yp)).sum();
      if (std::isfinite(change) && change <= cfg.armijo.sufficient * slope) {
        accepted = true;
        en = ey + change;
        break;
      }
      step *= cfg.armijo.shrink;
    }
    if (!accepted) {
      if (momentum > 0.0) {
        restart();
        step = step_init;
        continue;
      }
      // Step underflow at the iterate itself: no further decrease is resolvable.
      break;
    }
    if (momentum > 0.0) {
      en = energy_change(sys, x, xn);
      if (en > 0.0) {
        restart();
        continue;
      }
    }

    std::swap(x_prev, x);
    x = xn;
    ex += en;
    gx_current = false;
    if (cfg.accelerate) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      momentum = (t - 1.0) / t_next;
      t = t_next;
    }
    step *= cfg.armijo.growth;
    trace.push_back(ex);

    const double rel = -en / std::max(std::abs(ex), std::numeric_limits<double>::min());
    stall = rel < cfg.tol_energy ? stall + 1 : 0;
    if (stall >= cfg.stall_window && stall % cfg.stall_window == 0) {
      refresh_gradient();
      out.residual = projected_residual(x, gx, upper);
      if (out.residual <= tol_res) {
        out.converged = true;
        out.iters = it + 1;
        sys.u = x;
        return out;
      }
    }
  }

  refresh_gradient();
  out.residual = projected_residual(x, gx, upper);
  // Underflow counts as convergence only if the residual is already small.
  out.converged = it < cfg.max_iters && out.residual <= tol_res;
  out.iters = std::min(it + 1, cfg.max_iters);
  sys.u = x;
  return out;
}

MinimizeResult make_result(System sys, const SolverConfig& cfg, const DescentOutcome& d, std::vector<double> trace) {
  MinimizeResult r;
  r.report = energy_total(sys);
  r.alive = alive_flags(sys, cfg);
  r.system = std::move(sys);
  r.iters = d.iters;
  r.converged = d.converged;
  r.residual = d.residual;
  r.energy_trace = std::move(trace);
  return r;
}

// Owner of every node: the species with the largest positive u_i / cap_i
// (lowest index on ties); nodes where all species vanish go to the nearest
// owned node by breadth-first search, and components with no owned node to
// species 0.
std::vector<int> assign_labels(const DomainMask& mask, const FieldSet<double>& u, const FieldSet<double>& caps) {
  const Eigen::Index n = mask.size();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::deque<Eigen::Index> queue;
  for (Eigen::Index p = 0; p < n; ++p) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < u.cols(); ++i)
      if (u(p, i) / caps(p, i) > value) {
        value = u(p, i) / caps(p, i);
        label[static_cast<std::size_t>(p)] = static_cast<int>(i);
      }
    if (label[static_cast<std::size_t>(p)] >= 0) queue.push_back(p);
  }
  const auto& nb = mask.neighbors();
  while (!queue.empty()) {
    const Eigen::Index p = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      const int q = nb(d, p);
      if (q >= 0 && label[static_cast<std::size_t>(q)] < 0) {
        label[static_cast<std::size_t>(q)] = label[static_cast<std::size_t>(p)];
        queue.push_back(q);
      }
    }
  }
  for (int& l : label)
    if (l < 0) l = 0;
  return label;
}

constexpr int kRoundIters = 50;
constexpr int kMaxRoundIters = 3200;
constexpr int kSweepPasses = 8;

FieldSet<double> owner_caps(const FieldSet<double>& caps, const std::vector<int>& label) {
  FieldSet<double> out = FieldSet<double>::Zero(caps.rows(), caps.cols());
  for (Eigen::Index p = 0; p < caps.rows(); ++p) {
    const int i = label[static_cast<std::size_t>(p)];
    out(p, i) = caps(p, i);
  }
  return out;
}

// argmin over [0, cap] of psi(v) = sum_d (v - m_d)^2 / 2 - c F_j(v).
template <typename Psi>
std::pair<double, double> minimize_node(const Psi& psi, double cap) {
  constexpr int kSamples = 32;
  double best_v = 0.0;
  double best = psi(0.0);
  int best_k = 0;
  for (int s = 1; s <= kSamples; ++s) {
    const double v = cap * s / kSamples;
    const double value = psi(v);
    if (value < best) {
      best = value;
      best_v = v;
      best_k = s;
    }
  }
  double a = cap * std::max(best_k - 1, 0) / kSamples;
  double b = cap * std::min(best_k + 1, kSamples) / kSamples;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = psi(c), fd = psi(d);
  for (int it = 0; it < 80 && b - a > 1e-15 * cap; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = psi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = psi(d);
    }
  }
  const double v = 0.5 * (a + b);
  const double value = psi(v);
  if (value < best) return {v, value};
  return {best_v, best};
}

// One Gauss-Seidel pass over the nodes: hand node p from its owner to a
// neighbouring owner when the exact change of the free energy is below
// -threshold. Returns the number of moved nodes.
int interface_sweep(System& sys, std::vector<int>& label, double threshold) {
  const DomainMask& mask = *sys.mask;
  const auto& nb = mask.neighbors();
  const double h2 = mask.h() * mask.h();
  const double lam = sys.lambda;
  const int k = sys.species();
  int moved = 0;
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    const int i = label[static_cast<std::size_t>(p)];
    const double a = sys.u(p, i);
    double remove = lam * h2 * sys.family.F(i, a);
    for (int d = 0; d < 4; ++d) {
      const double m = nb(d, p) >= 0 ? sys.u(nb(d, p), i) : 0.0;
      remove += 0.5 * (m * m - (a - m) * (a - m));
    }
    double best_delta = -threshold;
    int best_j = -1;
    double best_v = 0.0;
    std::array<bool, kMaxSpecies> tried{};
    for (int d = 0; d < 4; ++d) {
      const int q = nb(d, p);
      if (q < 0) continue;
      const int j = label[static_cast<std::size_t>(q)];
      if (j == i || tried[static_cast<std::size_t>(j)]) continue;
      tried[static_cast<std::size_t>(j)] = true;
      std::array<double, 4> m{};
      for (int e = 0; e < 4; ++e) m[static_cast<std::size_t>(e)] = nb(e, p) >= 0 ? sys.u(nb(e, p), j) : 0.0;
      auto psi = [&](double v) {
        double s = 0.0;
        for (double me : m) s += 0.5 * (v - me) * (v - me);
        return s - lam * h2 * sys.family.F(j, v);
      };
      const auto [v, value] = minimize_node(psi, sys.family.beta(j));
      const double delta = remove + value - psi(0.0);
      if (delta < best_delta) {
        best_delta = delta;
        best_j = j;
        best_v = v;
      }
    }
    if (best_j >= 0) {
      for (int s = 0; s < k; ++s) sys.u(p, s) = 0.0;
      sys.u(p, best_j) = best_v;
      label[static_cast<std::size_t>(p)] = best_j;
      ++moved;
    }
  }
  return moved;
}

// Best merge of one species into another (capped at the receiver's beta);
// applied when the energy does not rise by more than the relative slack.
bool try_merge(System& sys, double energy, double slack) {
  const int k = sys.species();
  const FieldSet<double> caps = species_caps(sys);
  double best = std::numeric_limits<double>::infinity();
  FieldSet<double> best_u;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j || !(sys.u.col(i).maxCoeff() > 0) || !(sys.u.col(j).maxCoeff() > 0)) continue;
      System trial = sys;
      trial.u.col(i) = (sys.u.col(i) + sys.u.col(j)).min(caps.col(i));
      trial.u.col(j).setZero();
      const double e = energy_total(trial).total;
      if (e < best) {
        best = e;
        best_u = std::move(trial.u);
      }
    }
  if (best <= energy + slack * std::max(1.0, std::abs(energy))) {
    sys.u = std::move(best_u);
    return true;
  }
  return false;
}

}  // namespace

MinimizeResult minimize_free(const System& sys0, const SolverConfig& cfg) {
  cfg.validate();
  sys0.validate();
  System sys = sys0;
  std::vector<double> trace;
  const DescentOutcome d = projected_descent(sys, species_caps(sys), cfg, trace);
  return make_result(std::move(sys), cfg, d, std::move(trace));
}

MinimizeResult minimize_partition(const System& sys0, const SolverConfig& cfg) {
  cfg.validate();
  sys0.validate();
  System sys = sys0;
  sys.kappa = 0.0;
  const FieldSet<double> caps = species_caps(sys);
  sys.u = sys.u.max(0.0).min(caps);
  std::vector<int> label = assign_labels(*sys.mask, sys.u, caps);
  for (Eigen::Index p = 0; p < sys.u.rows(); ++p)
    for (int i = 0; i < sys.species(); ++i)
      if (i != label[static_cast<std::size_t>(p)]) sys.u(p, i) = 0.0;

  std::vector<double> trace;
  DescentOutcome total;
  bool settled = false;
  int rounds = 0;
  // Rounds interleave a bounded descent with interface moves; the iteration
  // budget max_iters is shared by all rounds.
  // Short rounds while the interface moves, growing ones once it is still.
  SolverConfig round_cfg = cfg;
  int round_iters = kRoundIters;
  for (int outer = 0; outer < cfg.max_outer && total.iters < cfg.max_iters; ++outer) {
    ++rounds;
    round_cfg.max_iters = std::min(round_iters, cfg.max_iters - total.iters);
    const DescentOutcome d = projected_descent(sys, owner_caps(caps, label), round_cfg, trace);
    total.iters += d.iters;
    total.converged = d.converged;
    total.residual = d.residual;

    const double energy = trace.back();
    int moved = 0;
    for (int pass = 0; pass < kSweepPasses; ++pass) {
      const int m = interface_sweep(sys, label, 1e-14 * std::max(1.0, std::abs(energy)));
      moved += m;
      if (m == 0) break;
    }
    round_iters = moved > 0 ? kRoundIters : std::min(4 * round_iters, kMaxRoundIters);
    bool merged = false;
    if (moved == 0 && d.converged) merged = try_merge(sys, energy, 1e-12);
    std::vector<int> relabeled = assign_labels(*sys.mask, sys.u, caps);
    if (moved == 0 && !merged && relabeled == label && d.converged) {
      settled = true;
      break;
    }
    label = std::move(relabeled);
  }
  if (!settled) total.converged = false;
  MinimizeResult out = make_result(std::move(sys), cfg, total, std::move(trace));
  out.rounds = rounds;
  return out;
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Copy {
  Field<double> values;
  Point center;
  double radius = 0.0;
};

// amp * base((x - x0) / scale) on the interior nodes; empty when the scaled
// support leaves the mask or touches a blocked node.
std::optional<Copy> place_copy(const DomainMask& mask, const Field<double>& base, const Point& base_lo,
                               const Point& base_hi, const Point& base_center, double scale, double amp,
                               const Point& x0, const std::vector<char>& blocked) {
  const Grid& grid = mask.grid();
  const Point lo = x0 + scale * base_lo;
  const Point hi = x0 + scale * base_hi;
  const Point c0 = grid.corner();
  const int i0 = static_cast<int>(std::floor((lo.x() - c0.x()) / grid.h)) - 1;
  const int i1 = static_cast<int>(std::ceil((hi.x() - c0.x()) / grid.h)) + 1;
  const int j0 = static_cast<int>(std::floor((lo.y() - c0.y()) / grid.h)) - 1;
  const int j1 = static_cast<int>(std::ceil((hi.y() - c0.y()) / grid.h)) + 1;
  Copy out;
  out.values = Field<double>::Zero(mask.size());
  out.center = x0 + scale * base_center;
  bool any = false;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const Point x = grid.node(i, j);
      const Point xs = (x - x0) / scale;
      if (!mask.contains(xs)) continue;
      const double v = sample_bilinear(mask, base, xs);
      if (!(v > 0)) continue;
      const int p = (i >= 0 && j >= 0 && i < grid.nx && j < grid.ny) ? mask.index_of(i, j) : -1;
      if (p < 0 || blocked[static_cast<std::size_t>(p)]) return std::nullopt;
      out.values[p] = amp * v;
      out.radius = std::max(out.radius, (x - out.center).norm());
      any = true;
    }
  if (!any) return std::nullopt;
  out.radius += grid.h;
  return out;
}

}  // namespace

InitializerSet default_initializers(const MaskPtr& mask, const ScaledFamily<double>& fam, double lambda,
                                    const SolverConfig& cfg) {
  if (!mask) throw std::invalid_argument("initializers: no mask");
  if (!(lambda > 0)) throw std::invalid_argument("initializers: lambda must be positive");
  cfg.validate();
  const Eigen::Index n = mask->size();
  const int k = fam.k;
  InitializerSet set;

  const Eigen::ArrayXd dist = distance_to_boundary(*mask);
  const double beta0 = fam.beta(0);
  const Field<double> bump = (std::sqrt(lambda) * dist).min(beta0);

  FieldSet<double> single = FieldSet<double>::Zero(n, k);
  single.col(0) = bump;
  set.starts.push_back({"single", single});

  if (k >= 2) {
    Point lo = Point::Constant(std::numeric_limits<double>::infinity());
    Point hi = -lo;
    Point centroid = Point::Zero();
    double weight = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      const Point x = mask->position(p);
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
      centroid += bump[p] * x;
      weight += bump[p];
    }
    lo.array() -= mask->h();
    hi.array() += mask->h();
    centroid /= weight;

    FieldSet<double> seeded = FieldSet<double>::Zero(n, k);
    Field<double> host = bump;
    std::vector<char> blocked(static_cast<std::size_t>(n), 0);
    std::vector<Copy> copies;
    bool ok = true;
    const auto& nb = mask->neighbors();
    for (int i = 1; i < k && ok; ++i) {
      const double scale = fam.scaled(i) ? fam.eps[static_cast<std::size_t>(i - 1)] : 1.0 / (k + 1);
      const double amp = fam.beta(i) / beta0;
      std::optional<Copy> copy;
      if (mask->kind() == DomainKind::wedge && i == 1) {
        copy = place_copy(*mask, bump, lo, hi, centroid, scale, amp, Point::Zero(), blocked);
        if (copy) {
          for (Eigen::Index p = 0; p < n; ++p) host[p] *= smooth_cutoff(mask->position(p).x() / scale);
          copy->radius = 0.0;
        }
      } else {
        // Candidate centres ordered by clearance from the boundary and from
        // earlier copies; the first feasible one wins.
        const int stride = std::max<int>(1, static_cast<int>(std::sqrt(static_cast<double>(n)) / 48));
        std::vector<std::pair<double, Eigen::Index>> order;
        for (Eigen::Index p = 0; p < n; ++p) {
          if (mask->node_i(p) % stride || mask->node_j(p) % stride) continue;
          double score = dist[p];
          for (const Copy& c : copies) score = std::min(score, (mask->position(p) - c.center).norm() - c.radius);
          order.emplace_back(-score, p);
        }
        std::stable_sort(order.begin(), order.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& cand : order) {
          const Point x0 = mask->position(cand.second) - scale * centroid;
          copy = place_copy(*mask, bump, lo, hi, centroid, scale, amp, x0, blocked);
          if (copy) break;
        }
        if (copy)
          for (Eigen::Index p = 0; p < n; ++p)
            host[p] *= smooth_cutoff((mask->position(p) - copy->center).norm() / copy->radius);
      }
      if (!copy) {
        ok = false;
        break;
      }
      seeded.col(i) = copy->values;
      for (Eigen::Index p = 0; p < n; ++p) {
        if (!(copy->values[p] > 0)) continue;
        blocked[static_cast<std::size_t>(p)] = 1;
        for (int d = 0; d < 4; ++d)
          if (nb(d, p) >= 0) blocked[static_cast<std::size_t>(nb(d, p))] = 1;
      }
      copies.push_back(std::move(*copy));
    }
    if (ok) {
      seeded.col(0) = host;
      set.starts.push_back({"seeded", seeded});
    } else {
      set.warnings.push_back("initializers: no interior point admits the rescaled copies; seeded start omitted");
    }
  }

  FieldSet<double> uniform(n, k);
  for (int i = 0; i < k; ++i) uniform.col(i).setConstant(fam.beta(i) / 2);
  set.starts.push_back({"uniform", uniform});

  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(cfg.seed + 3 + static_cast<std::uint64_t>(r));
    FieldSet<double> u(n, k);
    for (int i = 0; i < k; ++i) {
      const double cap = fam.beta(i);
      for (Eigen::Index p = 0; p < n; ++p) u(p, i) = cap * uniform01(rng);
    }
    set.starts.push_back({"random-" + std::to_string(r), std::move(u)});
  }
  return set;
}

MultistartResult minimize_multistart(const System& prototype, const std::vector<Start>& starts, SolveMode mode,
                                     const SolverConfig& cfg) {
  if (starts.empty()) throw std::invalid_argument("multistart: no starting points");
  cfg.validate();
  MultistartResult out;
  out.runs.resize(starts.size());
  parallel_for(starts.size(), cfg.jobs, [&](std::size_t s) {
    const System sys = with_fields(prototype, starts[s].u);
    MinimizeResult r = mode == SolveMode::free ? minimize_free(sys, cfg) : minimize_partition(sys, cfg);
    r.start_label = starts[s].label;
    out.runs[s] = std::move(r);
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < out.runs.size(); ++s)
    if (out.runs[s].report.total < out.runs[best].report.total) best = s;
  out.best = out.runs[best];
  return out;
}

MultistartResult minimize_multistart(const System& prototype, SolveMode mode, const SolverConfig& cfg) {
  InitializerSet init = default_initializers(prototype.mask, prototype.family, prototype.lambda, cfg);
  MultistartResult out = minimize_multistart(prototype, init.starts, mode, cfg);
  out.warnings = std::move(init.warnings);
  return out;
}

std::vector<ContinuationStep> kappa_continuation(const System& sys0, const std::vector<double>& schedule,
                                                 const SolverConfig& cfg) {
  if (schedule.empty()) throw std::invalid_argument("continuation: empty kappa schedule");
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    if (!(schedule[s] >= 0)) throw std::invalid_argument("continuation: kappa values must be nonnegative");
    if (s > 0 && !(schedule[s] > schedule[s - 1]))
      throw std::invalid_argument("continuation: kappa schedule must be strictly increasing");
  }
  std::vector<ContinuationStep> out;
  System current = sys0;
  for (double kappa : schedule) {
    current.kappa = kappa;
    ContinuationStep step;
    step.kappa = kappa;
    step.result = minimize_free(current, cfg);
    step.overlap = step.result.report.interaction;
    step.level = step.result.report.total;
    current = step.result.system;
    out.push_back(std::move(step));
  }
  return out;
}

MergeCheck merge_test(const System& sys, double slack) {
  sys.validate();
  MergeCheck out;
  out.original = energy_total(sys).total;
  System merged = sys;
  merged.u.setZero();
  merged.u.col(0) = sys.u.rowwise().sum();
  out.merged = energy_total(merged).total;
  out.holds = out.merged <= out.original + slack * std::max(1.0, std::abs(out.original));
  return out;
}

}  // namespace seglab
