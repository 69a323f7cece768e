// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only N,M,...] [--expect-fail N,M,...]
//
// Exit status is 0 when every criterion that is not listed in --expect-fail
// passes, 1 otherwise.

#include "seglab/lab.hpp"
#include "seglab/records.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace seglab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

// ------------------------------------------------------------------ oracles

double oracle_G(double t) { return t > 0 ? t * t * (0.5 - t / 3.0) : 0.0; }

// Potential of species i written out from the definition of the family.
double oracle_F(const ScaledFamily<double>& fam, int i, double s) {
  if (i == 0 || fam.identical) return oracle_G(s);
  const double e = fam.eps[static_cast<std::size_t>(i - 1)];
  const double k = fam.k;
  return oracle_G(std::sqrt(k) * s / e) / k;
}

// Discrete energy: half the sum of squared jumps over lattice edges touching an
// interior node, minus lambda h^2 sum F_i, plus kappa h^2 sum_{i<j} u_i^2 u_j^2.
long double oracle_energy(const System& sys, const FieldSet<double>& u) {
  const DomainMask& mask = *sys.mask;
  const int k = sys.species();
  const long double h2 = static_cast<long double>(mask.h()) * mask.h();
  long double dir = 0, pot = 0, inter = 0;
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    const int i = mask.node_i(p), j = mask.node_j(p);
    const int east = mask.index_of(i + 1, j), north = mask.index_of(i, j + 1);
    const bool west_out = mask.index_of(i - 1, j) < 0, south_out = mask.index_of(i, j - 1) < 0;
    for (int s = 0; s < k; ++s) {
      const long double v = u(p, s);
      const long double ve = east >= 0 ? u(east, s) : 0.0L;
      const long double vn = north >= 0 ? u(north, s) : 0.0L;
      dir += (v - ve) * (v - ve) + (v - vn) * (v - vn);
      if (west_out) dir += v * v;
      if (south_out) dir += v * v;
      pot += oracle_F(sys.family, s, u(p, s));
      for (int t = s + 1; t < k; ++t) inter += static_cast<long double>(u(p, s)) * u(p, s) * u(p, t) * u(p, t);
    }
  }
  return dir / 2 - sys.lambda * h2 * pot + sys.kappa * h2 * inter;
}

double oracle_bessel_j0_zero() {
  double x = 2.4;
  for (int it = 0; it < 50; ++it) x += std::cyl_bessel_j(0.0, x) / std::cyl_bessel_j(1.0, x);
  return x;
}

System random_system(const MaskPtr& mask, int k, std::mt19937_64& rng, bool identical) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::optional<double> eps;
  if (!identical) eps = 0.2 + 0.7 * unit(rng);
  return logistic_system(mask, k, 50 + 350 * unit(rng), 300 * unit(rng), eps);
}

bool in_box(const MinimizeResult& r) {
  for (int i = 0; i < r.system.species(); ++i) {
    const double b = r.system.family.beta(i);
    if (!(r.system.u.col(i).minCoeff() >= 0.0) || !(r.system.u.col(i).maxCoeff() <= b)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- criteria

Outcome gradient_consistency() {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 64);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    System sys = random_system(mask, 2 + trial % 2, rng, false);
    for (int i = 0; i < sys.species(); ++i) {
      std::uniform_real_distribution<double> d(0.05 * sys.family.beta(i), 0.95 * sys.family.beta(i));
      for (Eigen::Index p = 0; p < mask->size(); ++p) sys.u(p, i) = d(rng);
    }
    FieldSet<double> dir(sys.u.rows(), sys.u.cols());
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index p = 0; p < dir.size(); ++p) dir.data()[p] = n(rng);
    dir *= 0.01;
    const double analytic = mask->h() * mask->h() * (energy_gradient(sys) * dir).sum();
    const double t = 1e-4;
    const long double plus = oracle_energy(sys, sys.u + t * dir);
    const long double minus = oracle_energy(sys, sys.u - t * dir);
    const double fd = static_cast<double>((plus - minus) / (2 * t));
    worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
  }
  return {worst < 1e-6, "max relative error " + fmt(worst)};
}

Outcome eigenvalues() {
  const double square = lambda1(*build_rectangle(1, 1, 1.0 / 128));
  const double sq_ref = 2 * std::numbers::pi * std::numbers::pi;
  const double j = oracle_bessel_j0_zero();
  const double disc = lambda1(*build_disc(1, 1.0 / 128));
  const double sq_err = std::abs(square - sq_ref) / sq_ref;
  const double disc_err = std::abs(disc - j * j) / (j * j);
  return {sq_err < 0.005 && disc_err < 0.01, "square " + fmt(square, 8) + " (rel " + fmt(sq_err, 3) + "), disc " +
                                                 fmt(disc, 8) + " vs j01^2 = " + fmt(j * j, 8) + " (rel " +
                                                 fmt(disc_err, 3) + ")"};
}

Outcome truncation_and_merge() {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int clip_bad = 0, merge_bad = 0;
  double worst = -1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool merge_case = trial % 2 == 1;
    const int k = 2 + (trial / 2) % 2;
    System sys = random_system(mask, k, rng, merge_case);
    if (!merge_case) {
      for (int i = 0; i < k; ++i) {
        const double b = sys.family.beta(i);
        for (Eigen::Index p = 0; p < mask->size(); ++p) sys.u(p, i) = b * (-0.5 + 2.0 * unit(rng));
      }
      FieldSet<double> clipped = sys.u.max(0.0);
      for (int i = 0; i < k; ++i) clipped.col(i) = clipped.col(i).min(sys.family.beta(i));
      const long double before = oracle_energy(sys, sys.u);
      const long double after = oracle_energy(sys, clipped);
      const double excess = static_cast<double>((after - before) / std::max(1.0L, std::abs(before)));
      worst = std::max(worst, excess);
      if (excess > 1e-12) ++clip_bad;
    } else {
      // Disjoint supports: every node belongs to one species (or none).
      sys.u.setZero();
      const double blob = 0.05 + 0.3 * unit(rng);
      for (Eigen::Index p = 0; p < mask->size(); ++p) {
        const int owner = static_cast<int>(unit(rng) * (k + 1)) % (k + 1);
        const Point x = mask->position(p);
        const double v = std::abs(std::sin(7 * x.x() * (owner + 1)) * std::cos(5 * x.y())) * blob * 3;
        if (owner < k) sys.u(p, owner) = std::min(1.0, v);
      }
      FieldSet<double> merged = FieldSet<double>::Zero(sys.u.rows(), k);
      merged.col(0) = sys.u.rowwise().sum();
      const long double before = oracle_energy(sys, sys.u);
      const long double after = oracle_energy(sys, merged);
      const double excess = static_cast<double>((after - before) / std::max(1.0L, std::abs(before)));
      worst = std::max(worst, excess);
      const MergeCheck lib = merge_test(sys);
      if (excess > 1e-12 || !lib.holds) ++merge_bad;
    }
  }
  return {clip_bad == 0 && merge_bad == 0, "clip violations " + std::to_string(clip_bad) + ", merge violations " +
                                               std::to_string(merge_bad) + ", largest relative energy increase " + fmt(worst, 3)};
}

Outcome limit_asymptotics() {
  const LimitTable t = verify_limiti_asymptotics(build_rectangle(1, 1, 1.0 / 128), {50, 100, 200, 400, 800}, {});
  std::string rows;
  for (const LimitRow& r : t.rows) rows += " " + fmt(r.scaled, 5);
  return {t.verdict == Verdict::pass, "scaled minima" + rows + "; " + t.message};
}

Outcome box_and_wedge_bound() {
  // Box feasibility over a batch of free and partition solves.
  const MaskPtr disc = build_disc(1, 1.0 / 32);
  std::mt19937_64 rng(5);
  SolverConfig quick;
  quick.restarts = 2;
  int outputs = 0, outside = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const System proto = random_system(disc, 2 + trial % 2, rng, false);
    for (SolveMode mode : {SolveMode::free, SolveMode::partition}) {
      const MultistartResult ms = minimize_multistart(proto, mode, quick);
      for (const MinimizeResult& r : ms.runs) {
        ++outputs;
        if (!in_box(r)) ++outside;
      }
    }
  }
  // Parabola bound on the wedge, within two minutes.
  const double t0 = now();
  const MaskPtr wedge = build_wedge(2, 1.0 / 256);
  const MultistartResult ms = minimize_multistart(logistic_system(wedge, 1, 200, 0, std::nullopt), SolveMode::free, {});
  for (const MinimizeResult& r : ms.runs) {
    ++outputs;
    if (!in_box(r)) ++outside;
  }
  const WedgeBoundReport rep = check_wedge_bound(*wedge, ms.best.system.u.col(0), 200, 0.25);
  const double wedge_time = now() - t0;
  const bool ok = outside == 0 && rep.verdict == Verdict::pass && ms.best.converged && wedge_time < 120;
  return {ok, std::to_string(outside) + "/" + std::to_string(outputs) + " outputs outside the box; wedge " +
                  fmt(wedge_time, 4) + " s / 120 s; " + rep.message};
}

Outcome extinction() {
  const ExtinctionReport rep = verify_extinction_identical(build_rectangle(1, 1, 1.0 / 128), 3, 200, {});
  return {rep.verdict == Verdict::pass, rep.message};
}

ThresholdScan run_scan() {
  return scan_epsilon_threshold(build_disc(1, 1.0 / 64), 2, 200, 400,
                                {0.144, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}, {});
}

Outcome threshold(const ThresholdScan& scan) {
  std::string pts;
  for (const ScanPoint& p : scan.points) pts += " " + fmt(p.eps, 4) + ":" + std::to_string(p.alive);
  return {scan.verdict == Verdict::pass, "eps:alive" + pts + "; " + scan.message};
}

Outcome system2(const ThresholdScan& scan) {
  if (!scan.threshold) return {false, "no measured threshold from the scan"};
  const System2Report rep =
      verify_system2(build_wedge(2, 1.0 / 128), 200, *scan.threshold, {10, 30, 100, 300, 1000}, {});
  return {rep.verdict == Verdict::pass, "eps2=" + fmt(*scan.threshold, 6) + " " + to_string(rep.verdict) + " " +
                                            rep.message};
}

Outcome cutoff() {
  const CutoffReport rep =
      verify_cutoff_scaling(build_wedge(2, 1.0 / 256), 200, {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4}, {});
  std::string rows;
  for (const CutoffRow& r : rep.rows) rows += " " + fmt(r.delta, 4) + ":" + fmt(r.dJ, 4);
  return {rep.verdict == Verdict::pass, "delta:dJ" + rows + "; " + rep.message};
}

Outcome scaling_identity() {
  const double h = 1.0 / 128, eps = 0.25, lambda = 100;
  const int k = 2;
  const MaskPtr mask = build_rectangle(1, 1, h);
  const MinimizeResult best =
      minimize_multistart(logistic_system(mask, 1, lambda, 0, std::nullopt), SolveMode::free, {}).best;
  const Field<double> u1 = best.system.u.col(0);
  const System two = logistic_system(mask, k, lambda, 0, eps);
  // w(x) = (eps / sqrt k) u1(x / eps): node (i, j) reads u1 at node (4i, 4j).
  const int stride = static_cast<int>(std::lround(1.0 / eps));
  Field<double> w = Field<double>::Zero(mask->size());
  for (Eigen::Index p = 0; p < mask->size(); ++p) {
    const int q = mask->index_of(stride * mask->node_i(p), stride * mask->node_j(p));
    if (q >= 0) w[p] = eps / std::sqrt(double(k)) * u1[q];
  }
  const double j1 = single_species_energy<double>({mask, u1}, 0, two.family, lambda);
  const double ji = single_species_energy<double>({mask, w}, 1, two.family, lambda);
  const double expect = eps * eps / k * j1;
  const double rel = std::abs(ji - expect) / std::abs(expect);
  return {rel < 0.02 && best.converged,
          "J_i(w)=" + fmt(ji, 8) + " (eps^2/k) J_1(u_1)=" + fmt(expect, 8) + " rel " + fmt(rel, 3)};
}

Outcome determinism(const ThresholdScan& first) {
  const ThresholdScan again = run_scan();
  if (again.points.size() != first.points.size()) return {false, "different number of scan points"};
  std::size_t same = 0;
  for (std::size_t s = 0; s < first.points.size(); ++s) {
    const RunRecord a = make_record("scan", "", first.points[s].best, 0, 0.0);
    const RunRecord b = make_record("scan", "", again.points[s].best, 0, 0.0);
    const bool eq = first.points[s].eps == again.points[s].eps && a.energy == b.energy && a.dirichlet == b.dirichlet &&
                    a.potential == b.potential && a.interaction == b.interaction;
    if (eq) ++same;
  }
  return {same == first.points.size(),
          std::to_string(same) + "/" + std::to_string(first.points.size()) + " points bit-identical"};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_fail;
  for (int a = 1; a + 1 < argc; a += 2) {
    const std::string flag = argv[a];
    if (flag == "--only") only = parse_list(argv[a + 1]);
    else if (flag == "--expect-fail") expect_fail = parse_list(argv[a + 1]);
  }
  const auto want = [&](int n) { return only.empty() || only.count(n) > 0; };

  int unexpected = 0;
  const auto report = [&](int n, double budget, const std::function<Outcome()>& fn) {
    if (!want(n)) return;
    const double t0 = now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = now() - t0;
    if (budget > 0 && dt > budget) {
      o.pass = false;
      o.detail += "; runtime over budget";
    }
    char timing[64];
    if (budget > 0) std::snprintf(timing, sizeof timing, "%.1f s / %.0f s", dt, budget);
    else std::snprintf(timing, sizeof timing, "%.1f s", dt);
    std::printf("criterion %2d: %s  [%s]  %s%s\n", n, o.pass ? "PASS" : "FAIL", timing, o.detail.c_str(),
                !o.pass && expect_fail.count(n) ? "  (expected failure)" : "");
    std::fflush(stdout);
    if (!o.pass && !expect_fail.count(n)) ++unexpected;
  };

  report(1, 10, gradient_consistency);
  report(2, 30, eigenvalues);
  report(3, 10, truncation_and_merge);
  report(4, 300, limit_asymptotics);
  report(5, 0, box_and_wedge_bound);
  report(6, 180, extinction);

  std::optional<ThresholdScan> scan;
  const auto scan_once = [&]() -> const ThresholdScan& {
    if (!scan) scan = run_scan();
    return *scan;
  };
  report(7, 600, [&] { return threshold(scan_once()); });
  if (want(8)) {
    const ThresholdScan& s = scan_once();
    report(8, 900, [&] { return system2(s); });
  }
  report(9, 300, cutoff);
  report(10, 60, scaling_identity);
  if (want(11)) {
    const ThresholdScan& s = scan_once();
    report(11, 0, [&] { return determinism(s); });
  }
  return unexpected == 0 ? 0 : 1;
}
