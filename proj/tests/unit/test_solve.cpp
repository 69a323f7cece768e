#include "doctest.h"

#include "seglab/lab.hpp"
#include "seglab/solve.hpp"

#include <random>

using namespace seglab;

namespace {

SolverConfig quick() {
  SolverConfig cfg;
  cfg.restarts = 2;
  return cfg;
}

void check_box(const MinimizeResult& r) {
  const FieldSet<double> caps = species_caps(r.system);
  CHECK(r.system.u.minCoeff() >= 0.0);
  CHECK((r.system.u <= caps).all());
}

void check_monotone(const MinimizeResult& r) {
  for (std::size_t s = 1; s < r.energy_trace.size(); ++s) CHECK(r.energy_trace[s] <= r.energy_trace[s - 1]);
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SolverConfig bad = cfg;
  bad.tol_energy = 0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.armijo.shrink = 1.0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.coexist_eta = -1.0;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.tol_residual = 0.0;
  CHECK_THROWS(bad.validate());
  CHECK(cfg.residual_tolerance(200) == doctest::Approx(2e-4));
  CHECK(cfg.initial_step(0.5) == doctest::Approx(0.03125));
}

TEST_CASE("smooth cutoff") {
  CHECK(smooth_cutoff(-3) == 0.0);
  CHECK(smooth_cutoff(1) == 0.0);
  CHECK(smooth_cutoff(2) == 1.0);
  CHECK(smooth_cutoff(7) == 1.0);
  CHECK(smooth_cutoff(1.5) == doctest::Approx(0.5));
  for (double s = 1.0; s < 2.0; s += 0.05) CHECK(smooth_cutoff(s + 0.05) >= smooth_cutoff(s));
}

TEST_CASE("segregation keeps the largest density, ties to the lowest index") {
  FieldSet<double> u(3, 3);
  u << 0.2, 0.5, 0.1,  //
      0.3, 0.3, 0.0,   //
      0.0, 0.0, 0.0;
  const FieldSet<double> s = segregate(u);
  CHECK(s(0, 0) == 0.0);
  CHECK(s(0, 1) == 0.5);
  CHECK(s(1, 0) == 0.3);
  CHECK(s(1, 1) == 0.0);
  CHECK(is_segregated(s));
  CHECK_FALSE(is_segregated(u));
}

TEST_CASE("default initializers") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  const System sys = logistic_system(mask, 2, 200, 100, 0.5);
  const SolverConfig cfg = quick();
  const InitializerSet init = default_initializers(mask, sys.family, sys.lambda, cfg);
  REQUIRE(init.starts.size() == 3 + static_cast<std::size_t>(cfg.restarts));
  CHECK(init.starts[0].label == "single");
  CHECK(init.starts[1].label == "seeded");
  CHECK(init.starts[2].label == "uniform");
  CHECK(init.starts[3].label == "random-0");

  const FieldSet<double> caps = species_caps(sys);
  for (const Start& s : init.starts) {
    CHECK(s.u.minCoeff() >= 0.0);
    CHECK((s.u <= caps).all());
  }
  const FieldSet<double>& seeded = init.starts[1].u;
  CHECK((seeded.col(0) * seeded.col(1)).abs().maxCoeff() == 0.0);
  CHECK(seeded.col(1).maxCoeff() > 0.0);
  CHECK(energy_total(with_fields(sys, seeded)).interaction == 0.0);

  const System single = with_fields(logistic_system(mask, 1, 200, 0, std::nullopt), init.starts[0].u.leftCols(1));
  CHECK(energy_total(single).total < 0.0);
  CHECK(init.starts[2].u(0, 1) == doctest::Approx(sys.family.beta(1) / 2));

  const InitializerSet again = default_initializers(mask, sys.family, sys.lambda, cfg);
  CHECK((again.starts[4].u == init.starts[4].u).all());
}

TEST_CASE("seeded start on the wedge and identical families") {
  const MaskPtr wedge = build_wedge(2, 1.0 / 64);
  const System sys = logistic_system(wedge, 2, 200, 0, 0.3);
  const InitializerSet init = default_initializers(wedge, sys.family, 200, quick());
  CHECK(init.warnings.empty());
  CHECK(init.starts[1].label == "seeded");
  const FieldSet<double>& u = init.starts[1].u;
  CHECK((u.col(0) * u.col(1)).abs().maxCoeff() == 0.0);

  const MaskPtr sq = build_rectangle(1, 1, 1.0 / 32);
  const System same = logistic_system(sq, 3, 200, 0, std::nullopt);
  const InitializerSet i3 = default_initializers(sq, same.family, 200, quick());
  CHECK(i3.starts[1].label == "seeded");
}

TEST_CASE("zero start below the first eigenvalue stays at zero") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  System sys = logistic_system(mask, 1, 0.5 * lambda1(*mask), 0, std::nullopt);
  const MinimizeResult r = minimize_free(sys, quick());
  CHECK(r.system.u.abs().maxCoeff() == 0.0);
  CHECK(r.converged);
  CHECK(r.alive_count() == 0);
}

TEST_CASE("free descent stays in the box and never raises the energy") {
  const MaskPtr mask = build_disc(1, 1.0 / 16);
  std::mt19937_64 rng(3);
  System sys = logistic_system(mask, 3, 150, 80, 0.5);
  std::uniform_real_distribution<double> d(0.0, 2.0);
  for (Eigen::Index p = 0; p < sys.u.size(); ++p) sys.u.data()[p] = d(rng);
  const MinimizeResult r = minimize_free(sys, quick());
  check_box(r);
  check_monotone(r);
  CHECK(r.converged);
  CHECK(r.residual <= quick().residual_tolerance(150));
  CHECK(r.alive.size() == 3);
}

TEST_CASE("non-convergence is reported") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  System sys = logistic_system(mask, 1, 200, 0, std::nullopt);
  sys.u.setConstant(0.3);
  SolverConfig cfg = quick();
  cfg.max_iters = 5;
  cfg.tol_residual = 1e-300;
  CHECK_FALSE(minimize_free(sys, cfg).converged);
}

TEST_CASE("non-finite input is rejected") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 16);
  System sys = logistic_system(mask, 1, 200, 0, std::nullopt);
  sys.u(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(minimize_free(sys, quick()));
}

TEST_CASE("decoupled species minimize independently") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  const SolverConfig cfg = quick();
  const MinimizeResult one = minimize_multistart(logistic_system(mask, 1, 120, 0, std::nullopt), SolveMode::free, cfg).best;
  const MinimizeResult two = minimize_multistart(logistic_system(mask, 2, 120, 0, 0.5), SolveMode::free, cfg).best;
  CHECK(two.report.species_energy(0) == doctest::Approx(one.report.total).epsilon(1e-6));
  CHECK(one.report.total ==
        doctest::Approx(single_species_energy<double>(one.system.field(0), 0, one.system.family, 120.0)));
}

TEST_CASE("multistart returns the lowest run") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  const MultistartResult ms = minimize_multistart(logistic_system(mask, 2, 200, 100, 0.5), SolveMode::free, quick());
  REQUIRE(!ms.runs.empty());
  for (const MinimizeResult& r : ms.runs) CHECK(ms.best.report.total <= r.report.total);
}

TEST_CASE("multistart is independent of the thread count") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 16);
  SolverConfig a = quick();
  SolverConfig b = quick();
  b.jobs = 3;
  const System proto = logistic_system(mask, 2, 200, 50, 0.4);
  const MultistartResult ra = minimize_multistart(proto, SolveMode::free, a);
  const MultistartResult rb = minimize_multistart(proto, SolveMode::free, b);
  REQUIRE(ra.runs.size() == rb.runs.size());
  for (std::size_t s = 0; s < ra.runs.size(); ++s) CHECK(ra.runs[s].report.total == rb.runs[s].report.total);
}

TEST_CASE("partition output is segregated") {
  const MaskPtr mask = build_wedge(2, 1.0 / 32);
  const MultistartResult ms = minimize_multistart(logistic_system(mask, 3, 300, 0, 0.4), SolveMode::partition, quick());
  for (const MinimizeResult& r : ms.runs) {
    CHECK(is_segregated(r.system.u));
    check_box(r);
  }
  CHECK(ms.best.converged);
}

TEST_CASE("identical laws leave at most one species in the partition") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  const MultistartResult ms =
      minimize_multistart(logistic_system(mask, 2, 200, 0, std::nullopt), SolveMode::partition, quick());
  for (const MinimizeResult& r : ms.runs) CHECK(r.alive_count() <= 1);
}

TEST_CASE("a small second scale coexists in the wedge partition") {
  const MaskPtr wedge = build_wedge(2, 1.0 / 64);
  const MultistartResult ms = minimize_multistart(logistic_system(wedge, 2, 1000, 0, 0.1), SolveMode::partition, quick());
  CHECK(ms.best.alive_count() == 2);
  CHECK(is_segregated(ms.best.system.u));
}

TEST_CASE("merging two disjoint bumps of the same law does not raise the energy") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 32);
  System sys = logistic_system(mask, 2, 200, 0, std::nullopt);
  for (Eigen::Index p = 0; p < mask->size(); ++p) {
    const Point x = mask->position(p);
    const double left = std::max(0.0, 0.2 - (x - Point(0.25, 0.5)).norm());
    const double right = std::max(0.0, 0.2 - (x - Point(0.75, 0.5)).norm());
    sys.u(p, 0) = 4 * left;
    sys.u(p, 1) = 4 * right;
  }
  REQUIRE(is_segregated(sys.u));
  const MergeCheck m = merge_test(sys);
  CHECK(m.holds);
  CHECK(m.merged <= m.original + 1e-12);

  // Adjacent supports: merging removes the interface jump.
  System touching = sys;
  for (Eigen::Index p = 0; p < mask->size(); ++p) {
    const bool left = mask->position(p).x() < 0.5;
    touching.u(p, 0) = left ? 0.6 : 0.0;
    touching.u(p, 1) = left ? 0.0 : 0.6;
  }
  const MergeCheck t = merge_test(touching);
  CHECK(t.holds);
  CHECK(t.merged < t.original);
}

TEST_CASE("kappa continuation") {
  const MaskPtr mask = build_rectangle(1, 1, 1.0 / 16);
  const System sys = logistic_system(mask, 2, 200, 0, 0.5);
  CHECK_THROWS_AS(kappa_continuation(sys, {10, 5}, quick()), std::invalid_argument);
  CHECK_THROWS_AS(kappa_continuation(sys, {10, 10}, quick()), std::invalid_argument);
  CHECK_THROWS_AS(kappa_continuation(sys, {-1, 10}, quick()), std::invalid_argument);
  CHECK_THROWS_AS(kappa_continuation(sys, {}, quick()), std::invalid_argument);

  System start = sys;
  start.u.col(0).setConstant(0.5);
  start.u.col(1).setConstant(sys.family.beta(1) / 2);
  const auto steps = kappa_continuation(start, {0, 10, 100, 1000}, quick());
  REQUIRE(steps.size() == 4);
  CHECK(steps[0].result.alive_count() == 2);
  for (std::size_t s = 1; s < steps.size(); ++s) {
    CHECK(steps[s].level >= steps[s - 1].level - 1e-10 * std::abs(steps[s - 1].level));
    CHECK(steps[s].overlap <= steps[s - 1].overlap);
  }
}
