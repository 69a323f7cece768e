#include "seglab/cli.hpp"

#include "seglab/config.hpp"
#include "seglab/fields.hpp"
#include "seglab/lab.hpp"
#include "seglab/parallel.hpp"
#include "seglab/records.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>

namespace seglab {

namespace {

namespace fs = std::filesystem;

// First zero of the Bessel function J_0.
constexpr double kBesselJ0Zero = 2.404825557695773;

class Log {
 public:
  explicit Log(bool quiet) : quiet_(quiet) {}
  void info(const std::string& line) const {
    if (!quiet_) emit(std::cerr, line);
  }
  void error(const std::string& line) const { emit(std::cerr, line); }
  void result(const std::string& line) const { emit(std::cout, line); }

 private:
  void emit(std::ostream& os, const std::string& line) const {
    std::lock_guard<std::mutex> lock(mutex_);
    os << (line + "\n") << std::flush;
  }
  bool quiet_;
  mutable std::mutex mutex_;
};

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool dump_fields = false;
  bool quiet = false;
  std::optional<int> max_points;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string coord_key(double lambda, double kappa, const std::vector<double>& eps) {
  std::string key = "lambda=" + format_double(lambda) + ";kappa=" + format_double(kappa);
  for (double e : eps) key += ";eps=" + format_double(e);
  return key;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return out;
}

struct Context {
  RunConfig cfg;
  std::string name;
  Log log;
  fs::path out;

  std::string results_path() const { return (out / "results.csv").string(); }
  std::string manifest_path() const { return (out / "manifest.txt").string(); }

  void dump(const std::string& tag, const MinimizeResult& r) const {
    if (!cfg.dump_fields) return;
    const System& sys = r.system;
    for (int i = 0; i < sys.species(); ++i) {
      const fs::path base = out / "fields" / (safe_name(tag) + "_u" + std::to_string(i + 1));
      fs::create_directories(base.parent_path());
      write_field_csv(*sys.mask, sys.u.col(i), base.string() + ".csv");
      write_field_pgm(*sys.mask, sys.u.col(i), sys.family.beta(i), base.string() + ".pgm");
    }
  }

  void persist(const std::vector<RunRecord>& rows) const {
    append_records(results_path(), rows);
    Manifest manifest(manifest_path());
    for (const RunRecord& r : rows) manifest.add(r.experiment + ":" + r.key, r.seed, "results.csv");
  }

  RunRecord record(const std::string& key, const MinimizeResult& r, double wall) const {
    return make_record(name, key, r, cfg.solver.seed, wall);
  }
};

void warn_all(const Context& ctx, const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) ctx.log.info("warning: " + w);
}

void require_wedge(const MaskPtr& mask) {
  if (mask->kind() != DomainKind::wedge) throw ConfigError("domain.kind", "this experiment needs a wedge domain");
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return kExitOk;
    case Verdict::fail:
      return kExitFail;
    case Verdict::inconclusive:
      return kExitInconclusive;
  }
  return kExitInconclusive;
}

// -------------------------------------------------------------- minimize

int cmd_solve(const Context& ctx, SolveMode mode) {
  const RunConfig& cfg = ctx.cfg;
  const MaskPtr mask = cfg.need(cfg.domain, "domain").build();
  const System proto = cfg.make_system(mask);
  const auto t0 = std::chrono::steady_clock::now();
  const MultistartResult ms = minimize_multistart(proto, mode, cfg.solver);
  warn_all(ctx, ms.warnings);
  const MinimizeResult& best = ms.best;
  RunRecord rec = ctx.record(coord_key(proto.lambda, proto.kappa, proto.family.identical ? std::vector<double>{}
                                                                                            : proto.family.eps),
                             best, seconds_since(t0));
  rec.verdict = best.converged ? "converged" : "not-converged";
  ctx.persist({rec});
  ctx.dump(ctx.name + "_" + best.start_label, best);
  std::ostringstream msg;
  msg << ctx.name << ": energy=" << format_double(best.report.total) << " alive_count=" << best.alive_count()
      << " start=" << best.start_label << " iters=" << best.iters << " converged=" << best.converged;
  ctx.log.result(msg.str());
  return best.converged ? kExitOk : kExitNotConverged;
}

// -------------------------------------------------------------------- eig

int cmd_eig(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const MaskPtr mask = cfg.need(cfg.domain, "domain").build();
  const auto t0 = std::chrono::steady_clock::now();
  const double value = lambda1(*mask);
  std::optional<double> reference;
  double tol = 0.0;
  const DomainShape& shape = mask->shape();
  if (mask->kind() == DomainKind::rectangle) {
    reference = std::numbers::pi * std::numbers::pi * (1.0 / (shape.width * shape.width) + 1.0 / (shape.height * shape.height));
    tol = 0.005;
  } else if (mask->kind() == DomainKind::disc) {
    reference = kBesselJ0Zero * kBesselJ0Zero / (shape.radius * shape.radius);
    tol = 0.01;
  }
  Verdict verdict = Verdict::inconclusive;
  std::ostringstream note;
  note << "lambda1=" << format_double(value);
  if (reference) {
    const double rel = std::abs(value - *reference) / *reference;
    verdict = rel <= tol ? Verdict::pass : Verdict::fail;
    note << " reference=" << format_double(*reference) << " relative_error=" << format_double(rel);
  } else {
    note << " no analytic reference for this domain";
  }
  RunRecord rec;
  rec.experiment = "eig";
  rec.key = "lambda1";
  rec.domain = to_string(mask->kind());
  rec.h = mask->h();
  rec.k = 0;
  rec.seed = cfg.solver.seed;
  rec.energy = value;
  rec.converged = true;
  rec.wall_time = seconds_since(t0);
  rec.verdict = to_string(verdict);
  rec.note = note.str();
  ctx.persist({rec});
  ctx.log.result("eig: " + to_string(verdict) + " " + note.str());
  return exit_for(verdict);
}

// ----------------------------------------------------------------- verify

int finish(const Context& ctx, Verdict verdict, std::vector<RunRecord> rows, const std::string& message) {
  for (RunRecord& r : rows) r.verdict = to_string(verdict);
  ctx.persist(rows);
  ctx.log.result(ctx.name + ": " + to_string(verdict) + " " + message);
  return exit_for(verdict);
}

int verify_extinction(const Context& ctx, const MaskPtr& mask) {
  const RunConfig& cfg = ctx.cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const ExtinctionReport rep = verify_extinction_identical(mask, cfg.need(cfg.k, "k"), cfg.need(cfg.lambda, "lambda"),
                                                           cfg.solver);
  warn_all(ctx, rep.runs.warnings);
  const double wall = seconds_since(t0);
  std::vector<RunRecord> rows;
  for (std::size_t r = 0; r < rep.runs.runs.size(); ++r) {
    const MinimizeResult& run = rep.runs.runs[r];
    RunRecord rec = ctx.record(coord_key(*cfg.lambda, 0.0, {}) + ";start=" + run.start_label, run, wall);
    rec.note = "merge_holds=" + std::to_string(rep.merges[r].holds);
    rows.push_back(rec);
  }
  ctx.dump("extinction_" + rep.runs.best.start_label, rep.runs.best);
  return finish(ctx, rep.verdict, rows, rep.message);
}

int verify_eps(const Context& ctx, const MaskPtr& mask) {
  const RunConfig& cfg = ctx.cfg;
  ScanOptions opts;
  opts.bisect_steps = cfg.bisect_steps.value_or(opts.bisect_steps);
  opts.stop_at_failure = cfg.stop_at_failure.value_or(opts.stop_at_failure);
  const double lambda = cfg.need(cfg.lambda, "lambda");
  const double kappa = cfg.need(cfg.kappa, "kappa");
  const auto t0 = std::chrono::steady_clock::now();
  const ThresholdScan scan = scan_epsilon_threshold(mask, cfg.need(cfg.k, "k"), lambda, kappa,
                                                    cfg.need(cfg.eps_grid, "eps_grid"), cfg.solver, opts);
  const double wall = seconds_since(t0);
  std::vector<RunRecord> rows;
  for (const ScanPoint& p : scan.points) {
    RunRecord rec = ctx.record(coord_key(lambda, kappa, {p.eps}), p.best, wall);
    rec.note = std::string(p.coexist ? "coexist" : "no-coexist") + (p.bisection ? " bisection" : "");
    rows.push_back(rec);
    ctx.dump("eps-threshold_eps" + format_double(p.eps), p.best);
  }
  return finish(ctx, scan.verdict, rows, scan.message);
}

int verify_limiti(const Context& ctx, const MaskPtr& mask) {
  const RunConfig& cfg = ctx.cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const LimitTable table = verify_limiti_asymptotics(mask, cfg.need(cfg.lambdas, "lambdas"), cfg.solver);
  const double wall = seconds_since(t0);
  std::vector<RunRecord> rows;
  for (const LimitRow& row : table.rows) {
    RunRecord rec = ctx.record(coord_key(row.lambda, 0.0, {}), row.best, wall);
    rec.note = "scaled=" + format_double(row.scaled) + " target=" + format_double(table.target);
    rows.push_back(rec);
  }
  return finish(ctx, table.verdict, rows, table.message);
}

int verify_wedge(const Context& ctx, const MaskPtr& mask) {
  const RunConfig& cfg = ctx.cfg;
  require_wedge(mask);
  const double lambda = cfg.need(cfg.lambda, "lambda");
  const auto t0 = std::chrono::steady_clock::now();
  const WedgeBoundReport rep = verify_wedge_bound(mask, lambda, cfg.solver);
  RunRecord rec = ctx.record(coord_key(lambda, 0.0, {}), *rep.minimizer, seconds_since(t0));
  rec.note = rep.message;
  ctx.dump("wedge-bound", *rep.minimizer);
  return finish(ctx, rep.verdict, {rec}, rep.message);
}

int verify_cutoff(const Context& ctx, const MaskPtr& mask) {
  const RunConfig& cfg = ctx.cfg;
  require_wedge(mask);
  const double lambda = cfg.need(cfg.lambda, "lambda");
  const auto t0 = std::chrono::steady_clock::now();
  const CutoffReport rep = verify_cutoff_scaling(mask, lambda, cfg.need(cfg.deltas, "deltas"), cfg.solver);
  RunRecord rec = ctx.record(coord_key(lambda, 0.0, {}), *rep.minimizer, seconds_since(t0));
  std::ostringstream note;
  for (const CutoffRow& row : rep.rows) note << "delta=" << format_double(row.delta) << ":dJ=" << format_double(row.dJ) << " ";
  note << "slope=" << format_double(rep.slope);
  rec.note = note.str();
  ctx.dump("cutoff", *rep.minimizer);
  return finish(ctx, rep.verdict, {rec}, rep.message);
}

int verify_sys2(const Context& ctx, const MaskPtr& mask) {
  const RunConfig& cfg = ctx.cfg;
  require_wedge(mask);
  const double lambda = cfg.need(cfg.lambda, "lambda");
  const double eps2 = cfg.need(cfg.eps2, "eps2");
  if (!(eps2 > 0 && eps2 < 1)) throw ConfigError("eps2", "must lie in (0, 1)");
  const auto t0 = std::chrono::steady_clock::now();
  const System2Report rep =
      verify_system2(mask, lambda, eps2, cfg.need(cfg.kappa_schedule, "kappa_schedule"), cfg.solver);
  const double wall = seconds_since(t0);
  std::vector<RunRecord> rows;
  for (const ContinuationStep& st : rep.steps) {
    RunRecord rec = ctx.record(coord_key(lambda, st.kappa, {eps2}), st.result, wall);
    rec.note = "continuation";
    rows.push_back(rec);
    ctx.dump("system2_kappa" + format_double(st.kappa), st.result);
  }
  RunRecord part = ctx.record(coord_key(lambda, 0.0, {eps2}) + ";partition", rep.partition, wall);
  part.note = "partition";
  rows.push_back(part);
  return finish(ctx, rep.verdict, rows, rep.message);
}

int cmd_verify(const Context& ctx) {
  if (ctx.name == "eig") return cmd_eig(ctx);
  const MaskPtr mask = ctx.cfg.need(ctx.cfg.domain, "domain").build();
  if (ctx.name == "extinction") return verify_extinction(ctx, mask);
  if (ctx.name == "eps-threshold") return verify_eps(ctx, mask);
  if (ctx.name == "limiti") return verify_limiti(ctx, mask);
  if (ctx.name == "wedge-bound") return verify_wedge(ctx, mask);
  if (ctx.name == "cutoff") return verify_cutoff(ctx, mask);
  if (ctx.name == "system2") return verify_sys2(ctx, mask);
  throw ConfigError("experiment", "unknown experiment '" + ctx.name + "'");
}

// ------------------------------------------------------------------ sweep

struct SweepPoint {
  double lambda = 0.0;
  double kappa = 0.0;
  std::optional<double> eps;
  std::string key;
};

int cmd_sweep(const Context& ctx, std::optional<int> max_points) {
  const RunConfig& cfg = ctx.cfg;
  const MaskPtr mask = cfg.need(cfg.domain, "domain").build();
  const int k = cfg.need(cfg.k, "k");
  const bool same = cfg.identical.value_or(false) || k == 1;
  const std::vector<double> lambdas = cfg.need(cfg.lambdas, "lambdas");
  const std::vector<double> kappas = cfg.kappas.value_or(std::vector<double>{0.0});
  std::vector<std::optional<double>> eps_values;
  if (same) {
    eps_values.push_back(std::nullopt);
  } else {
    for (double e : cfg.need(cfg.eps_grid, "eps_grid")) {
      if (!(e > 0 && e < 1)) throw ConfigError("eps_grid", "every eps must lie in (0, 1)");
      eps_values.push_back(e);
    }
  }
  for (double l : lambdas)
    if (!(l > 0)) throw ConfigError("lambdas", "every lambda must be positive");
  for (double kp : kappas)
    if (!(kp >= 0)) throw ConfigError("kappas", "every kappa must be nonnegative");
  const SolveMode mode = cfg.mode.value_or("free") == "partition" ? SolveMode::partition : SolveMode::free;

  std::vector<SweepPoint> grid;
  for (double l : lambdas)
    for (double kp : kappas)
      for (const auto& e : eps_values) {
        const std::vector<double> ev = e ? std::vector<double>(static_cast<std::size_t>(k - 1), *e) : std::vector<double>{};
        grid.push_back({l, kp, e, coord_key(l, kp, ev)});
      }

  Manifest manifest(ctx.manifest_path());
  std::set<std::string> done;
  for (const std::string& key : manifest.keys()) done.insert(key);
  std::vector<std::size_t> pending;
  for (std::size_t p = 0; p < grid.size(); ++p)
    if (!done.count(grid[p].key)) pending.push_back(p);
  if (max_points && static_cast<int>(pending.size()) > *max_points) pending.resize(static_cast<std::size_t>(*max_points));
  ctx.log.info("sweep: " + std::to_string(grid.size()) + " points, " + std::to_string(done.size()) +
               " already recorded, running " + std::to_string(pending.size()));

  const auto record_file = [&](const SweepPoint& pt) { return "records/" + safe_name(pt.key) + ".csv"; };
  SolverConfig point_cfg = cfg.solver;
  point_cfg.jobs = 1;
  std::mutex fail_mutex;
  std::vector<std::string> failures;
  parallel_for(static_cast<int>(pending.size()), cfg.solver.jobs, [&](int n) {
    const SweepPoint& pt = grid[pending[static_cast<std::size_t>(n)]];
    try {
      System proto = logistic_system(mask, k, pt.lambda, pt.kappa, pt.eps);
      const auto t0 = std::chrono::steady_clock::now();
      const MultistartResult ms = minimize_multistart(proto, mode, point_cfg);
      RunRecord rec = make_record("sweep", pt.key, ms.best, cfg.solver.seed, seconds_since(t0));
      rec.verdict = ms.best.alive_count() == k ? "coexist" : "no-coexist";
      if (!ms.best.converged) rec.note = "not-converged";
      const std::string rel = record_file(pt);
      std::string text;
      for (std::size_t c = 0; c < record_header().size(); ++c) text += (c ? "," : "") + record_header()[c];
      write_atomic((ctx.out / rel).string(), text + "\n" + csv_row(rec) + "\n");
      ctx.dump("sweep_" + pt.key, ms.best);
      manifest.add(pt.key, cfg.solver.seed, rel);
      ctx.log.info("sweep: done " + pt.key + " energy=" + format_double(rec.energy) +
                   " alive_count=" + std::to_string(rec.alive_count));
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(fail_mutex);
      failures.push_back(pt.key + ": " + e.what());
      ctx.log.error("sweep: point " + pt.key + " failed: " + e.what());
    }
  });

  std::set<std::string> recorded;
  for (const std::string& key : manifest.keys()) recorded.insert(key);
  std::vector<RunRecord> rows;
  for (const SweepPoint& pt : grid) {
    if (!recorded.count(pt.key)) continue;
    const std::string path = (ctx.out / record_file(pt)).string();
    if (!fs::exists(path)) continue;
    for (RunRecord& r : read_records(path)) rows.push_back(std::move(r));
  }
  std::string text;
  for (std::size_t c = 0; c < record_header().size(); ++c) text += (c ? "," : "") + record_header()[c];
  text += "\n";
  for (const RunRecord& r : rows) text += csv_row(r) + "\n";
  write_atomic(ctx.results_path(), text);

  const std::size_t missing = grid.size() - rows.size();
  if (missing > 0) {
    ctx.log.result("sweep: incomplete, " + std::to_string(missing) + " of " + std::to_string(grid.size()) +
                   " points missing");
    return kExitNotConverged;
  }
  ctx.log.result("sweep: complete, " + std::to_string(grid.size()) + " points");
  return kExitOk;
}

// ----------------------------------------------------------------- driver

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Solver seed");
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--dump-fields", o.dump_fields, "Write final densities to fields/");
  cmd->add_flag("--quiet", o.quiet, "Suppress progress lines");
}

const std::set<std::string> kExperiments = {"extinction", "eps-threshold", "limiti", "wedge-bound",
                                            "cutoff",     "system2",       "eig"};

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Discrete competing-species energies: minimization, partitions and verification experiments"};
  app.require_subcommand(1);
  Overrides o;
  std::string experiment;
  CLI::App* minimize = app.add_subcommand("minimize", "Multistart minimization of the coupled energy");
  CLI::App* partition = app.add_subcommand("partition", "Multistart minimization over segregated states");
  CLI::App* verify = app.add_subcommand("verify", "Run a verification experiment");
  CLI::App* sweep = app.add_subcommand("sweep", "Resumable grid over lambda, kappa and eps");
  CLI::App* eig = app.add_subcommand("eig", "Smallest Dirichlet eigenvalue of the domain");
  for (CLI::App* cmd : {minimize, partition, verify, sweep, eig}) add_common(cmd, o);
  verify->add_option("name", experiment, "extinction | eps-threshold | limiti | wedge-bound | cutoff | system2 | eig")
      ->required();
  sweep->add_option("--max-points", o.max_points, "Run at most this many pending points")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string command = app.get_subcommands().front()->get_name();
  const std::string name = command == "verify" ? experiment : command;
  Log early(o.quiet);
  if (command == "verify" && !kExperiments.count(experiment)) {
    early.error("error: unknown experiment '" + experiment + "'");
    return kExitConfig;
  }

  try {
    RunConfig cfg = o.config.empty() ? default_config(name) : load_config(o.config);
    if (o.out) cfg.out_dir = *o.out;
    if (o.seed) cfg.solver.seed = *o.seed;
    if (o.jobs) cfg.solver.jobs = *o.jobs;
    if (o.dump_fields) cfg.dump_fields = true;
    if (o.quiet) cfg.quiet = true;
    Context ctx{cfg, name, Log(cfg.quiet), fs::path(cfg.out_dir)};
    fs::create_directories(ctx.out);
    write_atomic((ctx.out / ("config-" + name + ".json")).string(), to_json(cfg).dump(2) + "\n");

    if (command == "minimize") return cmd_solve(ctx, SolveMode::free);
    if (command == "partition") return cmd_solve(ctx, SolveMode::partition);
    if (command == "eig") return cmd_eig(ctx);
    if (command == "verify") return cmd_verify(ctx);
    return cmd_sweep(ctx, o.max_points);
  } catch (const ConfigError& e) {
    early.error(std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    early.error(std::string("error: ") + e.what());
    return kExitConfig;
  }
}

}  // namespace seglab
