#pragma once

#include "seglab/solve.hpp"

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

namespace seglab {

/// One result row. List-valued columns are joined with ';'.
struct RunRecord {
  std::string experiment;
  std::string key;
  std::string domain;
  double h = 0.0;
  int k = 1;
  double lambda = 0.0;
  double kappa = 0.0;
  std::vector<double> eps;
  std::uint64_t seed = 0;
  std::string start_label;
  double energy = 0.0;
  std::vector<double> dirichlet;
  std::vector<double> potential;
  double interaction = 0.0;
  std::vector<bool> alive;
  int alive_count = 0;
  double overlap = 0.0;
  int iters = 0;
  bool converged = false;
  double residual = 0.0;
  double wall_time = 0.0;
  std::string verdict;
  std::string note;
};

RunRecord make_record(const std::string& experiment, const std::string& key, const MinimizeResult& r,
                      std::uint64_t seed, double wall_time);

/// Column names, in output order.
const std::vector<std::string>& record_header();
std::string csv_row(const RunRecord& r);
/// Parses a row written by csv_row.
RunRecord parse_csv_row(const std::string& line);

/// %.17g.
std::string format_double(double v);

/// Writes `text` to path via a temporary file and rename.
void write_atomic(const std::string& path, const std::string& text);

/// Appends rows to a results CSV (header written on creation); the file is
/// replaced atomically.
void append_records(const std::string& path, const std::vector<RunRecord>& rows);
std::vector<RunRecord> read_records(const std::string& path);

/// Tab-separated manifest lines "key seed file"; each line is written whole.
class Manifest {
 public:
  explicit Manifest(std::string path) : path_(std::move(path)) {}
  void add(const std::string& key, std::uint64_t seed, const std::string& file);
  /// Keys already listed.
  std::vector<std::string> keys() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mutex_;
};

}  // namespace seglab
