#include "seglab/records.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seglab {

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

std::string join(const std::vector<bool>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::string(v[i] ? "1" : "0");
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (s.back() == sep) out.emplace_back();
  return out;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

std::vector<double> doubles(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split(s, ';')) out.push_back(std::stod(item));
  return out;
}

std::string header_line() {
  std::string s;
  for (std::size_t i = 0; i < record_header().size(); ++i) s += (i ? "," : "") + record_header()[i];
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunRecord make_record(const std::string& experiment, const std::string& key, const MinimizeResult& r,
                      std::uint64_t seed, double wall_time) {
  RunRecord rec;
  const System& sys = r.system;
  rec.experiment = experiment;
  rec.key = key;
  rec.domain = to_string(sys.mask->kind());
  rec.h = sys.mask->h();
  rec.k = sys.species();
  rec.lambda = sys.lambda;
  rec.kappa = sys.kappa;
  rec.eps = sys.family.identical ? std::vector<double>{} : sys.family.eps;
  rec.seed = seed;
  rec.start_label = r.start_label;
  rec.energy = r.report.total;
  rec.dirichlet = r.report.dirichlet;
  rec.potential = r.report.potential;
  rec.interaction = r.report.interaction;
  rec.alive = r.alive;
  rec.alive_count = r.alive_count();
  rec.overlap = r.report.interaction;
  rec.iters = r.iters;
  rec.converged = r.converged;
  rec.residual = r.residual;
  rec.wall_time = wall_time;
  return rec;
}

const std::vector<std::string>& record_header() {
  static const std::vector<std::string> header = {
      "experiment", "key",         "domain",     "h",      "k",        "lambda",     "kappa",     "eps",
      "seed",       "start_label", "energy",     "dirichlet", "potential", "interaction", "alive", "alive_count",
      "overlap",    "iters",       "converged",  "residual", "wall_time", "verdict",   "note"};
  return header;
}

std::string csv_row(const RunRecord& r) {
  const std::vector<std::string> cells = {quote(r.experiment),
                                          quote(r.key),
                                          r.domain,
                                          format_double(r.h),
                                          std::to_string(r.k),
                                          format_double(r.lambda),
                                          format_double(r.kappa),
                                          join(r.eps),
                                          std::to_string(r.seed),
                                          quote(r.start_label),
                                          format_double(r.energy),
                                          join(r.dirichlet),
                                          join(r.potential),
                                          format_double(r.interaction),
                                          join(r.alive),
                                          std::to_string(r.alive_count),
                                          format_double(r.overlap),
                                          std::to_string(r.iters),
                                          r.converged ? "1" : "0",
                                          format_double(r.residual),
                                          format_double(r.wall_time),
                                          quote(r.verdict),
                                          quote(r.note)};
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s;
}

RunRecord parse_csv_row(const std::string& line) {
  const std::vector<std::string> c = split_csv(line);
  if (c.size() != record_header().size()) throw std::runtime_error("results csv: wrong number of columns");
  RunRecord r;
  r.experiment = c[0];
  r.key = c[1];
  r.domain = c[2];
  r.h = std::stod(c[3]);
  r.k = std::stoi(c[4]);
  r.lambda = std::stod(c[5]);
  r.kappa = std::stod(c[6]);
  r.eps = doubles(c[7]);
  r.seed = std::stoull(c[8]);
  r.start_label = c[9];
  r.energy = std::stod(c[10]);
  r.dirichlet = doubles(c[11]);
  r.potential = doubles(c[12]);
  r.interaction = std::stod(c[13]);
  for (const std::string& a : split(c[14], ';')) r.alive.push_back(a == "1");
  r.alive_count = std::stoi(c[15]);
  r.overlap = std::stod(c[16]);
  r.iters = std::stoi(c[17]);
  r.converged = c[18] == "1";
  r.residual = std::stod(c[19]);
  r.wall_time = std::stod(c[20]);
  r.verdict = c[21];
  r.note = c[22];
  return r;
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

void append_records(const std::string& path, const std::vector<RunRecord>& rows) {
  std::string text;
  std::ifstream in(path);
  if (in) {
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    if (text.rfind(header_line(), 0) != 0) throw std::runtime_error(path + ": header does not match the record schema");
  } else {
    text = header_line() + "\n";
  }
  for (const RunRecord& r : rows) text += csv_row(r) + "\n";
  write_atomic(path, text);
}

std::vector<RunRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != header_line()) throw std::runtime_error(path + ": header does not match the record schema");
  std::vector<RunRecord> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_csv_row(line));
  return out;
}

void Manifest::add(const std::string& key, std::uint64_t seed, const std::string& file) {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::filesystem::path target(path_);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path_);
  out << (key + "\t" + std::to_string(seed) + "\t" + file + "\n") << std::flush;
}

std::vector<std::string> Manifest::keys() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::string> out;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) out.push_back(line.substr(0, tab));
  }
  return out;
}

}  // namespace seglab
