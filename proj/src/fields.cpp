#include "seglab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seglab {

double sample_bilinear(const DomainMask& mask, const Field<double>& values, const Point& x) {
  const Grid& grid = mask.grid();
  const Point rel = (x - grid.corner()) / grid.h;
  const double fi = std::floor(rel.x());
  const double fj = std::floor(rel.y());
  if (fi < -1.0 || fj < -1.0 || fi > grid.nx || fj > grid.ny) return 0.0;
  const int i = static_cast<int>(fi);
  const int j = static_cast<int>(fj);
  const double tx = rel.x() - fi;
  const double ty = rel.y() - fj;
  auto at = [&](int a, int b) {
    const int p = mask.index_of(a, b);
    return p >= 0 ? values[p] : 0.0;
  };
  return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
         tx * ty * at(i + 1, j + 1);
}

Eigen::MatrixXd to_grid(const DomainMask& mask, const Field<double>& values) {
  if (values.size() != mask.size()) throw std::invalid_argument("to_grid: field size does not match mask");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mask.grid().ny, mask.grid().nx);
  for (Eigen::Index p = 0; p < mask.size(); ++p) out(mask.node_j(p), mask.node_i(p)) = values[p];
  return out;
}

void write_field_csv(const DomainMask& mask, const Field<double>& values, const std::string& path) {
  const Eigen::MatrixXd g = to_grid(mask, values);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[32];
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    for (Eigen::Index i = 0; i < g.cols(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", g(j, i));
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

Field<double> read_field_csv(const DomainMask& mask, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Field<double> values = Field<double>::Zero(mask.size());
  std::string line;
  int j = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int i = 0;
    while (std::getline(ss, cell, ',')) {
      const int p = mask.index_of(i, j);
      if (p >= 0) values[p] = std::stod(cell);
      ++i;
    }
    if (i != mask.grid().nx) throw std::runtime_error("field csv: row width does not match the grid");
    ++j;
  }
  if (j != mask.grid().ny) throw std::runtime_error("field csv: row count does not match the grid");
  return values;
}

void write_field_pgm(const DomainMask& mask, const Field<double>& values, double scale, const std::string& path) {
  if (!(scale > 0.0)) throw std::invalid_argument("write_field_pgm: scale must be positive");
  const Eigen::MatrixXd g = to_grid(mask, values);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "P5\n" << g.cols() << ' ' << g.rows() << "\n255\n";
  for (Eigen::Index j = g.rows(); j-- > 0;) {
    for (Eigen::Index i = 0; i < g.cols(); ++i) {
      const double v = std::clamp(g(j, i) / scale, 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
}

}  // namespace seglab
