#include "seglab/geometry.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace seglab {

namespace {

// Number of mesh steps needed to reach `length`, tolerant to round-off when
// length is an exact multiple of h.
int steps_to_cover(double length, double h) {
  return static_cast<int>(std::ceil(length / h - 1e-9));
}

std::vector<char> flag_nodes(const Grid& grid, const std::function<bool(const Point&)>& inside) {
  std::vector<char> flags(static_cast<std::size_t>(grid.nx) * grid.ny, 0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      flags[static_cast<std::size_t>(grid.linear(i, j))] = inside(grid.node(i, j)) ? 1 : 0;
  return flags;
}

std::function<bool(const Point&)> rectangle_predicate(double width, double height) {
  return [width, height](const Point& x) {
    return x.x() > 0.0 && x.x() < width && x.y() > 0.0 && x.y() < height;
  };
}

std::function<bool(const Point&)> disc_predicate(const Point& center, double radius) {
  return [center, radius](const Point& x) { return (x - center).squaredNorm() < radius * radius; };
}

std::function<bool(const Point&)> wedge_predicate(double m) {
  return [m](const Point& x) { return m * std::abs(x.y()) < x.x() && x.x() < 1.0; };
}

// Nearest-node lookup into a node set, for shapes without a closed form.
std::function<bool(const Point&)> lattice_predicate(const Grid& grid, std::shared_ptr<const std::vector<char>> flags) {
  return [grid, flags](const Point& x) {
    const Point rel = (x - grid.corner()) / grid.h;
    const long i = std::lround(rel.x());
    const long j = std::lround(rel.y());
    if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) return false;
    return (*flags)[static_cast<std::size_t>(j * grid.nx + i)] != 0;
  };
}

}  // namespace

void Grid::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid: mesh width must be positive");
  if (nx < 1 || ny < 1 || static_cast<long>(nx) * ny < 9)
    throw std::invalid_argument("grid: needs at least 9 nodes");
}

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::disc: return "disc";
    case DomainKind::wedge: return "wedge";
    case DomainKind::custom: return "custom";
  }
  return "custom";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "rectangle") return DomainKind::rectangle;
  if (name == "disc") return DomainKind::disc;
  if (name == "wedge") return DomainKind::wedge;
  if (name == "custom") return DomainKind::custom;
  throw std::invalid_argument("unknown domain kind '" + name + "'");
}

DomainMask::DomainMask(Grid grid, std::vector<char> interior, DomainShape shape)
    : grid_(grid), interior_(std::move(interior)), shape_(std::move(shape)) {
  grid_.validate();
  if (interior_.size() != static_cast<std::size_t>(grid_.nx) * grid_.ny)
    throw std::invalid_argument("mask: interior flag count does not match the grid");
  if (!shape_.contains) {
    shape_.contains = lattice_predicate(grid_, std::make_shared<const std::vector<char>>(interior_));
  }

  index_.assign(interior_.size(), -1);
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      if (!interior_[static_cast<std::size_t>(grid_.linear(i, j))]) continue;
      if (i == 0 || j == 0 || i == grid_.nx - 1 || j == grid_.ny - 1)
        throw std::invalid_argument("mask: interior node on the grid border (no boundary collar)");
      index_[static_cast<std::size_t>(grid_.linear(i, j))] = static_cast<int>(node_i_.size());
      node_i_.push_back(i);
      node_j_.push_back(j);
    }
  }
  if (node_i_.empty()) throw std::invalid_argument("mask: mesh too coarse, no interior node");

  neighbors_.resize(4, size());
  for (Eigen::Index p = 0; p < size(); ++p) {
    const int i = node_i(p);
    const int j = node_j(p);
    neighbors_(0, p) = index_of(i + 1, j);
    neighbors_(1, p) = index_of(i - 1, j);
    neighbors_(2, p) = index_of(i, j + 1);
    neighbors_(3, p) = index_of(i, j - 1);
  }
}

bool DomainMask::is_interior(int i, int j) const { return index_of(i, j) >= 0; }

int DomainMask::index_of(int i, int j) const {
  if (i < 0 || j < 0 || i >= grid_.nx || j >= grid_.ny) return -1;
  return index_[static_cast<std::size_t>(grid_.linear(i, j))];
}

MaskPtr build_rectangle(double width, double height, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("build_rectangle: h must be positive");
  if (width < 2.0 * h * (1.0 - 1e-12) || height < 2.0 * h * (1.0 - 1e-12))
    throw std::invalid_argument("build_rectangle: mesh too coarse (width and height must be >= 2h)");
  Grid grid;
  grid.h = h;
  grid.nx = steps_to_cover(width, h) + 1;
  grid.ny = steps_to_cover(height, h) + 1;
  DomainShape shape;
  shape.kind = DomainKind::rectangle;
  shape.width = width;
  shape.height = height;
  shape.center = Point(0.5 * width, 0.5 * height);
  shape.contains = rectangle_predicate(width, height);
  return std::make_shared<DomainMask>(grid, flag_nodes(grid, shape.contains), shape);
}

MaskPtr build_disc(double radius, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("build_disc: h must be positive");
  if (radius < 3.0 * h * (1.0 - 1e-12)) throw std::invalid_argument("build_disc: mesh too coarse (radius must be >= 3h)");
  const int n = steps_to_cover(radius, h);
  Grid grid;
  grid.h = h;
  grid.nx = 2 * n + 1;
  grid.ny = 2 * n + 1;
  grid.offset_i = -n;
  grid.offset_j = -n;
  DomainShape shape;
  shape.kind = DomainKind::disc;
  shape.radius = radius;
  shape.contains = disc_predicate(shape.center, radius);
  return std::make_shared<DomainMask>(grid, flag_nodes(grid, shape.contains), shape);
}

MaskPtr build_wedge(double m, double h) {
  if (!(m > 1.0)) throw std::invalid_argument("build_wedge: opening parameter m must exceed 1");
  if (!(h > 0.0) || h > 1.0 / 20.0) throw std::invalid_argument("build_wedge: h must lie in (0, 1/20]");
  const int ni = steps_to_cover(1.0, h);
  const int nj = steps_to_cover(1.0 / m, h);
  Grid grid;
  grid.h = h;
  grid.nx = ni + 1;
  grid.ny = 2 * nj + 1;
  grid.offset_j = -nj;
  DomainShape shape;
  shape.kind = DomainKind::wedge;
  shape.m = m;
  shape.center = Point(2.0 / 3.0, 0.0);
  shape.contains = wedge_predicate(m);
  return std::make_shared<DomainMask>(grid, flag_nodes(grid, shape.contains), shape);
}

MaskPtr scale_mask(const DomainMask& mask, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("scale_mask: delta must lie in (0, 1)");
  const auto base = mask.shape().contains;
  DomainShape shape;
  shape.kind = DomainKind::custom;
  // Cone and disc tests are written without dividing by delta so that nodes on
  // the slanted edges round the same way as in the original mask.
  if (mask.kind() == DomainKind::wedge) {
    const double m = mask.shape().m;
    shape.contains = [m, delta](const Point& x) { return m * std::abs(x.y()) < x.x() && x.x() < delta; };
  } else if (mask.kind() == DomainKind::disc) {
    shape.contains = disc_predicate(mask.shape().center, delta * mask.shape().radius);
  } else {
    shape.contains = [base, delta](const Point& x) { return base(x / delta); };
  }
  return std::make_shared<DomainMask>(mask.grid(), flag_nodes(mask.grid(), shape.contains), shape);
}

double domain_area(const DomainMask& mask) {
  const DomainShape& shape = mask.shape();
  switch (shape.kind) {
    case DomainKind::rectangle: return shape.width * shape.height;
    case DomainKind::disc: return M_PI * shape.radius * shape.radius;
    case DomainKind::wedge: return 1.0 / shape.m;
    case DomainKind::custom: break;
  }
  return mask.measure();
}

bool is_subset(const DomainMask& inner, const DomainMask& outer) {
  const Grid& a = inner.grid();
  const Grid& b = outer.grid();
  if (a.nx != b.nx || a.ny != b.ny || a.h != b.h || a.offset_i != b.offset_i || a.offset_j != b.offset_j ||
      a.origin != b.origin)
    throw std::invalid_argument("is_subset: masks live on different grids");
  for (Eigen::Index p = 0; p < inner.size(); ++p)
    if (!outer.is_interior(inner.node_i(p), inner.node_j(p))) return false;
  return true;
}

Eigen::ArrayXd distance_to_boundary(const DomainMask& mask) {
  const Grid& grid = mask.grid();
  // The nearest non-interior node always has an interior lattice neighbour.
  std::vector<Point> collar;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (mask.is_interior(i, j)) continue;
      if (mask.is_interior(i + 1, j) || mask.is_interior(i - 1, j) || mask.is_interior(i, j + 1) ||
          mask.is_interior(i, j - 1))
        collar.push_back(grid.node(i, j));
    }
  }
  Eigen::ArrayXd dist(mask.size());
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    const Point x = mask.position(p);
    double best = std::numeric_limits<double>::infinity();
    for (const Point& q : collar) best = std::min(best, (x - q).squaredNorm());
    dist[p] = std::sqrt(best);
  }
  return dist;
}

void write_mask(const DomainMask& mask, const std::string& csv_path, const std::string& sidecar_path) {
  const Grid& grid = mask.grid();
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open " + csv_path);
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) out << (i ? "," : "") << (mask.is_interior(i, j) ? 1 : 0);
      out << '\n';
    }
  }
  const DomainShape& shape = mask.shape();
  nlohmann::json side;
  side["h"] = grid.h;
  side["origin"] = {grid.corner().x(), grid.corner().y()};
  side["nx"] = grid.nx;
  side["ny"] = grid.ny;
  side["kind"] = to_string(shape.kind);
  switch (shape.kind) {
    case DomainKind::rectangle:
      side["width"] = shape.width;
      side["height"] = shape.height;
      break;
    case DomainKind::disc:
      side["radius"] = shape.radius;
      side["center"] = {shape.center.x(), shape.center.y()};
      break;
    case DomainKind::wedge: side["m"] = shape.m; break;
    case DomainKind::custom: break;
  }
  std::ofstream out(sidecar_path);
  if (!out) throw std::runtime_error("cannot open " + sidecar_path);
  out << side.dump(2) << '\n';
}

MaskPtr read_mask(const std::string& csv_path, const std::string& sidecar_path) {
  std::ifstream side_in(sidecar_path);
  if (!side_in) throw std::runtime_error("cannot open " + sidecar_path);
  const nlohmann::json side = nlohmann::json::parse(side_in);

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  std::vector<std::vector<char>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<char> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "1") row.push_back(1);
      else if (cell == "0") row.push_back(0);
      else throw std::runtime_error("mask csv: cells must be 0 or 1, got '" + cell + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw std::runtime_error("mask csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("mask csv: empty file");

  Grid grid;
  grid.h = side.at("h").get<double>();
  grid.origin = Point(side.at("origin").at(0).get<double>(), side.at("origin").at(1).get<double>());
  grid.nx = static_cast<int>(rows.front().size());
  grid.ny = static_cast<int>(rows.size());
  if (side.contains("nx") && side.at("nx").get<int>() != grid.nx) throw std::runtime_error("mask csv: nx mismatch");
  if (side.contains("ny") && side.at("ny").get<int>() != grid.ny) throw std::runtime_error("mask csv: ny mismatch");

  std::vector<char> flags;
  flags.reserve(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (const auto& row : rows) flags.insert(flags.end(), row.begin(), row.end());

  DomainShape shape;
  shape.kind = domain_kind_from_string(side.at("kind").get<std::string>());
  switch (shape.kind) {
    case DomainKind::rectangle:
      shape.width = side.at("width").get<double>();
      shape.height = side.at("height").get<double>();
      shape.center = Point(0.5 * shape.width, 0.5 * shape.height);
      shape.contains = rectangle_predicate(shape.width, shape.height);
      break;
    case DomainKind::disc:
      shape.radius = side.at("radius").get<double>();
      shape.center = Point(side.at("center").at(0).get<double>(), side.at("center").at(1).get<double>());
      shape.contains = disc_predicate(shape.center, shape.radius);
      break;
    case DomainKind::wedge:
      shape.m = side.at("m").get<double>();
      shape.center = Point(2.0 / 3.0, 0.0);
      shape.contains = wedge_predicate(shape.m);
      break;
    case DomainKind::custom: break;
  }
  return std::make_shared<DomainMask>(grid, std::move(flags), std::move(shape));
}

}  // namespace seglab
