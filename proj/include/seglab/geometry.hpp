#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace seglab {

/// Spatial dimension of every code path. Formulas that carry N use this.
inline constexpr int kDim = 2;

using Point = Eigen::Vector2d;

/// Uniform lattice; node (i, j) sits at origin + ((i + offset_i) h, (j + offset_j) h).
/// Builders keep origin at zero and put the shift in the integer offsets so
/// that mirrored nodes get bit-identical mirrored coordinates.
struct Grid {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  Point origin = Point::Zero();
  int offset_i = 0;
  int offset_j = 0;

  Point node(int i, int j) const {
    return origin + h * Point(static_cast<double>(i + offset_i), static_cast<double>(j + offset_j));
  }
  /// Coordinates of node (0, 0).
  Point corner() const { return node(0, 0); }
  int linear(int i, int j) const { return j * nx + i; }
  void validate() const;
};

enum class DomainKind { rectangle, disc, wedge, custom };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Analytic description kept alongside the node set. `contains` is the open
/// set Omega; it is what scale_mask evaluates at x / delta.
struct DomainShape {
  DomainKind kind = DomainKind::custom;
  double width = 0.0;   // rectangle
  double height = 0.0;  // rectangle
  double radius = 0.0;  // disc
  Point center = Point::Zero();
  double m = 0.0;  // wedge opening: m |x2| < x1 < 1
  std::function<bool(const Point&)> contains;
};

/// Interior node set of a discrete domain on a Grid.
///
/// Values of grid functions live only on interior nodes, indexed 0..size()-1
/// in row-major (j outer, i inner) order. Every interior node keeps all four
/// lattice neighbours inside the grid; a neighbour that is not interior reads
/// as zero (homogeneous Dirichlet data).
class DomainMask {
 public:
  DomainMask(Grid grid, std::vector<char> interior, DomainShape shape);

  const Grid& grid() const { return grid_; }
  const DomainShape& shape() const { return shape_; }
  DomainKind kind() const { return shape_.kind; }
  double h() const { return grid_.h; }

  Eigen::Index size() const { return static_cast<Eigen::Index>(node_i_.size()); }
  /// h^2 times the interior node count.
  double measure() const { return grid_.h * grid_.h * static_cast<double>(size()); }

  bool is_interior(int i, int j) const;
  /// Interior index of node (i, j), or -1.
  int index_of(int i, int j) const;
  int node_i(Eigen::Index p) const { return node_i_[static_cast<std::size_t>(p)]; }
  int node_j(Eigen::Index p) const { return node_j_[static_cast<std::size_t>(p)]; }
  Point position(Eigen::Index p) const { return grid_.node(node_i(p), node_j(p)); }

  /// Column p holds the interior indices of the E, W, N, S neighbours of
  /// node p, with -1 for non-interior neighbours.
  const Eigen::Array4Xi& neighbors() const { return neighbors_; }

  /// Whether the continuous domain contains x.
  bool contains(const Point& x) const { return shape_.contains(x); }

  const std::vector<char>& interior_flags() const { return interior_; }

 private:
  Grid grid_;
  std::vector<char> interior_;
  DomainShape shape_;
  std::vector<int> index_;
  std::vector<int> node_i_;
  std::vector<int> node_j_;
  Eigen::Array4Xi neighbors_;
};

using MaskPtr = std::shared_ptr<const DomainMask>;

/// Strict interior nodes of [0, width] x [0, height].
MaskPtr build_rectangle(double width, double height, double h);
/// Nodes with |x| < radius on a grid centred at the origin.
MaskPtr build_disc(double radius, double h);
/// Nodes strictly inside {m |x2| < x1 < 1}; the vertex 0 is a boundary node.
MaskPtr build_wedge(double m, double h);
/// Node set of {x : x / delta in Omega} on the same grid.
MaskPtr scale_mask(const DomainMask& mask, double delta);

/// Area of the continuous domain for the built-in shapes, h^2 times the node
/// count otherwise.
double domain_area(const DomainMask& mask);

/// Node-set inclusion on a shared grid.
bool is_subset(const DomainMask& inner, const DomainMask& outer);

/// Euclidean distance from each interior node to the nearest non-interior
/// grid node.
Eigen::ArrayXd distance_to_boundary(const DomainMask& mask);

/// CSV matrix of {0,1} (row j holds nodes (0..nx-1, j)) plus a JSON sidecar
/// with h, origin, kind and shape parameters.
void write_mask(const DomainMask& mask, const std::string& csv_path, const std::string& sidecar_path);
MaskPtr read_mask(const std::string& csv_path, const std::string& sidecar_path);

}  // namespace seglab
