#pragma once

#include "seglab/energy.hpp"

#include <string>

namespace seglab {

/// Bilinear interpolation of an interior-node field at x; non-interior nodes
/// and points off the grid read as zero.
double sample_bilinear(const DomainMask& mask, const Field<double>& values, const Point& x);

/// Full-grid matrix of a field (row j, column i), zero off the interior.
Eigen::MatrixXd to_grid(const DomainMask& mask, const Field<double>& values);

/// CSV matrix, one grid row per line in increasing j, 17 significant digits.
void write_field_csv(const DomainMask& mask, const Field<double>& values, const std::string& path);
Field<double> read_field_csv(const DomainMask& mask, const std::string& path);

/// Binary 8-bit PGM; pixel = round(255 clamp(u / scale, 0, 1)), top row is
/// the largest j.
void write_field_pgm(const DomainMask& mask, const Field<double>& values, double scale, const std::string& path);

}  // namespace seglab
