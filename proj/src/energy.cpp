#include "seglab/energy.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace seglab {

namespace {

Eigen::SparseMatrix<double> dirichlet_laplacian_matrix(const DomainMask& mask) {
  const auto& nb = mask.neighbors();
  const double inv_h2 = 1.0 / (mask.h() * mask.h());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(mask.size()) * 5);
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    entries.emplace_back(p, p, 4.0 * inv_h2);
    for (int d = 0; d < 4; ++d)
      if (nb(d, p) >= 0) entries.emplace_back(p, nb(d, p), -inv_h2);
  }
  Eigen::SparseMatrix<double> a(mask.size(), mask.size());
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

}  // namespace

EigenResult dirichlet_ground_state(const DomainMask& mask, const EigenOptions& opts) {
  const Eigen::SparseMatrix<double> a = dirichlet_laplacian_matrix(mask);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(opts.cg_tol);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * mask.size()));
  cg.compute(a);

  // Positive start; the ground state is positive so it has a nonzero overlap.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(mask.size());
  x.normalize();
  double mu = x.dot(a * x);
  for (int it = 1; it <= opts.max_iters; ++it) {
    Eigen::VectorXd y = cg.solveWithGuess(x, x);
    if (cg.info() != Eigen::Success) throw std::runtime_error("lambda1: conjugate gradient did not converge");
    y.normalize();
    const double next = y.dot(a * y);
    x = std::move(y);
    if (std::abs(next - mu) <= opts.rel_tol * std::abs(next)) {
      EigenResult out;
      out.value = next;
      out.iterations = it;
      const double scale = 1.0 / mask.h();  // unit h-weighted l2 norm
      out.mode = (x.array() * (x.sum() < 0 ? -scale : scale)).max(0.0);
      return out;
    }
    mu = next;
  }
  throw std::runtime_error("lambda1: inverse iteration exceeded " + std::to_string(opts.max_iters) + " iterations");
}

double lambda1(const DomainMask& mask, const EigenOptions& opts) { return dirichlet_ground_state(mask, opts).value; }

}  // namespace seglab
