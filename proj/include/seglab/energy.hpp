#pragma once

#include "seglab/geometry.hpp"
#include "seglab/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace seglab {

/// One value per interior node.
template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Interior nodes by species: column i is the density of species i.
template <typename Scalar>
using FieldSet = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct DensityField {
  MaskPtr mask;
  Field<Scalar> values;
};

/// k densities on one mask together with the growth family, coupling,
/// growth scale lambda and competition rate kappa.
template <typename Scalar>
struct SpeciesSystem {
  MaskPtr mask;
  FieldSet<Scalar> u;
  ScaledFamily<Scalar> family;
  Coupling<Scalar> coupling;
  Scalar lambda = 1;
  Scalar kappa = 0;

  int species() const { return family.k; }
  DensityField<Scalar> field(int i) const { return {mask, u.col(i)}; }

  void validate() const {
    if (!mask) throw std::invalid_argument("system: no mask");
    if (u.rows() != mask->size() || u.cols() != family.k)
      throw std::invalid_argument("system: field array does not match mask size and species count");
    if (family.k > 1 && coupling.k != family.k)
      throw std::invalid_argument("system: coupling arity differs from species count");
    if (!(lambda > 0)) throw std::invalid_argument("system: lambda must be positive");
    if (!(kappa >= 0)) throw std::invalid_argument("system: kappa must be nonnegative");
    if (!u.allFinite()) throw std::invalid_argument("system: non-finite density values");
  }
};

/// Energy split by term. `potential` already carries the factor lambda and
/// `interaction` excludes kappa:
///   total = sum_i (dirichlet[i] - potential[i]) + kappa * interaction.
template <typename Scalar>
struct EnergyReport {
  std::vector<Scalar> dirichlet;
  std::vector<Scalar> potential;
  Scalar interaction = 0;
  Scalar kappa = 0;
  Scalar total = 0;

  /// Energy without the interaction term.
  Scalar free_energy() const {
    Scalar s = 0;
    for (std::size_t i = 0; i < dirichlet.size(); ++i) s += dirichlet[i] - potential[i];
    return s;
  }
  Scalar species_energy(int i) const {
    return dirichlet[static_cast<std::size_t>(i)] - potential[static_cast<std::size_t>(i)];
  }
};

/// Five-point Laplacian (u_E + u_W + u_N + u_S - 4 u_C) / h^2, with
/// non-interior neighbours read as zero.
template <typename Derived>
Field<typename Derived::Scalar> laplacian(const DomainMask& mask, const Eigen::ArrayBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  const auto& nb = mask.neighbors();
  const Scalar inv_h2 = Scalar(1) / (Scalar(mask.h()) * Scalar(mask.h()));
  Field<Scalar> out(mask.size());
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    Scalar s = -4 * u[p];
    for (int d = 0; d < 4; ++d)
      if (nb(d, p) >= 0) s += u[nb(d, p)];
    out[p] = s * inv_h2;
  }
  return out;
}

template <typename Scalar>
Field<Scalar> laplacian(const DensityField<Scalar>& field) {
  return laplacian(*field.mask, field.values);
}

/// 1/2 sum over lattice edges of the squared jump; every interior-interior and
/// interior-boundary edge counted once. Equals 1/2 int |grad u|^2 with h^2
/// weights, and its derivative at node p is h^2 times (-Laplacian u)(p).
template <typename Derived>
typename Derived::Scalar dirichlet_energy(const DomainMask& mask, const Eigen::ArrayBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  const auto& nb = mask.neighbors();
  Scalar s = 0;
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    const Scalar up = u[p];
    // East and north edges own interior-interior pairs; west and south only
    // contribute edges to the boundary.
    for (int d : {0, 2}) {
      const Scalar diff = nb(d, p) >= 0 ? up - u[nb(d, p)] : up;
      s += diff * diff;
    }
    for (int d : {1, 3})
      if (nb(d, p) < 0) s += up * up;
  }
  return s / 2;
}

/// lambda h^2 sum_p F_i(u(p)).
template <typename Scalar, typename Derived>
Scalar potential_energy(const DomainMask& mask, const Eigen::ArrayBase<Derived>& u, const ScaledFamily<Scalar>& fam,
                        int i, Scalar lambda) {
  Scalar s = 0;
  for (Eigen::Index p = 0; p < mask.size(); ++p) s += fam.F(i, Scalar(u[p]));
  return lambda * Scalar(mask.h()) * Scalar(mask.h()) * s;
}

/// h^2 sum_p H(U(p)).
template <typename Scalar>
Scalar interaction_energy(const DomainMask& mask, const FieldSet<Scalar>& u, const Coupling<Scalar>& coupling) {
  const Eigen::Index k = u.cols();
  if (k < 2) return Scalar(0);
  Scalar s = 0;
  std::array<Scalar, kMaxSpecies> row{};
  for (Eigen::Index p = 0; p < u.rows(); ++p) {
    for (Eigen::Index i = 0; i < k; ++i) row[static_cast<std::size_t>(i)] = u(p, i);
    s += coupling.H(std::span<const Scalar>(row.data(), static_cast<std::size_t>(k)));
  }
  return Scalar(mask.h()) * Scalar(mask.h()) * s;
}

/// Energy of a system and, optionally, its nodal gradient
///   grad_i = -Laplacian u_i - lambda f_i(u_i) + kappa dH/ds_i(U),
/// scaled so that the directional derivative of the total along D is
/// h^2 <grad, D>.
template <typename Scalar>
EnergyReport<Scalar> evaluate_system(const SpeciesSystem<Scalar>& sys, FieldSet<Scalar>* grad) {
  const DomainMask& mask = *sys.mask;
  const int k = sys.species();
  const Eigen::Index n = mask.size();
  const Scalar h = Scalar(mask.h());
  const Scalar h2 = h * h;
  const Scalar inv_h2 = Scalar(1) / h2;
  const auto& nb = mask.neighbors();
  const auto& fam = sys.family;

  EnergyReport<Scalar> rep;
  rep.dirichlet.assign(static_cast<std::size_t>(k), Scalar(0));
  rep.potential.assign(static_cast<std::size_t>(k), Scalar(0));
  rep.kappa = sys.kappa;
  if (grad) grad->resize(n, k);

  for (int i = 0; i < k; ++i) {
    const auto u = sys.u.col(i);
    Scalar dir = 0;
    Scalar pot = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      const Scalar up = u[p];
      const int e = nb(0, p), w = nb(1, p), no = nb(2, p), so = nb(3, p);
      const Scalar ue = e >= 0 ? u[e] : Scalar(0);
      const Scalar uw = w >= 0 ? u[w] : Scalar(0);
      const Scalar un = no >= 0 ? u[no] : Scalar(0);
      const Scalar us = so >= 0 ? u[so] : Scalar(0);
      dir += (up - ue) * (up - ue) + (up - un) * (up - un);
      if (w < 0) dir += up * up;
      if (so < 0) dir += up * up;
      pot += fam.F(i, up);
      if (grad) (*grad)(p, i) = (4 * up - ue - uw - un - us) * inv_h2 - sys.lambda * fam.f(i, up);
    }
    rep.dirichlet[static_cast<std::size_t>(i)] = dir / 2;
    rep.potential[static_cast<std::size_t>(i)] = sys.lambda * h2 * pot;
  }

  if (k >= 2) {
    Scalar inter = 0;
    std::array<Scalar, kMaxSpecies> row{};
    std::array<Scalar, kMaxSpecies> d{};
    const std::size_t ks = static_cast<std::size_t>(k);
    for (Eigen::Index p = 0; p < n; ++p) {
      bool any = false;
      for (int i = 0; i < k; ++i) {
        row[static_cast<std::size_t>(i)] = sys.u(p, i);
        any = any || sys.u(p, i) != Scalar(0);
      }
      if (!any) continue;
      const std::span<const Scalar> s(row.data(), ks);
      inter += sys.coupling.H(s);
      if (grad && sys.kappa != Scalar(0)) {
        sys.coupling.dH(s, std::span<Scalar>(d.data(), ks));
        for (int i = 0; i < k; ++i) (*grad)(p, i) += sys.kappa * d[static_cast<std::size_t>(i)];
      }
    }
    rep.interaction = h2 * inter;
  }

  rep.total = rep.free_energy() + sys.kappa * rep.interaction;
  return rep;
}

/// Energy of the system at `to` minus its energy at `from`, summed from
/// edge- and node-local differences so that small changes keep their
/// relative accuracy.
template <typename Scalar>
Scalar energy_change(const SpeciesSystem<Scalar>& sys, const FieldSet<Scalar>& from, const FieldSet<Scalar>& to) {
  const DomainMask& mask = *sys.mask;
  const int k = sys.species();
  const Eigen::Index n = mask.size();
  const Scalar h2 = Scalar(mask.h()) * Scalar(mask.h());
  const auto& nb = mask.neighbors();
  Scalar dir = 0;
  Scalar pot = 0;
  for (int i = 0; i < k; ++i) {
    const auto u = from.col(i);
    const auto v = to.col(i);
    Scalar pot_i = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      const Scalar up = u[p];
      const Scalar dp = v[p] - up;
      for (int d : {0, 2}) {
        const int q = nb(d, p);
        const Scalar e = q >= 0 ? up - u[q] : up;
        const Scalar de = q >= 0 ? dp - (v[q] - u[q]) : dp;
        dir += de * (e + de / 2);
      }
      for (int d : {1, 3})
        if (nb(d, p) < 0) dir += dp * (up + dp / 2);
      if (dp != Scalar(0)) pot_i += sys.family.F_change(i, up, v[p]);
    }
    pot += pot_i;
  }
  Scalar inter = 0;
  if (k >= 2 && sys.kappa != Scalar(0)) {
    std::array<Scalar, kMaxSpecies> a{};
    std::array<Scalar, kMaxSpecies> b{};
    const std::size_t ks = static_cast<std::size_t>(k);
    for (Eigen::Index p = 0; p < n; ++p) {
      bool changed = false;
      for (int i = 0; i < k; ++i) {
        a[static_cast<std::size_t>(i)] = from(p, i);
        b[static_cast<std::size_t>(i)] = to(p, i);
        changed = changed || from(p, i) != to(p, i);
      }
      if (!changed) continue;
      inter += sys.coupling.H(std::span<const Scalar>(b.data(), ks)) - sys.coupling.H(std::span<const Scalar>(a.data(), ks));
    }
  }
  return dir - sys.lambda * h2 * pot + sys.kappa * h2 * inter;
}

/// I = sum_i int (1/2 |grad u_i|^2 - lambda F_i(u_i)) + kappa int H(U);
/// with kappa = 0 this is the free energy of the segregation problem.
template <typename Scalar>
EnergyReport<Scalar> energy_total(const SpeciesSystem<Scalar>& sys) {
  return evaluate_system<Scalar>(sys, nullptr);
}

template <typename Scalar>
FieldSet<Scalar> energy_gradient(const SpeciesSystem<Scalar>& sys) {
  FieldSet<Scalar> g;
  evaluate_system<Scalar>(sys, &g);
  return g;
}

/// J_i(u) = int (1/2 |grad u|^2 - lambda F_i(u)) for one species in isolation.
template <typename Scalar>
Scalar single_species_energy(const DensityField<Scalar>& field, int i, const ScaledFamily<Scalar>& fam, Scalar lambda) {
  return dirichlet_energy(*field.mask, field.values) - potential_energy(*field.mask, field.values, fam, i, lambda);
}

/// (h^2 sum u^2)^(1/2).
template <typename Derived>
typename Derived::Scalar l2_mass(const DomainMask& mask, const Eigen::ArrayBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  return std::sqrt(Scalar(mask.h()) * Scalar(mask.h()) * u.square().sum());
}

/// Options for the inverse power iteration behind lambda1.
struct EigenOptions {
  double rel_tol = 1e-8;
  int max_iters = 10000;
  double cg_tol = 1e-10;
};

struct EigenResult {
  double value = 0.0;
  int iterations = 0;
  Field<double> mode;  // unit l2 (h-weighted), nonnegative
};

/// Smallest eigenvalue of the discrete Dirichlet Laplacian -Laplacian on the
/// mask, by inverse power iteration with conjugate-gradient solves. Throws
/// std::runtime_error when the iteration cap is exceeded.
EigenResult dirichlet_ground_state(const DomainMask& mask, const EigenOptions& opts = {});
double lambda1(const DomainMask& mask, const EigenOptions& opts = {});

}  // namespace seglab
