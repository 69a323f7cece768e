#pragma once

#include "seglab/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seglab {

/// Upper bound on the species count, used for stack buffers in nodewise loops.
inline constexpr int kMaxSpecies = 16;

enum class GrowthLaw { logistic, custom };

/// Internal growth law g with g = 0 on (-inf, 0], g'(0+) = 1, g >= 0 on
/// (0, beta), g < 0 beyond beta, and alpha = int_0^beta g > 0.
template <typename Scalar>
struct Nonlinearity {
  GrowthLaw law = GrowthLaw::logistic;
  std::string name = "logistic";
  Scalar beta = 1;
  Scalar alpha = Scalar(1) / 6;
  Scalar gmax = Scalar(1) / 4;
  // Recorded only; the extinction theorem assumes it.
  bool lipschitz = true;
  std::function<Scalar(Scalar)> g_fn;
  std::function<Scalar(Scalar)> G_fn;

  Scalar g(Scalar s) const {
    if (!(s > 0)) return Scalar(0);
    if (law == GrowthLaw::logistic) return s - s * s;
    return g_fn(s);
  }

  bool has_closed_form() const { return law == GrowthLaw::logistic || static_cast<bool>(G_fn); }

  /// G(t) = int_0^t g.
  Scalar G(Scalar t) const {
    if (!(t > 0)) return Scalar(0);
    if (law == GrowthLaw::logistic) return t * t * (Scalar(0.5) - t / 3);
    if (G_fn) return G_fn(t);
    return adaptive_simpson<Scalar>([this](Scalar s) { return g(s); }, Scalar(0), t, Scalar(1e-10), 30);
  }

  /// G(t1) - G(t0) without cancellation against G(t0).
  Scalar G_change(Scalar t0, Scalar t1) const {
    if (t0 == t1) return Scalar(0);
    if (law == GrowthLaw::logistic && t0 > 0 && t1 > 0) {
      const Scalar d = t1 - t0;
      return d * (t0 + d / 2 - t0 * t0 - t0 * d - d * d / 3);
    }
    if (law == GrowthLaw::custom && !G_fn && t0 > 0 && t1 > 0)
      return adaptive_simpson<Scalar>([this](Scalar s) { return g(s); }, t0, t1, Scalar(1e-12), 30);
    return G(t1) - G(t0);
  }
};

/// g(s) = s - s^2 for s > 0: beta = 1, alpha = 1/6, max g = 1/4.
template <typename Scalar>
Nonlinearity<Scalar> logistic() {
  return Nonlinearity<Scalar>{};
}

/// User growth law. beta and max_[0,beta] g must be given; alpha is computed by
/// quadrature. Throws std::invalid_argument when a sampled (F1)-(F3) check fails.
template <typename Scalar>
Nonlinearity<Scalar> custom_nonlinearity(std::string name, std::function<Scalar(Scalar)> g, Scalar beta, Scalar gmax,
                                         std::function<Scalar(Scalar)> G = {}, bool lipschitz = true) {
  if (!g) throw std::invalid_argument("custom nonlinearity: g is required");
  if (!(beta > 0)) throw std::invalid_argument("custom nonlinearity: beta must be positive");
  if (!(gmax > 0)) throw std::invalid_argument("custom nonlinearity: gmax must be positive");
  Nonlinearity<Scalar> out;
  out.law = GrowthLaw::custom;
  out.name = std::move(name);
  out.beta = beta;
  out.gmax = gmax;
  out.lipschitz = lipschitz;
  out.g_fn = std::move(g);
  out.G_fn = std::move(G);

  // g is only consulted for s > 0, but a law that is nonzero below is misdeclared.
  for (Scalar s : {Scalar(-1), Scalar(-1e-3), Scalar(0)})
    if (out.g_fn(s) != 0) throw std::invalid_argument("custom nonlinearity: g must vanish on (-inf, 0]");
  const Scalar t = Scalar(1e-6);
  if (std::abs(out.g_fn(t) / t - 1) >= Scalar(0.05))
    throw std::invalid_argument("custom nonlinearity: right derivative at 0 must equal 1");
  for (Scalar frac : {Scalar(0.25), Scalar(0.5), Scalar(0.75)})
    if (out.g_fn(frac * beta) < 0) throw std::invalid_argument("custom nonlinearity: g must be >= 0 on (0, beta)");
  for (Scalar frac : {Scalar(1.01), Scalar(1.5), Scalar(2)})
    if (!(out.g_fn(frac * beta) < 0)) throw std::invalid_argument("custom nonlinearity: g must be < 0 beyond beta");
  out.alpha = adaptive_simpson<Scalar>([&](Scalar s) { return out.g(s); }, Scalar(0), beta, Scalar(1e-10), 30);
  if (!(out.alpha > 0)) throw std::invalid_argument("custom nonlinearity: int_0^beta g must be positive");
  return out;
}

/// The k growth laws f_i built from one g: species 0 uses g itself, species
/// i >= 1 uses (1 / (sqrt(k) eps_i)) g(sqrt(k) s / eps_i), whose zero is
/// beta_i = beta eps_i / sqrt(k) and whose integral up to beta_i is alpha / k.
///
/// With `identical` set every species uses g and eps is ignored.
template <typename Scalar>
struct ScaledFamily {
  Nonlinearity<Scalar> base;
  int k = 1;
  std::vector<Scalar> eps;  // eps[i - 1] belongs to species i
  bool identical = false;

  ScaledFamily() = default;
  ScaledFamily(Nonlinearity<Scalar> g, int species, std::vector<Scalar> scales, bool same_law = false)
      : base(std::move(g)), k(species), eps(std::move(scales)), identical(same_law) {
    if (k < 1 || k > kMaxSpecies) throw std::invalid_argument("family: species count out of range");
    if (identical) {
      eps.assign(static_cast<std::size_t>(k - 1), Scalar(1));
    } else {
      if (static_cast<int>(eps.size()) != k - 1)
        throw std::invalid_argument("family: need k - 1 scale parameters epsilon");
      for (Scalar e : eps)
        if (!(e > 0 && e < 1)) throw std::invalid_argument("family: every epsilon must lie in (0, 1)");
    }
  }

  static ScaledFamily same_law(Nonlinearity<Scalar> g, int species) {
    return ScaledFamily(std::move(g), species, {}, true);
  }

  void check_index(int i) const {
    if (i < 0 || i >= k) throw std::out_of_range("family: species index out of range");
  }

  bool scaled(int i) const { return i > 0 && !identical; }

  /// sqrt(k) / eps_i for scaled species.
  Scalar stretch(int i) const { return std::sqrt(Scalar(k)) / eps[static_cast<std::size_t>(i - 1)]; }

  Scalar beta(int i) const {
    check_index(i);
    return scaled(i) ? base.beta / stretch(i) : base.beta;
  }

  Scalar f(int i, Scalar s) const {
    check_index(i);
    if (!scaled(i)) return base.g(s);
    const Scalar c = stretch(i);
    return base.g(c * s) / (eps[static_cast<std::size_t>(i - 1)] * std::sqrt(Scalar(k)));
  }

  /// F_i(s) = int_0^s f_i; closed form when the base law has one.
  Scalar F(int i, Scalar s) const {
    check_index(i);
    if (!(s > 0)) return Scalar(0);
    if (!scaled(i)) return base.G(s);
    if (base.has_closed_form()) return base.G(stretch(i) * s) / Scalar(k);
    return adaptive_simpson<Scalar>([&](Scalar t) { return f(i, t); }, Scalar(0), s, Scalar(1e-10), 30);
  }

  /// Potential F_i evaluated by quadrature regardless of closed forms.
  Scalar F_quadrature(int i, Scalar s) const {
    check_index(i);
    if (!(s > 0)) return Scalar(0);
    return adaptive_simpson<Scalar>([&](Scalar t) { return f(i, t); }, Scalar(0), s, Scalar(1e-10), 30);
  }

  /// F_i(s1) - F_i(s0).
  Scalar F_change(int i, Scalar s0, Scalar s1) const {
    if (!scaled(i)) return base.G_change(s0, s1);
    const Scalar c = stretch(i);
    return base.G_change(c * s0, c * s1) / Scalar(k);
  }

  Scalar alpha(int i) const { return scaled(i) ? base.alpha / Scalar(k) : base.alpha; }
};

enum class CouplingKind { quartic, custom };

/// Interaction potential H on R^k with H >= 0, s_i dH/ds_i >= 0 and H = 0
/// whenever at most one coordinate is nonzero.
template <typename Scalar>
struct Coupling {
  CouplingKind kind = CouplingKind::quartic;
  int k = 2;
  std::function<Scalar(std::span<const Scalar>)> H_fn;
  std::function<void(std::span<const Scalar>, std::span<Scalar>)> dH_fn;

  // Pairwise sums instead of (sum s^2)^2 - sum s^4 keep H >= 0 in floating point.
  Scalar H(std::span<const Scalar> s) const {
    if (kind == CouplingKind::custom) return H_fn(s);
    Scalar total = 0;
    Scalar tail = 0;
    for (std::size_t i = s.size(); i-- > 0;) {
      const Scalar v2 = s[i] * s[i];
      total += v2 * tail;
      tail += v2;
    }
    return total;
  }

  void dH(std::span<const Scalar> s, std::span<Scalar> out) const {
    if (kind == CouplingKind::custom) {
      dH_fn(s, out);
      return;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      Scalar others = 0;
      for (std::size_t j = 0; j < s.size(); ++j)
        if (j != i) others += s[j] * s[j];
      out[i] = 2 * s[i] * others;
    }
  }
};

/// H(s) = 1/2 sum_{i != j} s_i^2 s_j^2, dH/ds_i = 2 s_i sum_{j != i} s_j^2.
template <typename Scalar>
Coupling<Scalar> coupling_quartic(int k) {
  if (k < 1 || k > kMaxSpecies) throw std::invalid_argument("coupling: species count out of range");
  Coupling<Scalar> c;
  c.kind = CouplingKind::quartic;
  c.k = k;
  return c;
}

template <typename Scalar>
Coupling<Scalar> coupling_custom(int k, std::function<Scalar(std::span<const Scalar>)> H,
                                 std::function<void(std::span<const Scalar>, std::span<Scalar>)> dH) {
  if (!H || !dH) throw std::invalid_argument("coupling: custom H needs both H and its partials");
  Coupling<Scalar> c;
  c.kind = CouplingKind::custom;
  c.k = k;
  c.H_fn = std::move(H);
  c.dH_fn = std::move(dH);
  return c;
}

}  // namespace seglab
