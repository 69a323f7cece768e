#pragma once

#include <cmath>
#include <stdexcept>

namespace seglab {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename Scalar, typename Fn>
Scalar simpson_step(const Fn& fn, Scalar a, Scalar fa, Scalar b, Scalar fb, Scalar m, Scalar fm, Scalar whole,
                    Scalar tol, int depth) {
  const Scalar lm = (a + m) / 2;
  const Scalar rm = (m + b) / 2;
  const Scalar flm = fn(lm);
  const Scalar frm = fn(rm);
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  if (depth <= 0) throw QuadratureError("adaptive Simpson: bisection limit reached before tolerance");
  return simpson_step(fn, a, fa, m, fm, lm, flm, left, tol / 2, depth - 1) +
         simpson_step(fn, m, fm, b, fb, rm, frm, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson rule for the integral of fn over [a, b] to absolute
/// tolerance `tol`, with at most `max_levels` bisection levels.
template <typename Scalar, typename Fn>
Scalar adaptive_simpson(const Fn& fn, Scalar a, Scalar b, Scalar tol = Scalar(1e-10), int max_levels = 30) {
  if (a == b) return Scalar(0);
  if (b < a) return -adaptive_simpson(fn, b, a, tol, max_levels);
  const Scalar fa = fn(a);
  const Scalar fb = fn(b);
  const Scalar m = (a + b) / 2;
  const Scalar fm = fn(m);
  const Scalar whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::simpson_step(fn, a, fa, b, fb, m, fm, whole, tol, max_levels);
}

}  // namespace seglab
