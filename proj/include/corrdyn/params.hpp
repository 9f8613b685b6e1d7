#ifndef CORRDYN_PARAMS_HPP
#define CORRDYN_PARAMS_HPP

#include <complex>

#include "corrdyn/errors.hpp"

namespace corrdyn {

using Complex = std::complex<double>;

// One member of the family f_c(z) = { w : (w - c)^q = z^p }.
// Each z has q forward images (q-th roots of z^p shifted by c) and each w has
// p backward images. q = 1 is the classical single-valued family z -> z^p + c;
// p > q is required throughout so that escape radii exist.
struct CorrespondenceParams {
  int p = 2;
  int q = 1;
  Complex c{0.0, 0.0};
};

inline bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void validate_params(const CorrespondenceParams& par) {
  if (par.q < 1) throw InvalidArgument("q must be a positive integer");
  if (par.p <= par.q)
    throw InvalidArgument("exponents must satisfy p > q >= 1 (p = q is unsupported)");
  if (!is_finite(par.c)) throw InvalidArgument("parameter c must be finite");
}

// Pinned numerical contracts, shared across modules.
namespace tol {
// Relative residual |(w-c)^q - z^p| <= germ_tol * max(1, |z|^p) for accepting
// a (z, w) pair as lying on the correspondence.
inline constexpr double germ_tol = 1e-8;
// Minimum distance a continuation path must keep from the branch point 0.
inline constexpr double path_clearance = 1e-6;
// Half-width of the |multiplier| = 1 band classified as indifferent.
inline constexpr double class_tol = 1e-9;
// Orbifold weight refuses evaluation closer than this to a ramified point.
inline constexpr double eps_sing = 1e-12;
// Bisection tolerance for escape_radius.
inline constexpr double escape_bisection = 1e-9;
}  // namespace tol

}  // namespace corrdyn

#endif
