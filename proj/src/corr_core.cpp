#include "corrdyn/corr_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace corrdyn {

namespace {

constexpr double kPi = std::numbers::pi;

Complex ipow(Complex z, int n) {
  // n >= 1, small. Plain repeated multiplication: for q = 1 callers this is
  // the exact op sequence of a hand-written z*z*...*z + c iteration.
  Complex acc = z;
  for (int i = 1; i < n; ++i) acc *= z;
  return acc;
}

// e^(2 pi i k / n) for k = 0..n-1. Axis values are exact and the table is
// conjugate-symmetric, so downstream mirror identities hold bitwise.
std::vector<Complex> unit_roots(int n) {
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (int k = 0; 2 * k <= n; ++k) {
    Complex w;
    if (4 * k % n == 0) {
      static const Complex axis[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      w = axis[(4 * k / n) % 4];
    } else {
      const double th = 2.0 * kPi * k / n;
      w = Complex(std::cos(th), std::sin(th));
    }
    out[static_cast<std::size_t>(k)] = w;
    if (k > 0 && 2 * k < n) out[static_cast<std::size_t>(n - k)] = std::conj(w);
  }
  return out;
}

// The n solutions X of X^n = u^a for u != 0, ordered by phase index k:
//   X_k = |u|^{a/n} exp(i (a arg u + 2 pi k) / n).
// Moduli go through exp((a/n) log|u|) in real arithmetic and phases are
// tracked separately, so large a cannot overflow an intermediate power.
// Lower half-plane u is evaluated as the conjugate of the mirrored input;
// that makes power_roots(conj u) == conj(power_roots(u)) exact, which the
// renderer's mirror-symmetry invariant relies on.
std::vector<Complex> power_roots(Complex u, int a, int n) {
  if (std::signbit(u.imag())) {
    std::vector<Complex> m = power_roots(std::conj(u), a, n);
    std::vector<Complex> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      out[static_cast<std::size_t>(k)] =
          std::conj(m[static_cast<std::size_t>((n - k) % n)]);
    return out;
  }
  const double mod = std::exp((static_cast<double>(a) / n) * std::log(std::abs(u)));
  const double th0 = static_cast<double>(a) * std::arg(u);
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double th = (th0 + 2.0 * kPi * k) / n;
    out[static_cast<std::size_t>(k)] = Complex(mod * std::cos(th), mod * std::sin(th));
  }
  return out;
}

void require_finite(Complex z, const char* what) {
  if (!is_finite(z)) throw InvalidArgument(std::string(what) + " must be finite");
}

// Relative residual of the defining equation at (z, w).
double pair_residual(Complex z, Complex w, const CorrespondenceParams& par) {
  const Complex zp = ipow(z, par.p);
  const Complex wq = ipow(w - par.c, par.q);
  return std::abs(wq - zp) / std::max(1.0, std::abs(zp));
}

double segment_distance_to_origin(Complex a, Complex b) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(a);
  double t = -(a.real() * d.real() + a.imag() * d.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(a + t * d);
}

}  // namespace

std::vector<Complex> forward_images(Complex z, const CorrespondenceParams& par) {
  validate_params(par);
  require_finite(z, "z");
  if (par.q == 1) return {ipow(z, par.p) + par.c};
  if (z == 0.0) return {par.c};  // all q roots collapse onto the critical value
  if (par.p % par.q == 0) {
    // q | p: every branch is the entire function c + zeta^k z^(p/q). Integer
    // powers keep real and axis-symmetric orbits exact, which matters at
    // repelling cycles where trig round-off would be amplified geometrically.
    const Complex v = ipow(z, par.p / par.q);
    const std::vector<Complex> zeta = unit_roots(par.q);
    std::vector<Complex> out(static_cast<std::size_t>(par.q));
    out[0] = par.c + v;
    for (int k = 1; k < par.q; ++k)
      out[static_cast<std::size_t>(k)] =
          par.c + zeta[static_cast<std::size_t>(k)] * v;
    return out;
  }
  std::vector<Complex> roots = power_roots(z, par.p, par.q);
  for (Complex& w : roots) w += par.c;
  return roots;
}

std::vector<Complex> backward_images(Complex w, const CorrespondenceParams& par) {
  validate_params(par);
  require_finite(w, "w");
  const Complex u = w - par.c;
  if (u == 0.0) return {Complex(0.0, 0.0)};
  return power_roots(u, par.q, par.p);
}

Complex branch_derivative(Complex z, Complex w, const CorrespondenceParams& par) {
  validate_params(par);
  require_finite(z, "z");
  require_finite(w, "w");
  const Complex u = w - par.c;
  if (z == 0.0 || u == 0.0)
    throw SingularPointError("branch derivative undefined at z = 0 or w = c");
  if (pair_residual(z, w, par) > tol::germ_tol)
    throw InvalidArgument("(z, w) does not satisfy the defining equation");
  // dw/dz = (p z^{p-1}) / (q (w-c)^{q-1}), assembled from log-magnitude and
  // phase so z^{p-1} never materializes.
  const double logmag = std::log(static_cast<double>(par.p) / par.q) +
                        (par.p - 1) * std::log(std::abs(z)) -
                        (par.q - 1) * std::log(std::abs(u));
  const double phase = (par.p - 1) * std::arg(z) - (par.q - 1) * std::arg(u);
  return std::polar(std::exp(logmag), phase);
}

double escape_radius(const CorrespondenceParams& par) {
  validate_params(par);
  const double e = static_cast<double>(par.p) / par.q;  // > 1
  const double a = std::abs(par.c);
  const auto g = [&](double r) { return std::pow(r, e) - a - 2.0 * r; };
  // g is convex with g(r) -> +inf; its minimum sits at r_min where
  // g'(r) = e r^{e-1} - 2 = 0. If the minimum is nonnegative the growth
  // condition holds for every r, so R = 1 suffices.
  const double r_min = std::pow(2.0 / e, 1.0 / (e - 1.0));
  if (g(r_min) >= 0.0) return 1.0;
  double lo = r_min;
  double hi = std::max(r_min, 1.0);
  while (g(hi) < 0.0) hi *= 2.0;
  while (hi - lo > tol::escape_bisection) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // hi certifies g >= 0 from here on; the radius is floored at 1 so the
  // escape test never fires inside the unit disk
  return std::max(1.0, hi);
}

Complex continue_branch(const BranchGerm& germ, const Path& path,
                        const CorrespondenceParams& par, std::size_t max_steps) {
  validate_params(par);
  require_finite(germ.z, "germ.z");
  require_finite(germ.w, "germ.w");
  if (path.size() < 2) throw InvalidArgument("path needs at least two vertices");
  for (Complex v : path) require_finite(v, "path vertex");
  if (pair_residual(germ.z, germ.w, par) > tol::germ_tol)
    throw BranchPointError("germ does not satisfy the defining equation");
  if (std::abs(path.front() - germ.z) > tol::germ_tol * std::max(1.0, std::abs(germ.z)))
    throw InvalidArgument("path must start at the germ's base point");
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (segment_distance_to_origin(path[i], path[i + 1]) < tol::path_clearance)
      throw BranchPointError("path passes within clearance of the branch point 0");
  }

  Complex w = germ.w;
  std::size_t steps = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Complex a = path[i];
    const Complex b = path[i + 1];
    const double len = std::abs(b - a);
    if (len == 0.0) continue;
    // Initial substep short enough that arg z moves well under a quarter
    // radian, keeping the tracked root from rotating past its neighbors in a
    // single hop. Failed margins below still bisect further.
    const double dmin = segment_distance_to_origin(a, b);
    const double dt0 = 1.0 / std::max(1.0, std::ceil(4.0 * len / dmin));
    double t = 0.0;
    double dt = dt0;
    while (t < 1.0) {
      dt = std::min(dt, 1.0 - t);
      if (++steps > max_steps)
        throw ContinuationFailure("continuation exceeded max_steps");
      const Complex z_next = a + (t + dt) * (b - a);
      const std::vector<Complex> roots = forward_images(z_next, par);
      std::size_t best = 0;
      double d_best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < roots.size(); ++k) {
        const double d = std::abs(roots[k] - w);
        if (d < d_best) {
          d_best = d;
          best = k;
        }
      }
      bool unambiguous = true;
      for (std::size_t k = 0; k < roots.size(); ++k) {
        if (k == best) continue;
        if (!(3.0 * d_best < std::abs(roots[k] - w))) {
          unambiguous = false;
          break;
        }
      }
      if (unambiguous) {
        w = roots[best];
        t += dt;
        dt = std::min(2.0 * dt, dt0);
      } else {
        dt *= 0.5;
        if (dt < 1e-18)
          throw ContinuationFailure("step size underflow while tracking branch");
      }
    }
  }
  return w;
}

std::vector<int> monodromy_permutation(const CorrespondenceParams& par,
                                       double radius, double base_arg) {
  validate_params(par);
  if (!(radius > tol::path_clearance) || !std::isfinite(radius))
    throw InvalidArgument("monodromy loop radius must clear the branch point");
  if (!std::isfinite(base_arg)) throw InvalidArgument("base_arg must be finite");

  const Complex base = std::polar(radius, base_arg);
  const std::vector<Complex> anchors = forward_images(base, par);
  const int segments = std::max(64 * par.q, 64);
  Path loop;
  loop.reserve(static_cast<std::size_t>(segments) + 1);
  for (int m = 0; m < segments; ++m)
    loop.push_back(std::polar(radius, base_arg + 2.0 * kPi * m / segments));
  loop.push_back(base);  // close the loop exactly at the basepoint

  std::vector<int> perm(anchors.size(), -1);
  std::vector<bool> used(anchors.size(), false);
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const Complex w_end = continue_branch({base, anchors[k]}, loop, par);
    std::size_t best = 0;
    double d_best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      const double d = std::abs(w_end - anchors[j]);
      if (d < d_best) {
        d_best = d;
        best = j;
      }
    }
    if (d_best > 1e-6 * std::max(1.0, std::abs(anchors[best])))
      throw ContinuationFailure("loop terminal does not match any base root");
    if (used[best]) throw ContinuationFailure("monodromy result is not a bijection");
    used[best] = true;
    perm[k] = static_cast<int>(best);
  }
  return perm;
}

}  // namespace corrdyn
