#ifndef CORRDYN_CORR_CORE_HPP
#define CORRDYN_CORR_CORE_HPP

#include <cstddef>
#include <vector>

#include "corrdyn/params.hpp"

namespace corrdyn {

// The q forward images of z: solutions w of (w - c)^q = z^p, ordered by root
// index k, i.e. w_k = c + |z|^{p/q} exp(i (p arg z + 2 pi k) / q) with arg z
// taken in (-pi, pi]. z = 0 collapses all roots to the single image {c}.
//
// Two evaluation guarantees the rest of the project leans on:
//  - q = 1 is computed by direct repeated multiplication, so iterating the
//    single image reproduces a plain z -> z^p + c loop bit for bit;
//  - lower half-plane inputs are evaluated as conjugates of upper half-plane
//    roots, so image sets are exactly conjugation-equivariant.
std::vector<Complex> forward_images(Complex z, const CorrespondenceParams& par);

// The p backward images of w: solutions z of z^p = (w - c)^q, ordered the same
// way (z_k = |w-c|^{q/p} exp(i (q arg(w-c) + 2 pi k) / p)). w = c collapses to {0}.
std::vector<Complex> backward_images(Complex w, const CorrespondenceParams& par);

// Derivative dw/dz = (p z^{p-1}) / (q (w - c)^{q-1}) of the branch through a
// point (z, w) of the correspondence. The pair must satisfy the defining
// equation within tol::germ_tol (relative); z = 0 or w = c is a
// SingularPointError. Evaluated in log-polar form so large exponents stay
// stable.
Complex branch_derivative(Complex z, Complex w, const CorrespondenceParams& par);

// Smallest R >= 1 such that r^{p/q} - |c| >= 2r for every r >= R; once the
// frontier leaves the disk of radius R every forward image at least doubles
// in modulus, so escape is irreversible. Found by bisection to
// tol::escape_bisection.
double escape_radius(const CorrespondenceParams& par);

// A point of the correspondence used as the seed of an analytic continuation.
struct BranchGerm {
  Complex z;
  Complex w;  // (w - c)^q = z^p within tol::germ_tol
};

// Piecewise-linear path in the z-plane, at least two vertices.
using Path = std::vector<Complex>;

// Continue the branch germ along the path by nearest-root tracking: a step is
// accepted only when the nearest of the q candidate roots is at least three
// times closer than every other root, otherwise the step is bisected. Returns
// the terminal w. Invalid germ or a path within tol::path_clearance of 0 is a
// BranchPointError; exceeding max_steps root evaluations is a
// ContinuationFailure.
Complex continue_branch(const BranchGerm& germ, const Path& path,
                        const CorrespondenceParams& par,
                        std::size_t max_steps = 1000000);

// Permutation of the q branch indices induced by one counterclockwise loop
// around the branch point 0, starting from the basepoint radius*e^{i base_arg}.
// The loop is discretized into at least 64q segments and each branch is
// continued around it; result[k] is the index of the root the k-th branch
// lands on. Analytic prediction: k -> (k + p) mod q.
std::vector<int> monodromy_permutation(const CorrespondenceParams& par,
                                       double radius = 1.0, double base_arg = 0.0);

}  // namespace corrdyn

#endif
