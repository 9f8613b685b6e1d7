#ifndef CORRDYN_ORBIT_ENGINE_HPP
#define CORRDYN_ORBIT_ENGINE_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "corrdyn/corr_core.hpp"
#include "corrdyn/params.hpp"

namespace corrdyn {

struct OrbitConfig {
  int depth = 20;
  // Override for the escape radius; unset means escape_radius(par).
  std::optional<double> escape_radius_override;
  // Merge tolerance for frontier points; 0 means the default 1e-9 * max(1, R).
  double dedup_tol = 0.0;
  // Hard cap on frontier size per level (and on enumerated branches); crossing
  // it raises CapacityError rather than silently truncating.
  std::size_t frontier_cap = 200000;
  // Tolerance for detect_preperiodicity and downstream cycle extraction.
  double periodicity_tol = 1e-6;
};

inline double effective_dedup_tol(const OrbitConfig& cfg, double escape_r) {
  return cfg.dedup_tol > 0.0 ? cfg.dedup_tol : 1e-9 * std::max(1.0, escape_r);
}

// One bounded forward orbit resolved at dedup_tol; points[0] is the start,
// points[k] its k-th image, length depth + 1. Consecutive pairs satisfy the
// defining equation within tol::germ_tol.
struct BoundedBranch {
  std::vector<Complex> points;
};

// All distinct bounded forward orbits of `start` to the given depth.
//
// Breadth-first expansion of the orbit tree: children via forward_images,
// pruning any node with modulus > R together with its subtree (justified by
// the escape radius growth bound), per-level merging of nodes closer than
// dedup_tol, and a backward liveness pass so only points whose subtree
// survives to full depth remain. Branches are then extracted as depth-first
// walks over the live points; a walk that revisits an earlier point (within
// dedup_tol) has locked into a cycle and is unfolded periodically to full
// depth. Orbits that stay bounded but never lock onto a cycle within the
// depth are returned as raw walks. Two branches are distinct iff their point
// sequences differ beyond dedup_tol at some index.
//
// Exceeding frontier_cap (level width or branch count) is a CapacityError.
// max_branches short-circuits enumeration for callers that only need to know
// "one or many".
std::vector<BoundedBranch> enumerate_bounded_branches(
    Complex start, const CorrespondenceParams& par, int depth,
    const OrbitConfig& cfg,
    std::size_t max_branches = std::numeric_limits<std::size_t>::max());

// Pre-period and period located inside a branch's point list: ell is the index
// of the first periodic point, n the minimal period, i.e. the minimal (ell, n)
// with |z_{ell+n} - z_ell| < tol and |z_{j+n} - z_j| < tol for every j from
// ell to length - n - 1 (ell minimized first, then n).
struct Preperiodicity {
  int ell = 0;
  int n = 0;
};

std::optional<Preperiodicity> detect_preperiodicity(const BoundedBranch& branch,
                                                    double tolerance);

enum class CycleClass { repelling, attracting, super_attracting, indifferent };

const char* to_string(CycleClass cls);

struct Cycle {
  std::vector<Complex> points;
  Complex multiplier{0.0, 0.0};
  CycleClass classification = CycleClass::indifferent;
};

// Multiplier of a period-n cycle (z_0, ..., z_{n-1}): the product of branch
// derivatives along consecutive steps. A cycle through 0 is super-attracting
// with multiplier 0 (the critical cycle case). Points that do not close up
// under the correspondence within tol::germ_tol raise InvalidCycleError.
// Classification: |m| > 1 + class_tol repelling, |m| within class_tol of 1
// indifferent, otherwise attracting.
Cycle cycle_multiplier(const std::vector<Complex>& points,
                       const CorrespondenceParams& par);

// One Newton fixed-point polish of a detected cycle: refines points[0] against
// the tracked branch composition (each step follows the root nearest the
// original cycle point) and re-steps the cycle from the refined point.
// Cycles through 0 and near-parabolic compositions are returned unchanged.
std::vector<Complex> polish_cycle(const std::vector<Complex>& points,
                                  const CorrespondenceParams& par);

// Memory-light membership probe: iterates only the deduplicated frontier and
// returns the first level at which it becomes empty (0 if start itself is
// outside the escape radius), or max_depth as the bounded-at-this-resolution
// sentinel. For q = 1 this is exactly scalar z -> z^p + c escape iteration.
int membership_depth(Complex start, const CorrespondenceParams& par,
                     int max_depth, const OrbitConfig& cfg);

// Tolerance clustering shared by the engine: candidates are visited in a
// canonical order (sorted by real part, then |imag|, then sign) and each point
// either joins a representative within tol or becomes one. No merged point is
// ever farther than tol from its representative. Returns representatives in
// canonical order; out_rep_of[i], when given, maps candidate i to its
// representative's index.
std::vector<Complex> dedup_points(const std::vector<Complex>& pts, double tolerance,
                                  std::vector<std::size_t>* out_rep_of = nullptr);

// In-place variant for large point sets (no index mapping, no copy): sorts pts
// into the canonical order and keeps the first representative of each cluster.
void dedup_points_inplace(std::vector<Complex>& pts, double tolerance);

}  // namespace corrdyn

#endif
