#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "corrdyn/orbit_engine.hpp"
#include "corrdyn/region.hpp"

namespace corrdyn {

// Why a verdict is false. Verdicts are depth-stamped: "false" means the
// property could not be certified at the configured depth and tolerances.
enum class MisiurewiczFailure {
  none,
  no_bounded_orbit,
  multiple_bounded_orbits,
  not_preperiodic_within_depth,
  periodic_from_start,
  cycle_not_repelling,
};

const char* to_string(MisiurewiczFailure reason);  // hyphenated, e.g. "no-bounded-orbit"

struct MisiurewiczConfig {
  OrbitConfig orbit;     // orbit.depth is the certification depth
  int l_max = 12;        // scan window: max pre-period
  int n_max = 12;        // scan window: max period
  double scan_tol = 1e-2;
  int threads = 0;       // 0: one per logical core (scan only)
};

struct MisiurewiczReport {
  Complex c{0.0, 0.0};
  bool verdict = false;
  int bounded_branch_count = 0;
  std::optional<BoundedBranch> orbit;  // present iff the bounded branch is unique
  // Pre-period in the orbit indexing that starts at the critical value
  // (z_0 = c, one step after the critical point); -1 when not determined.
  int ell = -1;
  int n = 0;                           // cycle length; 0 when not determined
  std::optional<Cycle> cycle;
  MisiurewiczFailure reason = MisiurewiczFailure::none;
  int depth = 0;                       // depth the verdict was computed at
};

// Decides whether c is a Misiurewicz parameter for (w - c)^q = z^p: the
// critical point 0 must have exactly one bounded forward orbit, that orbit
// must be strictly pre-periodic (the critical value itself not on the cycle),
// and the landed cycle must be repelling.
MisiurewiczReport verify_misiurewicz(Complex c, int p, int q,
                                     const MisiurewiczConfig& cfg);

struct Candidate {
  Complex c{0.0, 0.0};
  int ell = 0;      // same critical-value indexing as MisiurewiczReport
  int n = 0;
  double residual = 0.0;  // |z_{ell+n} - z_ell| along the unique bounded branch
};

// Grid scan over a parameter rectangle. For each pixel-center parameter with
// exactly one bounded branch, takes the minimal pre-periodicity residual over
// ell <= l_max, n <= n_max (subject to orbit length); keeps cells whose
// residual is below scan_tol and is a local minimum among the 8 neighbors
// (ties broken toward the lexicographically smaller cell). Results are
// candidates, not verdicts; rows are computed in parallel but merged in
// row-major order, so output is deterministic.
std::vector<Candidate> scan_candidates(const Region& box, int cols, int rows,
                                       int p, int q, const MisiurewiczConfig& cfg);

// CSV with header c_re,c_im,ell,n,residual; full round-trip precision.
void write_candidates_csv(std::ostream& os, const std::vector<Candidate>& candidates);

struct RefineResult {
  Complex c{0.0, 0.0};
  MisiurewiczReport report;  // re-verification at the refined parameter
};

// Newton iteration on h(c) = Z_{ell+n}(c) - Z_{ell}(c) where Z_k(c) tracks the
// bounded branch frozen from the candidate's own orbit (each step follows the
// root nearest the frozen point; the nearest root must be 3x closer than any
// other). Derivative by central differences with step 1e-7; stops at
// |h| < 1e-12 or after 50 iterations. Throws RefinementLostError when branch
// tracking turns ambiguous and NoConvergenceError when Newton stalls.
RefineResult refine_candidate(const Candidate& cand, int p, int q,
                              const MisiurewiczConfig& cfg);

}  // namespace corrdyn
