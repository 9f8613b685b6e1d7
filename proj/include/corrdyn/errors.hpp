#ifndef CORRDYN_ERRORS_HPP
#define CORRDYN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace corrdyn {

// Everything the library throws derives from Error, so callers can map the
// whole family to a process exit code in one catch clause.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller input is malformed: non-finite numbers, q >= p, degenerate regions,
// contradictory configuration.
struct InvalidArgument : Error {
  using Error::Error;
};

// A branch derivative was requested at z = 0 or w = c, where the
// correspondence is not locally invertible.
struct SingularPointError : Error {
  using Error::Error;
};

// Continuation data is unusable: the germ does not satisfy the defining
// equation, or the path passes through (or too close to) the branch point 0.
struct BranchPointError : Error {
  using Error::Error;
};

// Nearest-root tracking could not resolve a branch within the step budget.
struct ContinuationFailure : Error {
  using Error::Error;
};

// A frontier or walk count exceeded its configured cap. Results are never
// silently truncated; the level that overflowed is recorded.
struct CapacityError : Error {
  CapacityError(const std::string& msg, int level_) : Error(msg), level(level_) {}
  int level;
};

// Cycle points handed to the multiplier do not close up under the
// correspondence within tolerance.
struct InvalidCycleError : Error {
  using Error::Error;
};

// Orbifold weight evaluated within eps_sing of a ramified point.
struct SingularityError : Error {
  using Error::Error;
};

// A render or tree expansion would exceed its node/pixel budget; refused
// up front rather than attempted.
struct BudgetError : Error {
  using Error::Error;
};

// Newton refinement lost the branch it was tracking (ambiguous nearest root).
struct RefinementLostError : Error {
  using Error::Error;
};

// Newton refinement ran out of iterations without meeting its target.
struct NoConvergenceError : Error {
  using Error::Error;
};

// Filesystem writes/reads failed.
struct IoError : Error {
  using Error::Error;
};

}  // namespace corrdyn

#endif
