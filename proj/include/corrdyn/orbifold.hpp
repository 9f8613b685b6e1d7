#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "corrdyn/misiurewicz.hpp"

namespace corrdyn {

// Bounded postcritical set with ramification indices: the critical point 0
// carries index q, every other point of the verified critical orbit carries
// index p; points not listed have implicit index 1.
struct RamificationData {
  std::vector<Complex> points;
  std::vector<int> nu;
};

RamificationData ramification_data(const MisiurewiczReport& report,
                                   const CorrespondenceParams& par);

// Singular weight rho(z) = prod_j |z - a_j|^{1/nu_j - 1}. Reproduces the
// local exponent 1 - 1/d of the orbifold metric at each ramified point of
// index d; empty data gives the Euclidean weight 1. Throws SingularityError
// within eps_sing of a ramified point.
double weight(Complex z, const RamificationData& data);

// Weighted operator norm of the inverse branch sending w to z_pre:
// |1 / branch_derivative(z_pre, w)| * weight(z_pre) / weight(w).
double inverse_branch_norm(Complex w, Complex z_pre, const CorrespondenceParams& par,
                           const RamificationData& data);

struct SampleSpec {
  int depth = 30;            // membership certification depth for samples
  double delta_in = 1e-4;    // samples keep at least this distance to the singular set
  double delta_out = 1.0;    // grid-tier samples stay within this distance
  double delta_near = 0.05;  // "near singular" band that defines eta
  int global_grid = 193;     // odd so the grid hits the symmetry axes exactly
  int inverse_level = 10;    // backward-iteration level feeding the near tier
  std::uint64_t node_budget = 40'000'000;
  int threads = 0;           // 0: one per logical core
};

struct ExpansionSurvey {
  long long samples = 0;                // accepted sample points, both tiers
  long long samples_near_singular = 0;  // accepted samples within delta_near
  double global_max_norm = 0.0;
  double max_norm_near_singular = 0.0;
  double eta_estimate = 0.0;            // = max_norm_near_singular
  // 32 buckets of width 1/16 covering [0, 2), plus one overflow bucket.
  std::array<long long, 33> histogram{};
};

// Deterministic two-tier survey of inverse-branch norms over points of K_c.
// Tier one walks a uniform grid over the bounding box of the ramified set
// inflated by 1.5 (escape-radius box when data is empty), keeping points whose
// membership survives to the sentinel depth and whose distance to the singular
// set lies in [delta_in, delta_out]. Tier two takes backward-iteration points
// of 0 at the configured level, which populate K_c densely, and keeps those
// with distance in [delta_in, delta_near]; these supply the near-singular
// statistics that a rectangular grid cannot reach when K_c is a curve family.
// With empty data the distance filters are vacuous for tier one and tier two
// is skipped. No RNG anywhere; thread count never changes the result.
ExpansionSurvey expansion_survey(const CorrespondenceParams& par,
                                 const RamificationData& data,
                                 const SampleSpec& spec);

}  // namespace corrdyn
