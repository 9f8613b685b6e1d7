#ifndef CORRDYN_TESTS_HELPERS_HPP
#define CORRDYN_TESTS_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "corrdyn/params.hpp"

namespace testutil {

inline bool close(corrdyn::Complex a, corrdyn::Complex b, double tol = 1e-12) {
  return std::abs(a - b) <= tol;
}

// set comparison up to reordering
inline bool same_points(std::vector<corrdyn::Complex> got,
                        std::vector<corrdyn::Complex> want, double tol = 1e-12) {
  if (got.size() != want.size()) return false;
  for (const corrdyn::Complex w : want) {
    auto it = std::find_if(got.begin(), got.end(),
                           [&](corrdyn::Complex g) { return close(g, w, tol); });
    if (it == got.end()) return false;
    got.erase(it);
  }
  return true;
}

inline double min_dist(corrdyn::Complex z, const std::vector<corrdyn::Complex>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const corrdyn::Complex p : pts) best = std::min(best, std::abs(z - p));
  return best;
}

}  // namespace testutil

#endif
