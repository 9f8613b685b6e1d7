#include "corrdyn/orbit_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

namespace corrdyn {

namespace {

Complex ipow(Complex z, int n) {
  Complex acc = z;
  for (int i = 1; i < n; ++i) acc *= z;
  return acc;
}

double closure_residual(Complex z, Complex w, const CorrespondenceParams& par) {
  const Complex zp = ipow(z, par.p);
  const Complex wq = ipow(w - par.c, par.q);
  return std::abs(wq - zp) / std::max(1.0, std::abs(zp));
}

// Canonical ordering for frontier points: by real part, then |imag|, then
// imag >= 0 first. Conjugating a frontier permutes only exact sign ties, so
// deduplication commutes with conjugation (renderer symmetry depends on it).
bool canonical_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  const double ai = std::fabs(a.imag());
  const double bi = std::fabs(b.imag());
  if (ai != bi) return ai < bi;
  return !std::signbit(a.imag()) && std::signbit(b.imag());
}

void check_tolerance(double tolerance) {
  if (!(tolerance >= 0.0) || !std::isfinite(tolerance))
    throw InvalidArgument("dedup tolerance must be finite and nonnegative");
}

std::int64_t cell_coord(double x, double tolerance) {
  double t = std::floor(x / tolerance);
  // clamp keeps far-out or non-finite quotients in one bucket; the exact
  // distance test below still decides every merge
  if (!(t >= -4.0e18)) t = -4.0e18;
  if (t > 4.0e18) t = 4.0e18;
  return static_cast<std::int64_t>(t);
}

std::uint64_t cell_key(std::int64_t a, std::int64_t b) {
  return static_cast<std::uint64_t>(a) * 0x9e3779b97f4a7c15ull ^
         static_cast<std::uint64_t>(b) * 0xc2b2ae3d27d4eb4full;
}

// Greedy dedup over points visited in canonical order: each point merges into
// the lowest-index representative within tolerance, else becomes one itself.
// Representatives are bucketed by tolerance-sized cells so clusters sharing a
// coordinate (the sort-window approach degraded to quadratic on those) stay
// O(1) per query; hash collisions only add distance checks, never miss one.
// emit(original_index, representative_index) is called once per point.
template <typename Emit>
std::vector<Complex> greedy_dedup(const std::vector<Complex>& pts,
                                  const std::vector<std::size_t>& order,
                                  double tolerance, Emit&& emit) {
  constexpr std::uint32_t kNil = 0xffffffffu;
  std::vector<Complex> reps;
  if (tolerance == 0.0) {
    // canonical order puts exact duplicates next to each other
    for (std::size_t idx : order) {
      if (reps.empty() || !(reps.back() == pts[idx])) reps.push_back(pts[idx]);
      emit(idx, reps.size() - 1);
    }
    return reps;
  }
  std::unordered_map<std::uint64_t, std::uint32_t> heads;
  heads.reserve(order.size());
  std::vector<std::uint32_t> chain;
  chain.reserve(order.size());
  for (std::size_t idx : order) {
    const Complex z = pts[idx];
    const std::int64_t cx = cell_coord(z.real(), tolerance);
    const std::int64_t cy = cell_coord(z.imag(), tolerance);
    std::size_t rep = reps.size();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const auto it = heads.find(cell_key(cx + dx, cy + dy));
        if (it == heads.end()) continue;
        for (std::uint32_t j = it->second; j != kNil; j = chain[j]) {
          if (j < rep && std::abs(reps[j] - z) <= tolerance) rep = j;
        }
      }
    }
    if (rep == reps.size()) {
      const auto [it, fresh] = heads.try_emplace(cell_key(cx, cy), kNil);
      chain.push_back(it->second);
      it->second = static_cast<std::uint32_t>(reps.size());
      reps.push_back(z);
    }
    emit(idx, rep);
  }
  return reps;
}

}  // namespace

void dedup_points_inplace(std::vector<Complex>& pts, double tolerance) {
  check_tolerance(tolerance);
  std::sort(pts.begin(), pts.end(), canonical_less);
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  pts = greedy_dedup(pts, order, tolerance, [](std::size_t, std::size_t) {});
}

std::vector<Complex> dedup_points(const std::vector<Complex>& pts, double tolerance,
                                  std::vector<std::size_t>* out_rep_of) {
  check_tolerance(tolerance);
  if (out_rep_of == nullptr) {
    std::vector<Complex> copy = pts;
    dedup_points_inplace(copy, tolerance);
    return copy;
  }
  const std::size_t n = pts.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_less(pts[a], pts[b]);
  });
  out_rep_of->assign(n, 0);
  return greedy_dedup(pts, order, tolerance,
                      [&](std::size_t idx, std::size_t rep) {
                        (*out_rep_of)[idx] = rep;
                      });
}

namespace {

struct Level {
  std::vector<Complex> pts;
  std::vector<std::vector<std::uint32_t>> children;
  std::vector<char> live;
};

// Unfold a walk that revisited path[cycle_start] into a full-depth branch:
// the locked cycle path[cycle_start..] repeats to the end.
BoundedBranch unfold_walk(const std::vector<Complex>& path, std::size_t cycle_start,
                          int depth) {
  BoundedBranch b;
  b.points.resize(static_cast<std::size_t>(depth) + 1);
  const std::size_t period = path.size() - cycle_start;
  for (std::size_t m = 0; m <= static_cast<std::size_t>(depth); ++m) {
    b.points[m] = m < path.size()
                      ? path[m]
                      : path[cycle_start + (m - cycle_start) % period];
  }
  return b;
}

}  // namespace

std::vector<BoundedBranch> enumerate_bounded_branches(Complex start,
                                                      const CorrespondenceParams& par,
                                                      int depth, const OrbitConfig& cfg,
                                                      std::size_t max_branches) {
  validate_params(par);
  if (!is_finite(start)) throw InvalidArgument("start must be finite");
  if (depth < 0) throw InvalidArgument("depth must be nonnegative");
  const double R = cfg.escape_radius_override.value_or(escape_radius(par));
  const double tolerance = effective_dedup_tol(cfg, R);

  std::vector<BoundedBranch> out;
  if (max_branches == 0) return out;
  if (std::abs(start) > R) return out;

  // Layered expansion with per-level merging, then a backward liveness pass:
  // a point is live iff some descendant chain survives to full depth.
  std::vector<Level> levels(static_cast<std::size_t>(depth) + 1);
  levels[0].pts = {start};
  for (int k = 0; k < depth; ++k) {
    Level& cur = levels[static_cast<std::size_t>(k)];
    std::vector<Complex> cand;
    std::vector<std::size_t> cand_parent;
    for (std::size_t i = 0; i < cur.pts.size(); ++i) {
      for (Complex w : forward_images(cur.pts[i], par)) {
        if (std::abs(w) <= R) {
          cand.push_back(w);
          cand_parent.push_back(i);
        }
      }
    }
    std::vector<std::size_t> rep_of;
    std::vector<Complex> reps = dedup_points(cand, tolerance, &rep_of);
    if (reps.size() > cfg.frontier_cap)
      throw CapacityError("frontier exceeded cap at level " + std::to_string(k + 1),
                          k + 1);
    cur.children.assign(cur.pts.size(), {});
    for (std::size_t j = 0; j < cand.size(); ++j)
      cur.children[cand_parent[j]].push_back(static_cast<std::uint32_t>(rep_of[j]));
    for (auto& ch : cur.children) {
      std::sort(ch.begin(), ch.end());
      ch.erase(std::unique(ch.begin(), ch.end()), ch.end());
    }
    if (reps.empty()) return out;  // everything escaped before full depth
    levels[static_cast<std::size_t>(k) + 1].pts = std::move(reps);
  }

  levels[static_cast<std::size_t>(depth)].live.assign(
      levels[static_cast<std::size_t>(depth)].pts.size(), 1);
  for (int k = depth - 1; k >= 0; --k) {
    Level& cur = levels[static_cast<std::size_t>(k)];
    const Level& nxt = levels[static_cast<std::size_t>(k) + 1];
    cur.live.assign(cur.pts.size(), 0);
    for (std::size_t i = 0; i < cur.pts.size(); ++i) {
      for (std::uint32_t j : cur.children[i]) {
        if (nxt.live[j]) {
          cur.live[i] = 1;
          break;
        }
      }
    }
  }
  if (!levels[0].live[0]) return out;

  // Depth-first walks over live points. A walk terminates either by revisiting
  // an earlier point (cycle locked; unfold periodically) or by reaching full
  // depth without locking.
  struct Frame {
    int level;
    std::uint32_t node;
    std::size_t child_pos;
  };
  std::vector<Frame> stack;
  std::vector<Complex> path;
  path.reserve(static_cast<std::size_t>(depth) + 1);

  const auto emit = [&](BoundedBranch&& b) {
    out.push_back(std::move(b));
    if (out.size() > cfg.frontier_cap)
      throw CapacityError("bounded-branch count exceeded cap", depth);
  };

  // Visit (k, i): emit if the walk ends here, otherwise descend.
  const auto try_visit = [&](int k, std::uint32_t i) {
    const Complex z = levels[static_cast<std::size_t>(k)].pts[i];
    for (std::size_t j = 0; j < path.size(); ++j) {
      if (std::abs(path[j] - z) <= tolerance) {
        emit(unfold_walk(path, j, depth));
        return;
      }
    }
    if (k == depth) {
      BoundedBranch b;
      b.points = path;
      b.points.push_back(z);
      emit(std::move(b));
      return;
    }
    stack.push_back({k, i, 0});
    path.push_back(z);
  };

  try_visit(0, 0);
  while (!stack.empty() && out.size() < max_branches) {
    Frame& f = stack.back();
    const Level& cur = levels[static_cast<std::size_t>(f.level)];
    const Level& nxt = levels[static_cast<std::size_t>(f.level) + 1];
    const auto& ch = cur.children[f.node];
    std::size_t pos = f.child_pos;
    while (pos < ch.size() && !nxt.live[ch[pos]]) ++pos;
    if (pos == ch.size()) {
      stack.pop_back();
      path.pop_back();
      continue;
    }
    f.child_pos = pos + 1;
    try_visit(f.level + 1, ch[pos]);
  }
  if (out.size() > max_branches) out.resize(max_branches);
  return out;
}

std::optional<Preperiodicity> detect_preperiodicity(const BoundedBranch& branch,
                                                    double tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance))
    throw InvalidArgument("periodicity tolerance must be positive");
  const std::vector<Complex>& z = branch.points;
  const int len = static_cast<int>(z.size());
  // Minimal ell first, then minimal n: the whole tail must repeat with period
  // n from index ell onward, not just the single pair (ell, ell + n).
  for (int ell = 0; ell + 1 < len; ++ell) {
    for (int n = 1; ell + n < len; ++n) {
      bool ok = true;
      for (int j = ell; j + n < len; ++j) {
        if (!(std::abs(z[static_cast<std::size_t>(j + n)] -
                       z[static_cast<std::size_t>(j)]) < tolerance)) {
          ok = false;
          break;
        }
      }
      if (ok) return Preperiodicity{ell, n};
    }
  }
  return std::nullopt;
}

const char* to_string(CycleClass cls) {
  switch (cls) {
    case CycleClass::repelling: return "repelling";
    case CycleClass::attracting: return "attracting";
    case CycleClass::super_attracting: return "super-attracting";
    case CycleClass::indifferent: return "indifferent";
  }
  return "unknown";
}

Cycle cycle_multiplier(const std::vector<Complex>& points,
                       const CorrespondenceParams& par) {
  validate_params(par);
  if (points.empty()) throw InvalidArgument("cycle needs at least one point");
  double max_mod = 0.0;
  for (Complex z : points) {
    if (!is_finite(z)) throw InvalidArgument("cycle points must be finite");
    max_mod = std::max(max_mod, std::abs(z));
  }
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (closure_residual(points[i], points[(i + 1) % n], par) > tol::germ_tol)
      throw InvalidCycleError("cycle points do not close up under the correspondence");
  }

  Cycle cyc;
  cyc.points = points;
  const double zero_tol = 1e-12 * std::max(1.0, max_mod);
  for (Complex z : points) {
    if (std::abs(z) <= zero_tol) {
      // Critical cycle: the branch collapses at 0, multiplier identically 0.
      cyc.multiplier = Complex(0.0, 0.0);
      cyc.classification = CycleClass::super_attracting;
      return cyc;
    }
  }
  Complex m(1.0, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    m *= branch_derivative(points[i], points[(i + 1) % n], par);
  cyc.multiplier = m;
  const double am = std::abs(m);
  if (std::fabs(am - 1.0) <= tol::class_tol)
    cyc.classification = CycleClass::indifferent;
  else if (am > 1.0)
    cyc.classification = CycleClass::repelling;
  else
    cyc.classification = CycleClass::attracting;
  return cyc;
}

std::vector<Complex> polish_cycle(const std::vector<Complex>& points,
                                  const CorrespondenceParams& par) {
  validate_params(par);
  if (points.empty()) throw InvalidArgument("cycle needs at least one point");
  double max_mod = 0.0;
  for (Complex z : points) max_mod = std::max(max_mod, std::abs(z));
  const double zero_tol = 1e-12 * std::max(1.0, max_mod);
  for (Complex z : points) {
    if (std::abs(z) <= zero_tol) return points;  // critical cycle, exact as-is
  }

  const std::size_t n = points.size();
  // Composition of the branches the cycle actually follows: each step takes
  // the root nearest the recorded next point.
  const auto track = [&](Complex z, Complex target) {
    const std::vector<Complex> roots = forward_images(z, par);
    std::size_t best = 0;
    double d_best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < roots.size(); ++k) {
      const double d = std::abs(roots[k] - target);
      if (d < d_best) {
        d_best = d;
        best = k;
      }
    }
    return roots[best];
  };

  Complex z = points[0];
  Complex deriv(1.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex next = track(z, points[(i + 1) % n]);
    deriv *= branch_derivative(z, next, par);
    z = next;
  }
  const Complex denom = deriv - Complex(1.0, 0.0);
  if (std::abs(denom) < 1e-8) return points;  // near-parabolic: leave alone
  const Complex refined = points[0] - (z - points[0]) / denom;
  if (!is_finite(refined) ||
      std::abs(refined - points[0]) > 1e-2 * std::max(1.0, max_mod))
    return points;  // Newton step not trustworthy; keep the detected points

  std::vector<Complex> out(n);
  out[0] = refined;
  Complex cur = refined;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cur = track(cur, points[i + 1]);
    out[i + 1] = cur;
  }
  return out;
}

int membership_depth(Complex start, const CorrespondenceParams& par, int max_depth,
                     const OrbitConfig& cfg) {
  validate_params(par);
  if (!is_finite(start)) throw InvalidArgument("start must be finite");
  if (max_depth < 0) throw InvalidArgument("max_depth must be nonnegative");
  const double R = cfg.escape_radius_override.value_or(escape_radius(par));
  const double tolerance = effective_dedup_tol(cfg, R);
  if (std::abs(start) > R) return 0;

  std::vector<Complex> frontier{start};
  std::vector<Complex> next;
  for (int k = 1; k <= max_depth; ++k) {
    next.clear();
    for (Complex z : frontier) {
      for (Complex w : forward_images(z, par)) {
        if (std::abs(w) <= R) next.push_back(w);
      }
    }
    if (next.size() > 1) dedup_points_inplace(next, tolerance);
    if (next.size() > cfg.frontier_cap)
      throw CapacityError("frontier exceeded cap at level " + std::to_string(k), k);
    if (next.empty()) return k;
    frontier.swap(next);
  }
  return max_depth;
}

}  // namespace corrdyn
