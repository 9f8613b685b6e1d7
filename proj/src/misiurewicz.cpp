#include "corrdyn/misiurewicz.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "parallel.hpp"

namespace corrdyn {

const char* to_string(MisiurewiczFailure reason) {
  switch (reason) {
    case MisiurewiczFailure::none: return "none";
    case MisiurewiczFailure::no_bounded_orbit: return "no-bounded-orbit";
    case MisiurewiczFailure::multiple_bounded_orbits: return "multiple-bounded-orbits";
    case MisiurewiczFailure::not_preperiodic_within_depth:
      return "not-preperiodic-within-depth";
    case MisiurewiczFailure::periodic_from_start: return "periodic-from-start";
    case MisiurewiczFailure::cycle_not_repelling: return "cycle-not-repelling";
  }
  return "unknown";
}

MisiurewiczReport verify_misiurewicz(Complex c, int p, int q,
                                     const MisiurewiczConfig& cfg) {
  const CorrespondenceParams par{p, q, c};
  validate_params(par);

  MisiurewiczReport rep;
  rep.c = c;
  rep.depth = cfg.orbit.depth;

  const std::vector<BoundedBranch> branches =
      enumerate_bounded_branches(Complex(0.0, 0.0), par, cfg.orbit.depth, cfg.orbit);
  rep.bounded_branch_count = static_cast<int>(branches.size());
  if (branches.empty()) {
    rep.reason = MisiurewiczFailure::no_bounded_orbit;
    return rep;
  }
  if (branches.size() > 1) {
    rep.reason = MisiurewiczFailure::multiple_bounded_orbits;
    return rep;
  }
  rep.orbit = branches[0];

  const auto pp = detect_preperiodicity(branches[0], cfg.orbit.periodicity_tol);
  if (!pp) {
    rep.reason = MisiurewiczFailure::not_preperiodic_within_depth;
    return rep;
  }
  // The branch starts at the critical point; the report indexes from the
  // critical value one step later. Strict pre-periodicity demands the
  // critical value itself stays off the cycle.
  const int ell_raw = pp->ell;
  rep.n = pp->n;
  rep.ell = std::max(0, ell_raw - 1);
  if (ell_raw <= 1) {
    rep.reason = MisiurewiczFailure::periodic_from_start;
    return rep;
  }

  const auto& pts = branches[0].points;
  const std::vector<Complex> raw_cycle(pts.begin() + ell_raw,
                                       pts.begin() + ell_raw + pp->n);
  try {
    const std::vector<Complex> polished = polish_cycle(raw_cycle, par);
    const Cycle cyc = cycle_multiplier(polished, par);
    rep.cycle = cyc;
    if (cyc.classification != CycleClass::repelling) {
      rep.reason = MisiurewiczFailure::cycle_not_repelling;
      return rep;
    }
  } catch (const InvalidCycleError&) {
    // Detected repetition did not close up as a genuine cycle even after
    // polishing; the repelling property cannot be certified.
    rep.reason = MisiurewiczFailure::cycle_not_repelling;
    return rep;
  }

  rep.verdict = true;
  rep.reason = MisiurewiczFailure::none;
  return rep;
}

std::vector<Candidate> scan_candidates(const Region& box, int cols, int rows, int p,
                                       int q, const MisiurewiczConfig& cfg) {
  validate_region(box);
  validate_params(CorrespondenceParams{p, q, Complex(0.0, 0.0)});
  if (cols < 2 || rows < 2) throw InvalidArgument("scan grid must be at least 2x2");
  if (cfg.l_max < 1 || cfg.n_max < 1)
    throw InvalidArgument("scan windows l_max and n_max must be at least 1");
  if (!(cfg.scan_tol > 0.0)) throw InvalidArgument("scan_tol must be positive");

  const int depth = cfg.orbit.depth;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> residual(static_cast<std::size_t>(rows) * cols, inf);
  std::vector<int> best_ell(residual.size(), 0);
  std::vector<int> best_n(residual.size(), 0);

  const int workers = detail::resolve_thread_count(cfg.threads);
  const int band = std::max(1, (rows + 4 * workers - 1) / (4 * workers));
  detail::parallel_bands(rows, band, workers, [&](int y_lo, int y_hi) {
    for (int y = y_lo; y < y_hi; ++y) {
      for (int x = 0; x < cols; ++x) {
        const Complex c_px = pixel_center(box, cols, rows, x, y);
        const std::size_t i = static_cast<std::size_t>(y) * cols + x;
        try {
          const auto branches = enumerate_bounded_branches(
              Complex(0.0, 0.0), CorrespondenceParams{p, q, c_px}, depth, cfg.orbit,
              2);
          if (branches.size() != 1) continue;
          const auto& z = branches[0].points;
          for (int ell = 1; ell <= cfg.l_max; ++ell) {
            const int ell_raw = ell + 1;
            for (int n = 1; n <= cfg.n_max; ++n) {
              if (ell_raw + n >= static_cast<int>(z.size())) break;
              const double r = std::abs(z[static_cast<std::size_t>(ell_raw + n)] -
                                        z[static_cast<std::size_t>(ell_raw)]);
              if (r < residual[i]) {
                residual[i] = r;
                best_ell[i] = ell;
                best_n[i] = n;
              }
            }
          }
        } catch (const CapacityError&) {
          // cell stays no-data; a scan never converts resource limits into
          // false negatives elsewhere
        }
      }
    }
  });

  std::vector<Candidate> out;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * cols + x;
      const double r = residual[i];
      if (!(r < cfg.scan_tol)) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1 && keep; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = y + dy;
          const int nx = x + dx;
          if (ny < 0 || ny >= rows || nx < 0 || nx >= cols) continue;
          const double rn = residual[static_cast<std::size_t>(ny) * cols + nx];
          if (rn < r) keep = false;
          // equal plateaus keep only the lexicographically first cell
          if (rn == r && (ny < y || (ny == y && nx < x))) keep = false;
        }
      }
      if (!keep) continue;
      Candidate cand;
      cand.c = pixel_center(box, cols, rows, x, y);
      cand.ell = best_ell[i];
      cand.n = best_n[i];
      cand.residual = r;
      out.push_back(cand);
    }
  }
  return out;
}

void write_candidates_csv(std::ostream& os, const std::vector<Candidate>& candidates) {
  os << "c_re,c_im,ell,n,residual\n";
  os << std::setprecision(17);
  for (const Candidate& cand : candidates) {
    os << cand.c.real() << ',' << cand.c.imag() << ',' << cand.ell << ',' << cand.n
       << ',' << cand.residual << '\n';
  }
}

RefineResult refine_candidate(const Candidate& cand, int p, int q,
                              const MisiurewiczConfig& cfg) {
  validate_params(CorrespondenceParams{p, q, cand.c});
  if (cand.ell < 1 || cand.n < 1)
    throw InvalidArgument("candidate needs ell >= 1 and n >= 1");

  const int ell_raw = cand.ell + 1;
  const int last = ell_raw + cand.n;
  const int depth = std::max(cfg.orbit.depth, last);

  const auto base = enumerate_bounded_branches(
      Complex(0.0, 0.0), CorrespondenceParams{p, q, cand.c}, depth, cfg.orbit, 2);
  if (base.size() != 1)
    throw RefinementLostError("candidate's bounded branch is not unique");

  // (c_ref, ref) is the last parameter whose branch orbit was tracked
  // successfully; orbit entries run over raw indices 0..last
  Complex c_ref = cand.c;
  std::vector<Complex> ref(base[0].points.begin(),
                           base[0].points.begin() + (last + 1));

  // one tracking attempt: rebuild the orbit at cp choosing at every level the
  // root nearest the reference orbit, refusing when the choice is ambiguous
  const auto try_track = [&](const std::vector<Complex>& from, Complex cp,
                             std::vector<Complex>& out) -> bool {
    const CorrespondenceParams tpar{p, q, cp};
    out.resize(from.size());
    out[0] = Complex(0.0, 0.0);
    for (int k = 1; k <= last; ++k) {
      const auto roots = forward_images(out[static_cast<std::size_t>(k - 1)], tpar);
      std::size_t best = 0;
      double d0 = std::numeric_limits<double>::infinity();
      double d1 = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < roots.size(); ++j) {
        const double d = std::abs(roots[j] - from[static_cast<std::size_t>(k)]);
        if (d < d0) {
          d1 = d0;
          d0 = d;
          best = j;
        } else if (d < d1) {
          d1 = d;
        }
      }
      if (roots.size() > 1 && d1 < 3.0 * d0) return false;
      out[static_cast<std::size_t>(k)] = roots[best];
    }
    return true;
  };

  // continuation along the parameter segment: orbit drift compounds with the
  // tail's expansion, so a long Newton step can outrun the nearest-root match;
  // bisecting the segment restores an unambiguous walk unless the branch
  // genuinely collides (then the step floor turns it into a refusal)
  const auto continue_to = [&](Complex& c_at, std::vector<Complex>& orbit,
                               Complex target) {
    std::vector<Complex> next;
    int attempts = 0;
    double step = std::abs(target - c_at);
    while (c_at != target) {
      if (++attempts > 100000)
        throw RefinementLostError("branch tracking ambiguous during refinement");
      const double rem = std::abs(target - c_at);
      const Complex tgt =
          (step >= rem) ? target : c_at + (target - c_at) * (step / rem);
      if (try_track(orbit, tgt, next)) {
        orbit.swap(next);
        c_at = tgt;
        step *= 2.0;
      } else {
        step *= 0.5;
        if (step < 1e-15 * (1.0 + std::abs(c_at)))
          throw RefinementLostError("branch tracking ambiguous during refinement");
      }
    }
  };

  const auto gap = [&](const std::vector<Complex>& orbit) -> Complex {
    return orbit[static_cast<std::size_t>(last)] -
           orbit[static_cast<std::size_t>(ell_raw)];
  };

  Complex c = cand.c;
  const double delta = 1e-7;
  bool converged = false;
  for (int it = 0; it <= 50; ++it) {
    const Complex h = gap(ref);
    if (std::abs(h) < 1e-12) {
      converged = true;
      break;
    }
    if (it == 50) break;
    // centered difference, both sides tracked from the same reference
    Complex c_probe = c_ref;
    std::vector<Complex> probe = ref;
    continue_to(c_probe, probe, c + delta);
    const Complex h_plus = gap(probe);
    c_probe = c_ref;
    probe = ref;
    continue_to(c_probe, probe, c - delta);
    const Complex h_minus = gap(probe);
    const Complex hp = (h_plus - h_minus) / (2.0 * delta);
    if (!is_finite(hp) || !(std::abs(hp) > 0.0))
      throw NoConvergenceError("refinement derivative vanished");
    c -= h / hp;
    if (!is_finite(c)) throw NoConvergenceError("refinement step diverged");
    continue_to(c_ref, ref, c);
  }
  if (!converged)
    throw NoConvergenceError("refinement did not converge in 50 iterations");

  RefineResult result;
  result.c = c;
  result.report = verify_misiurewicz(c, p, q, cfg);
  return result;
}

}  // namespace corrdyn
