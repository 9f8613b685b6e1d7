#include "corrdyn/orbifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corrdyn/render.hpp"
#include "parallel.hpp"

namespace corrdyn {

RamificationData ramification_data(const MisiurewiczReport& report,
                                   const CorrespondenceParams& par) {
  validate_params(par);
  if (!report.verdict)
    throw InvalidArgument("ramification data requires a verified report");
  if (!report.orbit || report.ell < 1 || report.n < 1)
    throw InvalidArgument("verified report is missing orbit data");

  const double R = escape_radius(par);
  const double tolerance = effective_dedup_tol(OrbitConfig{}, R);

  RamificationData data;
  data.points.push_back(Complex(0.0, 0.0));
  data.nu.push_back(par.q);
  // Orbit points z_0 = c through z_{ell+n-1}; the branch itself starts one
  // index earlier at the critical point.
  const auto& pts = report.orbit->points;
  const int count = report.ell + report.n;
  for (int j = 1; j <= count && j < static_cast<int>(pts.size()); ++j) {
    const Complex z = pts[static_cast<std::size_t>(j)];
    bool dup = false;
    for (const Complex& a : data.points) {
      if (std::abs(z - a) <= tolerance) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      data.points.push_back(z);
      data.nu.push_back(par.p);
    }
  }
  return data;
}

double weight(Complex z, const RamificationData& data) {
  if (!is_finite(z)) throw InvalidArgument("weight input must be finite");
  if (data.points.size() != data.nu.size())
    throw InvalidArgument("ramification points and indices must align");
  double log_rho = 0.0;
  for (std::size_t j = 0; j < data.points.size(); ++j) {
    const double d = std::abs(z - data.points[j]);
    if (d < tol::eps_sing)
      throw SingularityError("weight evaluated on a ramified point");
    const double nu = static_cast<double>(data.nu[j]);
    log_rho += (1.0 / nu - 1.0) * std::log(d);
  }
  return std::exp(log_rho);
}

double inverse_branch_norm(Complex w, Complex z_pre, const CorrespondenceParams& par,
                           const RamificationData& data) {
  const Complex dw_dz = branch_derivative(z_pre, w, par);
  return weight(z_pre, data) / (std::abs(dw_dz) * weight(w, data));
}

namespace {

double distance_to_singular(Complex z, const RamificationData& data) {
  double d = std::numeric_limits<double>::infinity();
  for (const Complex& a : data.points) d = std::min(d, std::abs(z - a));
  return d;
}

struct SurveyAccum {
  long long samples = 0;
  long long near_samples = 0;
  double global_max = 0.0;
  double near_max = 0.0;
  std::array<long long, 33> hist{};

  void merge(const SurveyAccum& o) {
    samples += o.samples;
    near_samples += o.near_samples;
    global_max = std::max(global_max, o.global_max);
    near_max = std::max(near_max, o.near_max);
    for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += o.hist[i];
  }
};

}  // namespace

ExpansionSurvey expansion_survey(const CorrespondenceParams& par,
                                 const RamificationData& data,
                                 const SampleSpec& spec) {
  validate_params(par);
  if (spec.depth < 1) throw InvalidArgument("survey depth must be at least 1");
  if (!(spec.delta_in > 0.0) || !(spec.delta_near >= spec.delta_in) ||
      !(spec.delta_out >= spec.delta_near))
    throw InvalidArgument("survey bands must satisfy 0 < delta_in <= delta_near <= delta_out");
  if (spec.global_grid < 2) throw InvalidArgument("survey grid must be at least 2");
  if (spec.inverse_level < 0)
    throw InvalidArgument("survey inverse level must be nonnegative");

  const bool euclidean = data.points.empty();
  const double R = escape_radius(par);
  OrbitConfig ocfg;  // defaults; depth passed explicitly to membership_depth

  // One sample point contributes one norm per preimage; collisions with the
  // singular set (possible only at filter boundaries) are skipped, not fatal.
  const auto process_sample = [&](Complex w, bool near_band, SurveyAccum& acc) {
    bool counted = false;
    for (const Complex z_pre : backward_images(w, par)) {
      double nm;
      try {
        nm = inverse_branch_norm(w, z_pre, par, data);
      } catch (const SingularityError&) {
        continue;
      } catch (const SingularPointError&) {
        continue;
      }
      if (!std::isfinite(nm)) continue;
      counted = true;
      acc.global_max = std::max(acc.global_max, nm);
      if (near_band) acc.near_max = std::max(acc.near_max, nm);
      const std::size_t bucket =
          nm < 2.0 ? static_cast<std::size_t>(nm * 16.0) : std::size_t{32};
      ++acc.hist[bucket];
    }
    if (counted) {
      ++acc.samples;
      if (near_band) ++acc.near_samples;
    }
  };

  const auto accept_membership = [&](Complex w) {
    try {
      return membership_depth(w, par, spec.depth, ocfg) == spec.depth;
    } catch (const CapacityError&) {
      return false;
    }
  };

  const int workers = detail::resolve_thread_count(spec.threads);

  // Tier one: uniform grid over the inflated bounding box of the ramified
  // set (escape-radius box when Euclidean).
  Region box;
  if (euclidean) {
    box = Region{Complex(0.0, 0.0), R, R};
  } else {
    double re_lo = data.points[0].real(), re_hi = re_lo;
    double im_lo = data.points[0].imag(), im_hi = im_lo;
    for (const Complex& a : data.points) {
      re_lo = std::min(re_lo, a.real());
      re_hi = std::max(re_hi, a.real());
      im_lo = std::min(im_lo, a.imag());
      im_hi = std::max(im_hi, a.imag());
    }
    const double half =
        1.5 * std::max({(re_hi - re_lo) / 2.0, (im_hi - im_lo) / 2.0, 1e-3});
    box = Region{Complex((re_lo + re_hi) / 2.0, (im_lo + im_hi) / 2.0), half, half};
  }

  const int G = spec.global_grid;
  const int grid_band = std::max(1, (G + 4 * workers - 1) / (4 * workers));
  const int n_grid_bands = (G + grid_band - 1) / grid_band;
  std::vector<SurveyAccum> grid_acc(static_cast<std::size_t>(n_grid_bands));
  detail::parallel_bands(G, grid_band, workers, [&](int y_lo, int y_hi) {
    SurveyAccum& acc = grid_acc[static_cast<std::size_t>(y_lo / grid_band)];
    for (int y = y_lo; y < y_hi; ++y) {
      for (int x = 0; x < G; ++x) {
        const Complex w = pixel_center(box, G, G, x, y);
        const double d = distance_to_singular(w, data);
        if (!euclidean && (d < spec.delta_in || d > spec.delta_out)) continue;
        if (!accept_membership(w)) continue;
        process_sample(w, !euclidean && d <= spec.delta_near, acc);
      }
    }
  });

  // Tier two: backward-orbit points of 0 filtered into the near band. These
  // lie on K_c by construction, so they reach the singular set even when K_c
  // has empty interior.
  std::vector<SurveyAccum> near_acc;
  if (!euclidean && spec.inverse_level > 0) {
    std::vector<Complex> level_pts;
    inverse_tree_walk(par, spec.inverse_level, 0.0, spec.node_budget,
                      [&](int level, const std::vector<Complex>& pts) {
                        if (level == spec.inverse_level) level_pts = pts;
                      });
    std::vector<Complex> band_pts;
    for (const Complex z : level_pts) {
      const double d = distance_to_singular(z, data);
      if (d >= spec.delta_in && d <= spec.delta_near) band_pts.push_back(z);
    }
    level_pts.clear();
    level_pts.shrink_to_fit();

    const int total = static_cast<int>(band_pts.size());
    const int band = std::max(1, (total + 4 * workers - 1) / (4 * workers));
    const int n_bands = total == 0 ? 0 : (total + band - 1) / band;
    near_acc.assign(static_cast<std::size_t>(n_bands), SurveyAccum{});
    detail::parallel_bands(total, band, workers, [&](int lo, int hi) {
      SurveyAccum& acc = near_acc[static_cast<std::size_t>(lo / band)];
      for (int i = lo; i < hi; ++i) {
        const Complex w = band_pts[static_cast<std::size_t>(i)];
        if (!accept_membership(w)) continue;
        process_sample(w, true, acc);
      }
    });
  }

  SurveyAccum total;
  for (const SurveyAccum& a : grid_acc) total.merge(a);
  for (const SurveyAccum& a : near_acc) total.merge(a);

  ExpansionSurvey survey;
  survey.samples = total.samples;
  survey.samples_near_singular = total.near_samples;
  survey.global_max_norm = total.global_max;
  survey.max_norm_near_singular = total.near_max;
  survey.eta_estimate = total.near_max;
  survey.histogram = total.hist;
  return survey;
}

}  // namespace corrdyn
