#include "corrdyn/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "parallel.hpp"

namespace corrdyn {

bool DepthGrid::any_capacity() const {
  return std::any_of(capacity_mask.begin(), capacity_mask.end(),
                     [](std::uint8_t m) { return m != 0; });
}

namespace {

void validate_raster(const Region& region, const RenderSpec& spec) {
  validate_region(region);
  if (spec.width < 1 || spec.height < 1)
    throw InvalidArgument("raster dimensions must be positive");
  if (spec.max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
  const std::uint64_t pixels =
      static_cast<std::uint64_t>(spec.width) * static_cast<std::uint64_t>(spec.height);
  if (pixels > spec.pixel_budget) {
    std::ostringstream msg;
    msg << "raster of " << pixels << " pixels exceeds the pixel budget of "
        << spec.pixel_budget;
    throw BudgetError(msg.str());
  }
}

// Shared escape-raster driver; value_of must be pure. Rows are processed in
// work-stolen bands but every pixel value depends only on its coordinates,
// so the output is independent of the thread count.
template <typename F>
DepthGrid render_escape(const RenderSpec& spec, F&& value_of) {
  DepthGrid grid;
  grid.width = spec.width;
  grid.height = spec.height;
  grid.kind = GridKind::escape;
  grid.max_depth = spec.max_depth;
  grid.values.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
  grid.capacity_mask.assign(grid.values.size(), 0);

  const int workers = detail::resolve_thread_count(spec.threads);
  const int band = std::max(1, (spec.height + 4 * workers - 1) / (4 * workers));
  detail::parallel_bands(spec.height, band, workers, [&](int y_lo, int y_hi) {
    for (int y = y_lo; y < y_hi; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * spec.width + x;
        try {
          grid.values[i] = static_cast<std::uint32_t>(value_of(x, y));
        } catch (const CapacityError&) {
          grid.values[i] = static_cast<std::uint32_t>(spec.max_depth);
          grid.capacity_mask[i] = 1;
        }
      }
    }
  });
  return grid;
}

}  // namespace

DepthGrid render_multibrot(const Region& region, const RenderSpec& spec, int p, int q) {
  validate_params(CorrespondenceParams{p, q, Complex(0.0, 0.0)});
  validate_raster(region, spec);
  return render_escape(spec, [&](int x, int y) {
    const Complex c = pixel_center(region, spec.width, spec.height, x, y);
    return membership_depth(Complex(0.0, 0.0), CorrespondenceParams{p, q, c},
                            spec.max_depth, spec.orbit);
  });
}

DepthGrid render_julia_escape(Complex c, const Region& region, const RenderSpec& spec,
                              int p, int q) {
  const CorrespondenceParams par{p, q, c};
  validate_params(par);
  validate_raster(region, spec);
  return render_escape(spec, [&](int x, int y) {
    const Complex z = pixel_center(region, spec.width, spec.height, x, y);
    return membership_depth(z, par, spec.max_depth, spec.orbit);
  });
}

void inverse_tree_walk(const CorrespondenceParams& par, int n_iters, double dedup_tol,
                       std::uint64_t node_budget,
                       const std::function<void(int, const std::vector<Complex>&)>& per_level) {
  validate_params(par);
  if (n_iters < 0) throw InvalidArgument("n_iters must be nonnegative");
  // Budget refusal in log space; p^n_iters overflows integers long before the
  // budget comparison would.
  if (n_iters * std::log(static_cast<double>(par.p)) >
      std::log(static_cast<double>(node_budget))) {
    std::ostringstream msg;
    msg << "full tree at depth " << n_iters << " requires about "
        << std::pow(static_cast<double>(par.p), n_iters)
        << " nodes; node budget is " << node_budget;
    throw BudgetError(msg.str());
  }

  const double R = escape_radius(par);
  OrbitConfig oc;
  oc.dedup_tol = dedup_tol;
  const double tolerance = effective_dedup_tol(oc, R);

  std::vector<Complex> level{Complex(0.0, 0.0)};
  per_level(0, level);
  std::vector<Complex> next;
  for (int k = 1; k <= n_iters; ++k) {
    next.clear();
    next.reserve(level.size() * static_cast<std::size_t>(par.p));
    for (const Complex z : level) {
      for (const Complex u : backward_images(z, par)) next.push_back(u);
    }
    dedup_points_inplace(next, tolerance);
    level.swap(next);
    per_level(k, level);
  }
}

DepthGrid render_julia_inverse(Complex c, const Region& region, const RenderSpec& spec,
                               int p, int q, const InverseSpec& inv) {
  const CorrespondenceParams par{p, q, c};
  validate_params(par);
  validate_raster(region, spec);
  if (inv.n_iters < 0) throw InvalidArgument("n_iters must be nonnegative");

  DepthGrid grid;
  grid.width = spec.width;
  grid.height = spec.height;
  grid.kind = GridKind::hits;
  grid.max_depth = 0;
  grid.values.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
  grid.capacity_mask.assign(grid.values.size(), 0);

  const double left = region.center.real() - region.half_width;
  const double top = region.center.imag() + region.half_height;
  const double cell_w = 2.0 * region.half_width / spec.width;
  const double cell_h = 2.0 * region.half_height / spec.height;
  const auto accumulate = [&](Complex z) {
    const int x = static_cast<int>(std::floor((z.real() - left) / cell_w));
    const int y = static_cast<int>(std::floor((top - z.imag()) / cell_h));
    if (x < 0 || x >= spec.width || y < 0 || y >= spec.height) return;
    ++grid.values[static_cast<std::size_t>(y) * spec.width + x];
  };

  if (inv.mode == InverseMode::full_tree) {
    inverse_tree_walk(par, inv.n_iters, inv.dedup_tol, inv.node_budget,
                      [&](int, const std::vector<Complex>& pts) {
                        for (const Complex z : pts) accumulate(z);
                      });
  } else {
    std::mt19937_64 rng(inv.seed);
    Complex z(0.0, 0.0);
    accumulate(z);
    const auto step = [&](Complex zz) {
      const auto roots = backward_images(zz, par);
      std::uniform_int_distribution<std::size_t> pick(0, roots.size() - 1);
      return roots[pick(rng)];
    };
    for (int i = 0; i < 100; ++i) z = step(z);
    const long long n_points = 10LL * inv.n_iters;
    for (long long i = 0; i < n_points; ++i) {
      z = step(z);
      accumulate(z);
    }
  }
  return grid;
}

std::uint32_t hit_cap(const DepthGrid& grid) {
  std::vector<std::uint32_t> nonzero;
  for (const std::uint32_t v : grid.values) {
    if (v != 0) nonzero.push_back(v);
  }
  if (nonzero.empty()) return 1;
  std::sort(nonzero.begin(), nonzero.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(nonzero.size())));
  return nonzero[rank - 1];
}

void write_pgm(const DepthGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");

  std::ostringstream header;
  std::vector<unsigned char> bytes(grid.values.size());
  if (grid.kind == GridKind::escape) {
    const int d = std::max(1, grid.max_depth);
    header << "P5\n# corrdyn escape max_depth=" << d
           << " gray=round(255*log(1+v)/log(1+max_depth))\n"
           << grid.width << ' ' << grid.height << "\n255\n";
    const double denom = std::log1p(static_cast<double>(d));
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      bytes[i] = static_cast<unsigned char>(
          std::lround(255.0 * std::log1p(static_cast<double>(grid.values[i])) / denom));
    }
  } else {
    const std::uint32_t cap = hit_cap(grid);
    header << "P5\n# corrdyn hits hit_cap=" << cap
           << " gray=round(255*min(1,v/hit_cap))\n"
           << grid.width << ' ' << grid.height << "\n255\n";
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      const double t = static_cast<double>(grid.values[i]) / static_cast<double>(cap);
      bytes[i] = static_cast<unsigned char>(std::lround(255.0 * std::min(1.0, t)));
    }
  }

  const std::string head = header.str();
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

void write_grid_csv(const DepthGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (x) out << ',';
      out << grid.values[static_cast<std::size_t>(y) * grid.width + x];
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace corrdyn
