#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "corrdyn/orbit_engine.hpp"
#include "corrdyn/region.hpp"

namespace corrdyn {

enum class GridKind { escape, hits };

struct RenderSpec {
  int width = 256;
  int height = 256;
  int max_depth = 100;  // escape modes: sentinel depth
  OrbitConfig orbit;    // escape modes: engine configuration
  int threads = 0;      // 0: one per logical core
  std::uint64_t pixel_budget = 100'000'000;
};

struct DepthGrid {
  int width = 0;
  int height = 0;
  GridKind kind = GridKind::escape;
  int max_depth = 0;                        // sentinel value for escape grids
  std::vector<std::uint32_t> values;        // row-major, top row first
  std::vector<std::uint8_t> capacity_mask;  // 1 where capacity forced the sentinel
  bool any_capacity() const;
};

// Parameter-plane raster: pixel value = membership_depth(0, params(c_pixel)).
// Deterministic and independent of thread count; per-pixel capacity failures
// are recorded in capacity_mask with the sentinel substituted, never dropped.
DepthGrid render_multibrot(const Region& region, const RenderSpec& spec, int p, int q);

// Dynamical-plane escape raster: pixel value = membership_depth(z_pixel).
DepthGrid render_julia_escape(Complex c, const Region& region, const RenderSpec& spec,
                              int p, int q);

enum class InverseMode { full_tree, random_walk };

struct InverseSpec {
  int n_iters = 8;
  InverseMode mode = InverseMode::full_tree;
  std::uint64_t node_budget = 40'000'000;  // full tree refuses p^n_iters above this
  std::uint64_t seed = 1;                  // random walk
  double dedup_tol = 0.0;                  // 0: engine default 1e-9 * max(1, R)
};

// Walks the backward-orbit tree of 0 level by level (level 0 is {0}; each
// level is deduplicated), invoking per_level on every level including the
// last. Refuses up front with BudgetError when the undeduplicated full tree
// p^n_iters would exceed node_budget.
void inverse_tree_walk(const CorrespondenceParams& par, int n_iters, double dedup_tol,
                       std::uint64_t node_budget,
                       const std::function<void(int, const std::vector<Complex>&)>& per_level);

// Hit-count raster of backward iteration from 0. Full-tree mode accumulates
// every tree level; random mode records the start, burns in 100 unrecorded
// steps, then accumulates 10 * n_iters chaos-game points (single-threaded by
// contract so the seeded path is reproducible).
DepthGrid render_julia_inverse(Complex c, const Region& region, const RenderSpec& spec,
                               int p, int q, const InverseSpec& inv);

// Presentation cap for hit grids: the 99th percentile (nearest-rank) of the
// nonzero hit counts, or 1 when the grid is empty.
std::uint32_t hit_cap(const DepthGrid& grid);

// Binary PGM (P5, maxval 255) with a single comment line recording the
// gray mapping: escape grids use round(255*log(1+v)/log(1+max_depth)), hit
// grids round(255*min(1, v/hit_cap)).
void write_pgm(const DepthGrid& grid, const std::string& path);

// Raw values as CSV, one raster row per line.
void write_grid_csv(const DepthGrid& grid, const std::string& path);

}  // namespace corrdyn
