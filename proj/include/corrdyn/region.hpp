#pragma once

#include "corrdyn/errors.hpp"
#include "corrdyn/params.hpp"

namespace corrdyn {

// Axis-aligned rectangle in the complex plane, used both as a render window
// and as a parameter-scan region.
struct Region {
  Complex center{0.0, 0.0};
  double half_width = 1.0;
  double half_height = 1.0;
};

inline void validate_region(const Region& r) {
  if (!is_finite(r.center) || !std::isfinite(r.half_width) ||
      !std::isfinite(r.half_height))
    throw InvalidArgument("region must be finite");
  if (!(r.half_width > 0.0) || !(r.half_height > 0.0))
    throw InvalidArgument("region extents must be positive");
}

// Center of pixel (x, y) on a width x height raster covering the region.
// x runs left to right, y runs top to bottom (row 0 is the top of the image).
// The offsets are formed from exact integer numerators so that, for a region
// centered on the real axis, rows y and height-1-y get exactly conjugate
// points; the renderer's mirror symmetry rests on this.
inline Complex pixel_center(const Region& r, int width, int height, int x, int y) {
  const double re =
      r.center.real() + r.half_width * static_cast<double>(2 * x + 1 - width) /
                            static_cast<double>(width);
  const double im =
      r.center.imag() + r.half_height * static_cast<double>(height - (2 * y + 1)) /
                            static_cast<double>(height);
  return Complex(re, im);
}

}  // namespace corrdyn
