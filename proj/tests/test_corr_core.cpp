#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "corrdyn/corr_core.hpp"
#include "corrdyn/errors.hpp"
#include "doctest.h"
#include "helpers.hpp"

using corrdyn::Complex;
using corrdyn::CorrespondenceParams;
using testutil::close;
using testutil::min_dist;
using testutil::same_points;

TEST_SUITE("corr-core") {

TEST_CASE("parameter validation rejects degenerate exponents") {
  CHECK_THROWS_AS(corrdyn::validate_params({2, 2, Complex(0, 0)}),
                  corrdyn::InvalidArgument);
  CHECK_THROWS_AS(corrdyn::validate_params({1, 2, Complex(0, 0)}),
                  corrdyn::InvalidArgument);
  CHECK_THROWS_AS(corrdyn::validate_params({2, 0, Complex(0, 0)}),
                  corrdyn::InvalidArgument);
  CHECK_THROWS_AS(
      corrdyn::validate_params(
          {2, 1, Complex(std::numeric_limits<double>::quiet_NaN(), 0)}),
      corrdyn::InvalidArgument);
  CHECK_NOTHROW(corrdyn::validate_params({2, 1, Complex(0, 0)}));
  CHECK_NOTHROW(corrdyn::validate_params({7, 6, Complex(-2, 0.5)}));
}

TEST_CASE("forward images at hand-computed points") {
  const CorrespondenceParams par{4, 2, Complex(-2, 0)};
  // z = 0 is the collision point: single image c
  CHECK(same_points(corrdyn::forward_images(Complex(0, 0), par),
                    {Complex(-2, 0)}));
  // z = -2: |z|^2 = 4, the two square-root branches of z^4 = 16
  CHECK(same_points(corrdyn::forward_images(Complex(-2, 0), par),
                    {Complex(2, 0), Complex(-6, 0)}, 1e-12));

  const CorrespondenceParams quad{2, 1, Complex(0.5, 0)};
  CHECK(same_points(corrdyn::forward_images(Complex(1, 0), quad),
                    {Complex(1.5, 0)}));
}

TEST_CASE("backward images at hand-computed points") {
  const CorrespondenceParams par{4, 2, Complex(-2, 0)};
  // (2 - (-2))^2 = 16, fourth roots
  CHECK(same_points(corrdyn::backward_images(Complex(2, 0), par),
                    {Complex(2, 0), Complex(0, 2), Complex(-2, 0), Complex(0, -2)},
                    1e-12));
  // w = c collapses to the critical point
  CHECK(same_points(corrdyn::backward_images(Complex(-2, 0), par), {Complex(0, 0)}));

  const CorrespondenceParams quad{2, 1, Complex(0, 0)};
  CHECK(same_points(corrdyn::backward_images(Complex(1, 0), quad),
                    {Complex(1, 0), Complex(-1, 0)}, 1e-12));
}

TEST_CASE("forward images come in conjugate-symmetric sets for real c") {
  const CorrespondenceParams par{5, 3, Complex(-1.25, 0)};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const Complex z(u(rng), u(rng));
    const auto up = corrdyn::forward_images(z, par);
    const auto down = corrdyn::forward_images(std::conj(z), par);
    REQUIRE(up.size() == down.size());
    for (const Complex w : up) CHECK(min_dist(std::conj(w), down) < 1e-12);
  }
}

TEST_CASE("backward then forward returns to the start") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const std::pair<int, int> exponents[] = {{4, 2}, {3, 2}, {5, 3}, {2, 1}};
  for (const auto& [p, q] : exponents) {
    const CorrespondenceParams par{p, q, Complex(-0.7, 0.3)};
    for (int t = 0; t < 200; ++t) {
      const Complex z(u(rng), u(rng));
      if (std::abs(z) < 1e-3) continue;
      for (const Complex w : corrdyn::forward_images(z, par)) {
        // z solves z'^p = (w - c)^q, so it must appear among the preimages
        const auto back = corrdyn::backward_images(w, par);
        CHECK(back.size() == static_cast<std::size_t>(p));
        CHECK(min_dist(z, back) < 1e-9 * std::max(1.0, std::abs(z)));
      }
    }
  }
}

TEST_CASE("branch derivative against closed form and finite differences") {
  const CorrespondenceParams par{4, 2, Complex(-2, 0)};
  // p z^3 / (q (w-c)): 4*8 / (2*4) = 4
  CHECK(close(corrdyn::branch_derivative(Complex(2, 0), Complex(2, 0), par),
              Complex(4, 0), 1e-12));

  // finite-difference cross check along the tracked branch
  const Complex z0(1.3, 0.4);
  const auto ws = corrdyn::forward_images(z0, par);
  for (const Complex w0 : ws) {
    const Complex d = corrdyn::branch_derivative(z0, w0, par);
    const double h = 1e-6;
    const Complex z1 = z0 + Complex(h, 0);
    const auto ws1 = corrdyn::forward_images(z1, par);
    double best = 1e300;
    Complex w1;
    for (const Complex cand : ws1)
      if (std::abs(cand - w0) < best) best = std::abs(cand - w0), w1 = cand;
    CHECK(std::abs((w1 - w0) / Complex(h, 0) - d) < 1e-4);
  }

  // branches differ by q-th roots of unity, derivatives pick up the same factor
  const Complex z(0.9, -1.1);
  const auto all = corrdyn::forward_images(z, par);
  REQUIRE(all.size() == 2);
  const Complex c = par.c;
  const Complex ratio = (all[1] - c) / (all[0] - c);
  const Complex dr = corrdyn::branch_derivative(z, all[1], par) /
                     corrdyn::branch_derivative(z, all[0], par);
  CHECK(close(dr, ratio, 1e-10));

  CHECK_THROWS_AS(corrdyn::branch_derivative(Complex(0, 0), Complex(-2, 0), par),
                  corrdyn::SingularPointError);
  CHECK_THROWS_AS(corrdyn::branch_derivative(Complex(2, 0), Complex(-2, 0), par),
                  corrdyn::SingularPointError);
}

TEST_CASE("escape radius matches closed-form values") {
  // r^2 - 2r - |c| = 0 at the binding radius for p/q = 2
  CHECK(corrdyn::escape_radius({4, 2, Complex(-2, 0)}) ==
        doctest::Approx(1.0 + std::sqrt(3.0)).epsilon(1e-8));
  CHECK(corrdyn::escape_radius({2, 1, Complex(0, 0)}) ==
        doctest::Approx(2.0).epsilon(1e-8));
  CHECK(corrdyn::escape_radius({2, 1, Complex(-2, 0)}) ==
        doctest::Approx(1.0 + std::sqrt(3.0)).epsilon(1e-8));
  CHECK(corrdyn::escape_radius({4, 2, Complex(10, 0)}) ==
        doctest::Approx(1.0 + std::sqrt(11.0)).epsilon(1e-8));
}

TEST_CASE("beyond the escape radius every image doubles in modulus") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ur(1.0, 3.0);
  std::uniform_real_distribution<double> ua(0.0, 6.283185307179586);
  const std::pair<int, int> exponents[] = {{4, 2}, {3, 2}, {2, 1}, {7, 5}};
  for (const auto& [p, q] : exponents) {
    const CorrespondenceParams par{p, q, Complex(-1.9, 1.2)};
    const double R = corrdyn::escape_radius(par);
    CHECK(R >= 1.0);
    for (int t = 0; t < 250; ++t) {
      const double r = R * ur(rng);
      const Complex z = std::polar(r, ua(rng));
      for (const Complex w : corrdyn::forward_images(z, par))
        CHECK(std::abs(w) >= 2.0 * std::abs(z) * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("branch continuation tracks a square-root branch") {
  const CorrespondenceParams par{4, 2, Complex(0, 0)};
  // w^2 = z^4 has global branches w = +/- z^2; the germ picks the minus sign
  const corrdyn::BranchGerm germ{Complex(1, 0), Complex(-1, 0)};
  const Complex end =
      corrdyn::continue_branch(germ, {Complex(1, 0), Complex(2, 0)}, par);
  CHECK(close(end, Complex(-4, 0), 1e-9));

  // constant path is the identity
  const Complex same =
      corrdyn::continue_branch(germ, {Complex(1, 0), Complex(1, 0)}, par);
  CHECK(close(same, Complex(-1, 0), 1e-12));
}

TEST_CASE("continuation is homotopy invariant away from the branch point") {
  const CorrespondenceParams par{3, 2, Complex(-0.4, 0.1)};
  const Complex z0(1, 0);
  const auto ws = corrdyn::forward_images(z0, par);
  REQUIRE(ws.size() == 2);
  for (const Complex w0 : ws) {
    const corrdyn::BranchGerm germ{z0, w0};
    // both polylines stay in re >= 1, a simply connected region missing 0
    const Complex above = corrdyn::continue_branch(
        germ, {z0, Complex(1, 1), Complex(2, 1), Complex(2, 0)}, par);
    const Complex below = corrdyn::continue_branch(
        germ, {z0, Complex(1, -1), Complex(2, -1), Complex(2, 0)}, par);
    CHECK(close(above, below, 1e-9));
  }
}

TEST_CASE("continuation rejects paths through the branch point") {
  const CorrespondenceParams par{4, 2, Complex(0, 0)};
  const corrdyn::BranchGerm germ{Complex(1, 0), Complex(1, 0)};
  CHECK_THROWS_AS(
      corrdyn::continue_branch(germ, {Complex(1, 0), Complex(-1, 0)}, par),
      corrdyn::BranchPointError);
  // bad germ: (w - c)^q far from z^p
  CHECK_THROWS_AS(corrdyn::continue_branch({Complex(1, 0), Complex(5, 0)},
                                           {Complex(1, 0), Complex(2, 0)}, par),
                  corrdyn::BranchPointError);
}

TEST_CASE("monodromy around the origin shifts branch indices by p") {
  for (int p = 2; p <= 7; ++p) {
    for (int q = 1; q < p; ++q) {
      const CorrespondenceParams par{p, q, Complex(0, 0)};
      const auto perm = corrdyn::monodromy_permutation(par, 1.0, 0.0);
      REQUIRE(perm.size() == static_cast<std::size_t>(q));
      for (int k = 0; k < q; ++k) CHECK(perm[k] == (k + p) % q);
    }
  }
}

TEST_CASE("monodromy examples in both trivial and swapping regimes") {
  // p = 4, q = 2: 4 mod 2 = 0, identity
  const auto id = corrdyn::monodromy_permutation({4, 2, Complex(0, 0)}, 1.0, 0.0);
  CHECK(id == std::vector<int>{0, 1});
  // p = 3, q = 2: swap
  const auto sw = corrdyn::monodromy_permutation({3, 2, Complex(0, 0)}, 1.0, 0.0);
  CHECK(sw == std::vector<int>{1, 0});
  // q = 1 has a single branch
  const auto one = corrdyn::monodromy_permutation({2, 1, Complex(0, 0)}, 1.0, 0.0);
  CHECK(one == std::vector<int>{0});
  // independent of basepoint placement
  const auto sw2 =
      corrdyn::monodromy_permutation({3, 2, Complex(0, 0)}, 0.5, 1.234);
  CHECK(sw2 == std::vector<int>{1, 0});
}

}  // TEST_SUITE
