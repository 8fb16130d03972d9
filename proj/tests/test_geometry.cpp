#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "semilin/error.hpp"
#include "semilin/geometry.hpp"

using namespace semilin;

namespace {

JordanDomain unit_square() {
  return JordanDomain::polygon({{0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {1, 1}, {0.5, 1}, {0, 1}, {0, 0.5}});
}

// Two unit squares joined by a corridor of the given width.
JordanDomain dumbbell(double width) {
  const double a = 0.5 - 0.5 * width, b = 0.5 + 0.5 * width;
  return JordanDomain::polygon({{0, 0}, {1, 0}, {1, a}, {2, a}, {2, 0}, {3, 0}, {3, 1}, {2, 1},
                                {2, b}, {1, b}, {1, 1}, {0, 1}});
}

}  // namespace

TEST_CASE("disk grid cell areas sum to pi") {
  for (int n : {8, 33, 128, 256}) {
    const DiskGrid g(n, 2 * n);
    CHECK(std::abs(g.total_area() - M_PI) / M_PI < 1e-12);
    CHECK(g.radius(0) > 0.0);
    CHECK(g.radius(n - 1) < 1.0);
  }
  CHECK_THROWS_AS(DiskGrid(0, 8), ConfigError);
}

TEST_CASE("jordan domain validation") {
  CHECK_THROWS_WITH_AS(JordanDomain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}),
                       "jordan domain needs at least 8 boundary points", ConfigError);
  std::vector<cplx> cw;
  for (int k = 0; k < 16; ++k) cw.push_back(std::polar(1.0, -2.0 * M_PI * k / 16));
  CHECK_THROWS_WITH_AS(JordanDomain{cw}, "boundary must be positively oriented", ConfigError);
  // Figure-eight crossing.
  std::vector<cplx> eight;
  for (int k = 0; k < 32; ++k) {
    const double t = 2.0 * M_PI * k / 32;
    eight.emplace_back(std::sin(t), std::sin(t) * std::cos(t) + 0.01 * std::cos(t));
  }
  CHECK_THROWS_AS(JordanDomain::polygon(eight), ConfigError);
}

TEST_CASE("boundary distance examples") {
  const JordanDomain disk = JordanDomain::disk(0.0, 1.0, 1024);
  CHECK(boundary_distance(disk, 0.0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(boundary_distance(disk, 0.5) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(boundary_distance(unit_square(), {0.5, 0.25}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_WITH(boundary_distance(disk, 1.5), "exterior point");
}

TEST_CASE("domain geometry and serialization") {
  const JordanDomain sq = unit_square();
  CHECK(sq.signed_area() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sq.centroid() - cplx(0.5, 0.5)) < 1e-12);
  CHECK(sq.contains({0.3, 0.7}));
  CHECK_FALSE(sq.contains({1.3, 0.7}));
  const JordanDomain e = JordanDomain::ellipse(2.0, 1.0, 512);
  CHECK(e.signed_area() == doctest::Approx(2.0 * M_PI).epsilon(1e-4));
  CHECK(std::abs(e.point_at(0.0) - cplx(2.0, 0.0)) < 1e-12);

  const auto path = std::filesystem::temp_directory_path() / "semilin_domain_roundtrip.txt";
  e.save(path.string());
  const JordanDomain back = JordanDomain::load(path.string());
  REQUIRE(back.control_points().size() == e.control_points().size());
  for (std::size_t k = 0; k < e.control_points().size(); ++k)
    CHECK(std::abs(back.control_points()[k] - e.control_points()[k]) < 1e-15);
  std::filesystem::remove(path);
}

TEST_CASE("quasihyperbolic distance on the disk matches the radial integral") {
  const JordanDomain disk = JordanDomain::disk(0.0, 1.0, 1024);
  const double h = 1.0 / 128;
  CHECK(quasihyperbolic_distance(disk, 0.0, 0.0, h) == doctest::Approx(0.0));
  for (double r : {0.5, 0.9}) {
    const double k = quasihyperbolic_distance(disk, r, 0.0, h);
    const double oracle = std::log(1.0 / (1.0 - r));
    CHECK(std::abs(k - oracle) / oracle < 0.02);
  }
  CHECK_THROWS_WITH(quasihyperbolic_distance(disk, 2.0, 0.0, h), "exterior point");
}

TEST_CASE("quasihyperbolic distance invariants") {
  const JordanDomain disk = JordanDomain::disk(0.0, 1.0, 512);
  const double h = 1.0 / 64;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rad(0.0, 0.85), ang(0.0, 2.0 * M_PI);
  for (int t = 0; t < 5; ++t) {
    const cplx a = std::polar(rad(rng), ang(rng)), b = std::polar(rad(rng), ang(rng)),
               c = std::polar(rad(rng), ang(rng));
    const double ab = quasihyperbolic_distance(disk, a, b, h), ba = quasihyperbolic_distance(disk, b, a, h);
    const double bc = quasihyperbolic_distance(disk, b, c, h), ac = quasihyperbolic_distance(disk, a, c, h);
    CHECK(std::abs(ab - ba) < 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
  }

  // Enlarging the domain cannot increase the distance.
  const JordanDomain slit = JordanDomain::slit_disk(0.02, 0.0, 512);
  const cplx p(-0.3, 0.4), q(0.5, -0.3);
  CHECK(quasihyperbolic_distance(disk, p, q, h) <= quasihyperbolic_distance(slit, p, q, h) + 1e-9);

  // Refinement converges from above up to 1% slack.
  const double coarse = quasihyperbolic_distance(disk, 0.75, 0.0, 1.0 / 32);
  const double fine = quasihyperbolic_distance(disk, 0.75, 0.0, 1.0 / 64);
  CHECK(fine <= coarse * 1.01);
}

TEST_CASE("disconnected lattice reports coarse resolution") {
  const JordanDomain d = dumbbell(0.02);
  CHECK_THROWS_WITH(quasihyperbolic_distance(d, {2.5, 0.5}, {0.5, 0.5}, 0.1), "resolution too coarse");
  CHECK(std::isfinite(quasihyperbolic_distance(d, {2.5, 0.5}, {0.5, 0.5}, 0.0025)));
}

TEST_CASE("quasihyperbolic boundary constants") {
  const JordanDomain disk = JordanDomain::disk(0.0, 1.0, 1024);
  const QhbEstimate est = estimate_qhb_constants(disk, 0.0, 48);
  CHECK(est.a >= 0.95);
  CHECK(est.a <= 1.05);
  CHECK(std::abs(est.b) < 0.05 + est.max_residual);

  const JordanDomain big = JordanDomain::disk(0.0, 2.0, 1024);
  const QhbEstimate est2 = estimate_qhb_constants(big, 0.0, 48);
  CHECK(est2.a == doctest::Approx(est.a).epsilon(0.02));
  CHECK(std::abs(est2.b - est.b) < 0.02);

  const JordanDomain slit = JordanDomain::slit_disk(0.02, 0.0, 512);
  const QhbEstimate est3 = estimate_qhb_constants(slit, {-0.4, 0.1}, 32);
  CHECK(std::isfinite(est3.a));
  CHECK(std::isfinite(est3.b));

  CHECK_THROWS_WITH(estimate_qhb_constants(disk, 0.0, 7), "insufficient samples");
}
