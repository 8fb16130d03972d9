#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "semilin/error.hpp"
#include "semilin/potential.hpp"

using namespace semilin;

namespace {

std::vector<cplx> random_points(int n, double rmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> z(n);
  for (auto& p : z) p = std::polar(rmax * std::sqrt(u(rng)), 2.0 * M_PI * u(rng));
  return z;
}

double sup_diff(const ScalarField& a, const std::function<double(cplx)>& f) {
  double err = 0.0;
  const DiskGrid& g = a.grid();
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) err = std::max(err, std::abs(a(i, j) - f(g.node(i, j))));
  return err;
}

// Newtonian potential of the density Re z on the unit disk.
double newton_of_x(cplx z) {
  const double r = std::abs(z), c = r > 0.0 ? z.real() / r : 0.0;
  return r <= 1.0 ? (r * r * r / 8.0 - r / 4.0) * c : -c / (8.0 * r);
}

}  // namespace

TEST_CASE("green function and poisson kernel examples") {
  CHECK(green_function(0.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(green_function(0.5, cplx(0, 0.5)) ==
        doctest::Approx(std::log(std::abs(cplx(1, 0.25)) / std::abs(cplx(0.5, -0.5)))).epsilon(1e-14));
  CHECK(green_function(0.5, cplx(0, 0.5)) == doctest::Approx(0.37687).epsilon(1e-4));
  for (const cplx& z : random_points(10, 0.95, 1)) {
    const cplx w = random_points(1, 0.95, static_cast<std::uint64_t>(1000 * std::abs(z)) + 7)[0];
    CHECK(green_function(z, w) == doctest::Approx(green_function(w, z)).epsilon(1e-13));
    CHECK(green_function(z, w) > 0.0);
  }
  CHECK_THROWS_WITH(green_function(0.3, 0.3), "kernel diagonal");

  CHECK(poisson_kernel(0.0, 1.234) == doctest::Approx(1.0));
  CHECK(poisson_kernel(0.5, 0.0) == doctest::Approx(3.0).epsilon(1e-14));
  const int m = 512;
  double mean = 0.0;
  for (int j = 0; j < m; ++j) mean += poisson_kernel(cplx(0.3, 0.4), 2.0 * M_PI * j / m);
  CHECK(std::abs(mean / m - 1.0) < 1e-10);
  CHECK_THROWS_WITH(poisson_kernel(1.0, 0.0), "exterior evaluation");
}

TEST_CASE("poisson integral examples") {
  const BoundaryData c = BoundaryData::constant(64, 2.5);
  const auto pts = random_points(20, 0.9, 2);
  for (double v : poisson_integral(c, pts)) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
  const BoundaryData cosine = BoundaryData::from_function(64, [](double t) { return std::cos(t); });
  const std::vector<cplx> z{0.3, 0.0};
  const auto v = poisson_integral(cosine, z);
  CHECK(std::abs(v[0] - 0.3) < 1e-8);
  CHECK(std::abs(v[1]) < 1e-10);
  const auto vt = poisson_integral_trapezoid(cosine, z);
  CHECK(std::abs(vt[0] - 0.3) < 1e-8);
  CHECK(std::abs(vt[1]) < 1e-10);

  const BoundaryData smooth = BoundaryData::from_function(128, [](double t) { return std::exp(std::cos(t)) * std::sin(2 * t); });
  const auto inner = random_points(20, 0.7, 3);
  const auto a = poisson_integral(smooth, inner), b = poisson_integral_trapezoid(smooth, inner);
  for (std::size_t k = 0; k < inner.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-10);
  CHECK_THROWS_AS(BoundaryData(std::vector<double>(24, 0.0)), ConfigError);
}

TEST_CASE("green and newtonian potentials of the unit density") {
  const DiskGrid grid(64, 64);
  const ScalarField one(grid, 1.0), zero(grid, 0.0);
  const std::vector<cplx> z{0.0, 0.5, 2.0};
  const auto gp = green_potential(one, std::span<const cplx>(z.data(), 2));
  CHECK(std::abs(gp[0] - 0.25) < 1e-3);
  CHECK(std::abs(gp[1] - 0.1875) < 1e-3);
  const auto np = newtonian_potential(one, z);
  CHECK(std::abs(np[0] + 0.25) < 1e-3);
  CHECK(std::abs(np[1] - (0.25 - 1.0) / 4.0) < 1e-3);
  CHECK(std::abs(np[2] - 0.5 * std::log(2.0)) < 1e-3);
  for (double v : newtonian_potential(zero, z)) CHECK(v == 0.0);
  for (double v : green_potential(zero, std::span<const cplx>(z.data(), 2))) CHECK(v == 0.0);

  const std::vector<cplx> half{0.5};
  const auto dn = newtonian_gradient(one, half);
  CHECK(std::abs(dn[0] - 0.125) < 1e-3);
  CHECK(std::abs(newtonian_gradient(zero, half)[0]) == 0.0);
}

TEST_CASE("newtonian potential of a dipole density") {
  const DiskGrid grid(96, 96);
  const ScalarField g = ScalarField::from_function(grid, [](cplx z) { return z.real(); });
  CHECK(sup_diff(newtonian_potential(g), newton_of_x) < 1e-3);
  const auto pts = random_points(10, 1.6, 4);
  const auto v = newtonian_potential(g, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) CHECK(std::abs(v[k] - newton_of_x(pts[k])) < 1e-3);
}

TEST_CASE("newtonian gradient matches finite differences") {
  const DiskGrid grid(64, 64);
  const ScalarField g = random_smooth_density(grid, 17);
  const double h = 1e-4;
  for (const cplx& z : random_points(10, 0.9, 5)) {
    const std::vector<cplx> pts{z + h, z - h, z + cplx(0, h), z - cplx(0, h)};
    const auto v = newtonian_potential(g, pts);
    const double ux = (v[0] - v[1]) / (2 * h), uy = (v[2] - v[3]) / (2 * h);
    const cplx fd(0.5 * ux, -0.5 * uy);
    const cplx dz = newtonian_gradient(g, std::vector<cplx>{z})[0];
    CHECK(std::abs(dz - fd) <= 1e-5 * std::max(1.0, std::abs(dz)));
  }
}

TEST_CASE("boundary trace") {
  const DiskGrid grid(64, 64);
  const BoundaryData t0 = boundary_trace(ScalarField(grid, 0.0)), t1 = boundary_trace(ScalarField(grid, 1.0));
  for (double v : t0.values()) CHECK(v == 0.0);
  for (double v : t1.values()) CHECK(std::abs(v) < 1e-3);
  const ScalarField radial = ScalarField::from_function(grid, [](cplx z) { return std::exp(-std::norm(z)); });
  const BoundaryData t = boundary_trace(radial);
  CHECK(t.max() - t.min() < 1e-6);
  CHECK(t.size() >= grid.n_theta());
}

TEST_CASE("poisson dirichlet solve examples") {
  const DiskGrid grid(64, 64);
  const int m = default_trace_size(grid);
  const auto U0 = solve_poisson_dirichlet(ScalarField(grid, 0.0), BoundaryData::constant(m, 5.0));
  CHECK(sup_diff(U0.U, [](cplx) { return 5.0; }) < 1e-12);
  const auto U1 = solve_poisson_dirichlet(ScalarField(grid, 1.0), BoundaryData::constant(m, 0.0));
  CHECK(std::abs(newtonian_potential(ScalarField(grid, 1.0), std::vector<cplx>{0.0})[0] + 0.25) < 1e-3);
  CHECK(sup_diff(U1.U, [](cplx z) { return (std::norm(z) - 1.0) / 4.0; }) < 1e-3);
  const auto U2 = solve_poisson_dirichlet(ScalarField(grid, 1.0), BoundaryData::constant(m, 1.0));
  CHECK(sup_diff(U2.U, [](cplx z) { return 0.75 + std::norm(z) / 4.0; }) < 1e-3);
  CHECK(U2.representation_gap < 1e-3);

  PoissonOptions strict;
  strict.consistency_tol = 1e-30;
  const ScalarField rough = random_smooth_density(grid, 3);
  CHECK_THROWS_WITH(solve_poisson_dirichlet(rough, BoundaryData::constant(m, 0.0), strict), "representation mismatch");
}

TEST_CASE("discrete maximum principle and linearity") {
  const DiskGrid grid(48, 64);
  const int m = default_trace_size(grid);
  const BoundaryData phi = BoundaryData::from_function(m, [](double t) { return std::sin(3 * t) + 0.3 * std::cos(t); });
  const auto sol = solve_poisson_dirichlet(ScalarField(grid, 0.0), phi);
  CHECK(sol.U.min() >= phi.min() - 1e-8);
  CHECK(sol.U.max() <= phi.max() + 1e-8);

  const ScalarField a = random_smooth_density(grid, 8), b = random_smooth_density(grid, 9);
  ScalarField mix(grid);
  for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = 2.0 * a[k] - 0.7 * b[k];
  const ScalarField na = newtonian_potential(a), nb = newtonian_potential(b), nm = newtonian_potential(mix);
  for (std::size_t k = 0; k < mix.size(); ++k)
    CHECK(std::abs(nm[k] - (2.0 * na[k] - 0.7 * nb[k])) < 1e-12 * (1.0 + std::abs(nm[k])));
}

TEST_CASE("representation consistency for random smooth densities") {
  const DiskGrid grid(128, 128);
  const int m = default_trace_size(grid);
  const BoundaryData phi = BoundaryData::from_function(m, [](double t) { return std::cos(2 * t); });
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto sol = solve_poisson_dirichlet(random_smooth_density(grid, 100 + s), phi);
    CHECK(sol.representation_gap <= 1e-3);
  }
}

TEST_CASE("laplacian residual examples") {
  const DiskGrid grid(128, 128);
  const int m = default_trace_size(grid);
  const ScalarField one(grid, 1.0), zero(grid, 0.0);
  const auto sol = solve_poisson_dirichlet(one, BoundaryData::constant(m, 0.0));
  CHECK(laplacian_residual(sol.U, one) <= 1e-2);
  // Angular truncation of the stencil is dtheta^2 / (12 r) on the innermost checked ring.
  const DiskGrid fine(128, 256);
  const BoundaryData cosine = BoundaryData::from_function(256, [](double t) { return std::cos(t); });
  CHECK(laplacian_residual(poisson_integral(cosine, fine), ScalarField(fine, 0.0)) <= 1e-2);
  const ScalarField u = ScalarField::from_function(grid, [](cplx z) { return z.real() * z.real() * z.imag(); });
  const ScalarField g = ScalarField::from_function(grid, [](cplx z) { return 2.0 * z.imag(); });
  CHECK(laplacian_residual(u, g) <= 1e-2);
  CHECK_THROWS_AS(laplacian_residual(ScalarField(DiskGrid(16, 16)), ScalarField(DiskGrid(16, 16))), ConfigError);
}

TEST_CASE("unbounded-potential density") {
  const ScalarField g15 = prop2_density(1.5, DiskGrid(256, 64));
  CHECK(std::abs(g15.lp_norm(1.0) - 4.0 * M_PI) / (4.0 * M_PI) < 0.05);
  const ScalarField g125 = prop2_density(1.25, DiskGrid(256, 64));
  CHECK(std::abs(g125.lp_norm(1.0) - 8.0 * M_PI) / (8.0 * M_PI) < 0.1);
  double prev = 0.0;
  for (int n = 16; n <= 256; n *= 2) {
    const double n0 = newtonian_potential(prop2_density(1.5, DiskGrid(n, 16)), std::vector<cplx>{0.0})[0];
    if (n > 16) CHECK(n0 < prev);
    prev = n0;
  }
  CHECK_THROWS_AS(prop2_density(2.0, DiskGrid(16, 16)), ConfigError);
}

TEST_CASE("newton bound is never exceeded by fresh densities") {
  const DiskGrid grid(32, 32);
  const NewtonBound nb = measure_newton_bound(grid, 2.0, 16, 1);
  CHECK(nb.M > 0.0);
  CHECK(nb.M_probe <= nb.M * (1.0 + 1e-12));
  std::mt19937_64 rng(77);
  std::normal_distribution<double> d;
  for (int t = 0; t < 20; ++t) {
    ScalarField g(grid);
    for (auto& v : g.values()) v = d(rng);
    CHECK(newton_ratio(g, 2.0) <= nb.M * (1.0 + 1e-12));
  }
}

TEST_CASE("scalar field and boundary data serialization") {
  const DiskGrid grid(8, 16);
  const ScalarField f = random_smooth_density(grid, 4);
  const auto dir = std::filesystem::temp_directory_path();
  f.save_csv((dir / "semilin_field.csv").string());
  const ScalarField back = ScalarField::load_csv((dir / "semilin_field.csv").string());
  CHECK(back.grid() == grid);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);
  const BoundaryData b = BoundaryData::from_function(32, [](double t) { return std::sin(t) / 3.0; });
  b.save_csv((dir / "semilin_boundary.csv").string());
  const BoundaryData bb = BoundaryData::load_csv((dir / "semilin_boundary.csv").string());
  for (int j = 0; j < 32; ++j) CHECK(bb[j] == b[j]);
  std::filesystem::remove(dir / "semilin_field.csv");
  std::filesystem::remove(dir / "semilin_boundary.csv");
}
