#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "semilin/beltrami.hpp"
#include "semilin/error.hpp"
#include "semilin/oracles.hpp"

using namespace semilin;

namespace {

SymMatrix2 random_admissible(std::mt19937_64& rng, double K) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lam = std::exp(std::log(K) * u(rng)), th = 2.0 * M_PI * u(rng);
  const double c = std::cos(th), s = std::sin(th);
  // R diag(lam, 1/lam) R^T.
  return {lam * c * c + s * s / lam, (lam - 1.0 / lam) * c * s, lam * s * s + c * c / lam};
}

BeltramiOptions small_opts(int n) {
  BeltramiOptions o;
  o.grid_n = n;
  o.inverse_n_r = n / 2;
  o.inverse_n_theta = n / 2;
  return o;
}

// Smooth dilatation with sup norm below 0.3.
DilatationFn wavy_mu() {
  return [](cplx z) { return 0.15 * std::exp(cplx(0, 1) * 3.0 * z.real()) * (1.0 + 0.8 * std::sin(2.0 * z.imag())); };
}

double max_error_on_disk(const QuasiconformalMap& map, const std::function<cplx(cplx)>& exact, double rmax) {
  double err = 0.0;
  for (int i = 1; i <= 18; ++i)
    for (int j = 0; j < 24; ++j) {
      const cplx z = std::polar(rmax * i / 18.0, 2.0 * M_PI * j / 24.0);
      err = std::max(err, std::abs(map.forward(z) - exact(z)));
    }
  return err;
}

}  // namespace

TEST_CASE("matrix and dilatation algebra examples") {
  CHECK(std::abs(matrix_to_mu(SymMatrix2{})) == 0.0);
  CHECK(std::abs(matrix_to_mu(SymMatrix2{0.5, 0.0, 2.0}) - 1.0 / 3.0) < 1e-15);
  const SymMatrix2 I = mu_to_matrix(0.0);
  CHECK(I.a11 == 1.0);
  CHECK(I.a12 == 0.0);
  CHECK(I.a22 == 1.0);
  const SymMatrix2 D = mu_to_matrix(1.0 / 3.0);
  CHECK(D.a11 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(D.a12) < 1e-15);
  CHECK(D.a22 == doctest::Approx(2.0).epsilon(1e-15));
  const RadialStretch rs = radial_stretch_reference(2.0);
  const SymMatrix2 at1 = rs.matrix(1.0);
  CHECK(at1.a11 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(at1.a22 == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_WITH(matrix_to_mu(SymMatrix2{-1.0, 0.0, -1.0}), "degenerate node");
  CHECK_THROWS_WITH(mu_to_matrix(cplx(0.6, 0.8)), "degenerate dilatation");
}

TEST_CASE("matrix to dilatation round trip") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    const SymMatrix2 A = random_admissible(rng, 3.0);
    const SymMatrix2 B = mu_to_matrix(matrix_to_mu(A));
    CHECK(std::abs(B.a11 - A.a11) < 1e-12);
    CHECK(std::abs(B.a12 - A.a12) < 1e-12);
    CHECK(std::abs(B.a22 - A.a22) < 1e-12);
    CHECK(std::abs(B.det() - 1.0) < 1e-12);
    CHECK(std::abs(matrix_to_mu(A)) <= 0.5 + 1e-12);
  }
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int t = 0; t < 100; ++t) {
    const cplx mu(u(rng), u(rng));
    if (std::abs(mu) >= 0.8) continue;
    CHECK(std::abs(matrix_to_mu(mu_to_matrix(mu)) - mu) < 1e-12);
    CHECK(std::abs(mu_to_matrix(mu).det() - 1.0) < 1e-12);
  }
}

TEST_CASE("field conversions and ellipticity check") {
  CartesianGrid g{17, 13, cplx(-1, -1), 0.125};
  MatrixField I{g, std::vector<SymMatrix2>(g.size()), 1.0};
  CHECK(ellipticity_check(I).K_measured == doctest::Approx(1.0));
  MatrixField D{g, std::vector<SymMatrix2>(g.size(), SymMatrix2{0.5, 0.0, 2.0}), 2.0};
  CHECK(ellipticity_check(D).K_measured == doctest::Approx(2.0).epsilon(1e-12));
  const BeltramiField mu0 = matrix_to_mu(I);
  for (const cplx& m : mu0.mu) CHECK(m == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BeltramiField rnd = BeltramiField::sample(g, [&](cplx) { return std::polar(u(rng) / 3.0, 2.0 * M_PI * u(rng)); });
  rnd.mu[7] = std::polar(1.0 / 3.0, 0.4);
  const MatrixField A = mu_to_matrix(rnd);
  const EllipticityReport rep = ellipticity_check(A);
  CHECK(rep.K_measured <= 2.0 + 1e-9);
  CHECK(rep.K_measured == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.worst_node == 7u);
  CHECK(rep.max_det_error <= 1e-12);
  const BeltramiField back = matrix_to_mu(A);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(back.mu[k] - rnd.mu[k]) < 1e-12);

  const auto path = std::filesystem::temp_directory_path() / "semilin_matrix.csv";
  A.save_csv(path.string());
  const MatrixField L = MatrixField::load_csv(path.string());
  CHECK(L.grid == g);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(L.values[k].a12 == A.values[k].a12);
  std::filesystem::remove(path);
}

TEST_CASE("beurling multiplier self test") { CHECK(beurling_self_test(128) < 1e-10); }

TEST_CASE("conformal case is the identity") {
  const QuasiconformalMap map = solve_beltrami_disk([](cplx) { return cplx(0.0); }, small_opts(128));
  CHECK(max_error_on_disk(map, [](cplx z) { return z; }, 0.95) < 1e-8);
  double inv = 0.0;
  for (int k = 0; k < 50; ++k) {
    const cplx w = std::polar(0.9 * k / 50.0, 0.7 * k);
    inv = std::max(inv, std::abs(map.inverse(w) - w));
  }
  CHECK(inv < 1e-8);
  const ScalarField J = jacobian_inverse(map);
  CHECK(std::abs(J.min() - 1.0) < 1e-5);
  CHECK(std::abs(J.max() - 1.0) < 1e-5);
}

TEST_CASE("radial stretch maps") {
  for (double K : {2.0, 3.0}) {
    const RadialStretch rs = radial_stretch_reference(K);
    const QuasiconformalMap map = solve_beltrami_disk([&](cplx z) { return rs.mu(z); }, small_opts(256));
    CHECK(max_error_on_disk(map, [&](cplx z) { return rs.omega(z); }, 0.9) < 1e-2);
    if (K != 2.0) continue;
    double inv = 0.0;
    for (int i = 1; i <= 19; ++i)
      for (int j = 0; j < 16; ++j) {
        const cplx w = std::polar(0.05 * i, 2.0 * M_PI * j / 16.0);
        inv = std::max(inv, std::abs(map.inverse(w) - rs.omega_inverse(w)));
      }
    CHECK(inv < 1e-2);
    const ScalarField J = jacobian_inverse(map);
    const DiskGrid& g = J.grid();
    double jerr = 0.0;
    for (int i = 0; i < g.n_r(); ++i) {
      if (g.radius(i) < 0.05 || g.radius(i) > 0.95) continue;
      for (int j = 0; j < g.n_theta(); ++j) jerr = std::max(jerr, std::abs(J(i, j) - rs.jacobian_inverse(g.node(i, j))));
    }
    CHECK(jerr < 1e-2);
    CHECK(J.integral() == doctest::Approx(M_PI).epsilon(0.02));
    const JacobianIntegrability ji = select_jacobian_p(map, 2.0);
    CHECK(ji.p < 2.0);
    CHECK(std::abs(ji.norm - ji.coarse_norm) <= 0.02 * ji.norm);
  }
}

TEST_CASE("beltrami residual decreases under refinement") {
  const RadialStretch rs = radial_stretch_reference(2.0);
  const DilatationFn mu = [&](cplx z) { return rs.mu(z); };
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    BeltramiOptions o = small_opts(n);
    const QuasiconformalMap map = solve_beltrami_disk(mu, o);
    const double r = beltrami_residual(map, mu, 0.9);
    if (n > 64) CHECK(prev / r >= 1.5);
    prev = r;
  }
}

TEST_CASE("random dilatation round trip") {
  const DilatationFn mu = wavy_mu();
  const QuasiconformalMap map = solve_beltrami_disk(mu, small_opts(128));
  double err = 0.0;
  for (int j = 0; j < 64; ++j) {
    const cplx w = std::polar(0.7, 2.0 * M_PI * j / 64.0);
    err = std::max(err, std::abs(map.forward(map.inverse(w)) - w));
  }
  CHECK(err <= 1e-3);
  CHECK(std::abs(map.forward(0.0)) < 1e-8);
  CHECK(std::abs(std::arg(map.forward(0.999))) < 1e-3);
  CHECK(jacobian_inverse(map).min() > 0.0);
}

TEST_CASE("ellipse map with stage-2 correction") {
  const JordanDomain e = JordanDomain::ellipse(1.5, 0.75, 256);
  const QuasiconformalMap map = solve_beltrami(e, [](cplx) { return cplx(0.0); }, small_opts(128));
  CHECK(map.theodorsen_iterations() > 0);
  CHECK(std::abs(map.forward(0.0)) < 1e-6);
  for (int j = 0; j < 16; ++j) {
    const cplx b = e.point_at(j / 16.0);
    CHECK(std::abs(std::abs(map.forward(0.999 * b)) - 1.0) < 1e-2);
  }
  CHECK(jacobian_inverse(map).integral() == doctest::Approx(std::abs(e.signed_area())).epsilon(0.02));
}

TEST_CASE("beltrami error paths") {
  // U-shaped domain: not starlike about a point in one arm.
  const JordanDomain u = JordanDomain::polygon({{0, 0}, {1.5, 0}, {3, 0}, {3, 2}, {2.4, 2}, {2.4, 0.6}, {0.6, 0.6},
                                               {0.6, 2}, {0, 2}, {0, 1}});
  BeltramiOptions o = small_opts(64);
  o.center = cplx(0.3, 1.7);
  CHECK_THROWS_WITH(solve_beltrami(u, [](cplx) { return cplx(0.0); }, o), "stage-2 unsupported image");

  BeltramiOptions strong = small_opts(64);
  strong.k_max = 0.99;
  CHECK_THROWS_WITH(solve_beltrami_disk([](cplx z) { return z == 0.0 ? cplx(0.0) : 0.97 * z / std::conj(z); }, strong),
                    "dilatation too strong for grid");
  CHECK_THROWS_AS(solve_beltrami_disk([](cplx) { return cplx(0.7); }, small_opts(64)), ConfigError);
}
