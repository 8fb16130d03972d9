#include <cmath>
#include <random>

#include "doctest.h"
#include "semilin/error.hpp"
#include "semilin/oracles.hpp"
#include "semilin/potential.hpp"
#include "semilin/semilinear.hpp"

using namespace semilin;

namespace {

double sup_diff(const ScalarField& a, const std::function<double(cplx)>& f) {
  double err = 0.0;
  const DiskGrid& g = a.grid();
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) err = std::max(err, std::abs(a(i, j) - f(g.node(i, j))));
  return err;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double err = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) err = std::max(err, std::abs(a[k] - b[k]));
  return err;
}

BoundaryData constant_phi(const DiskGrid& g, double v) { return BoundaryData::constant(default_trace_size(g), v); }

BoundaryData wavy_phi(const DiskGrid& g) {
  return BoundaryData::from_function(default_trace_size(g), [](double t) { return 1.0 + 0.5 * std::cos(t) + 0.2 * std::sin(2 * t); });
}

}  // namespace

TEST_CASE("harmonic case reduces to the poisson integral") {
  const DiskGrid grid(32, 32);
  const BoundaryData phi = BoundaryData::from_function(default_trace_size(grid), [](double t) { return std::cos(t); });
  const DiskSolution s = solve_quasilinear_disk(ScalarField(grid, 0.0), phi, make_power(0.5));
  CHECK(sup_diff(s.U, poisson_integral(phi, grid)) < 1e-12);
  REQUIRE(s.report.tau_trace.size() == 10u);
  for (const TauStep& t : s.report.tau_trace) CHECK(t.iterations == 1);
  CHECK(s.report.final_g_norm == 0.0);
}

TEST_CASE("bounded constant nonlinearity reduces to the linear oracle") {
  const DiskGrid grid(64, 64);
  const DiskSolution s = solve_quasilinear_disk(ScalarField(grid, 1.0), constant_phi(grid, 0.0), make_constant(1.0));
  CHECK(sup_diff(s.U, [](cplx z) { return (std::norm(z) - 1.0) / 4.0; }) < 1e-3);
  CHECK(s.report.converged);
}

TEST_CASE("square-root absorption matches the shooting oracle") {
  const DiskGrid grid(64, 64);
  const DiskSolution s = solve_quasilinear_disk(ScalarField(grid, 1.0), constant_phi(grid, 1.0), make_power(0.5));
  const RadialProfile oracle = radial_shoot(make_power(0.5), 1.0, 1.0);
  CHECK(sup_diff(s.U, [&](cplx z) { return oracle(std::abs(z)); }) < 1e-2);
  CHECK(s.report.final_g_norm <= s.report.apriori_bound);
  CHECK(s.report.M_probe <= s.report.M);
  CHECK(laplacian_residual(s.U, ScalarField::from_function(grid, [&](cplx z) { return std::sqrt(std::max(0.0, oracle(std::abs(z)))); })) < 1e-2);
}

TEST_CASE("iteration schemes agree") {
  const DiskGrid grid(32, 32);
  const ScalarField h = ScalarField::from_function(grid, [](cplx z) { return 1.0 + 0.5 * z.real(); });
  const BoundaryData phi = wavy_phi(grid);
  ContinuationOptions o;
  o.inner_tol = 1e-11;
  const DiskSolution a = solve_quasilinear_disk(h, phi, make_power(0.5), o);
  for (IterationScheme sch : {IterationScheme::anderson, IterationScheme::newton_krylov}) {
    o.scheme = sch;
    const DiskSolution b = solve_quasilinear_disk(h, phi, make_power(0.5), o);
    CHECK(sup_diff(a.U, b.U) < 1e-8);
    CHECK(b.report.scheme == scheme_name(sch));
  }
  CHECK(parse_scheme("anderson") == IterationScheme::anderson);
  CHECK_THROWS_AS(parse_scheme("jacobi"), ConfigError);
}

TEST_CASE("halving the damping leaves the fixed point unchanged") {
  const DiskGrid grid(32, 32);
  const ScalarField h(grid, 1.0);
  ContinuationOptions o;
  const DiskSolution a = solve_quasilinear_disk(h, wavy_phi(grid), make_signed_power(0.5), o);
  o.damping *= 0.5;
  const DiskSolution b = solve_quasilinear_disk(h, wavy_phi(grid), make_signed_power(0.5), o);
  CHECK(sup_diff(a.U, b.U) <= 10.0 * o.inner_tol);
}

TEST_CASE("odd nonlinearity is sign-equivariant") {
  const DiskGrid grid(32, 32);
  const ScalarField h(grid, 2.0);
  const BoundaryData phi = BoundaryData::from_function(default_trace_size(grid), [](double t) { return std::sin(t) + 0.3; });
  const DiskSolution a = solve_quasilinear_disk(h, phi, make_signed_power(0.5));
  const DiskSolution b = solve_quasilinear_disk(h, phi.negated(), make_signed_power(0.5));
  for (std::size_t k = 0; k < a.U.size(); ++k) CHECK(std::abs(a.U[k] + b.U[k]) < 1e-7);
}

TEST_CASE("pde residual for catalog nonlinearities") {
  const DiskGrid grid(128, 128);
  const ScalarField h = ScalarField::from_function(grid, [](cplx z) { return 1.0 + 0.25 * std::cos(z.imag()); });
  for (const Nonlinearity& f : {make_signed_power(0.5), make_exponential(0.1, -1, 10.0), make_exponential(0.1, 1, 10.0)}) {
    const DiskSolution s = solve_quasilinear_disk(h, wavy_phi(grid), f);
    ScalarField rhs(grid);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = h[k] * f(s.U[k]);
    CHECK(laplacian_residual(s.U, rhs) <= 1e-2);
    CHECK(s.report.final_g_norm <= s.report.apriori_bound + 1e-8);
  }
}

TEST_CASE("solver failure modes") {
  const DiskGrid grid(32, 32);
  // Envelope that understates the growth of f: the trust region must catch the blow-up.
  const Nonlinearity liar("understated", [](double u) { return 40.0 * u; }, [](double) { return 40.0; },
                          [](double s) { return std::sqrt(s); }, GrowthClass::sublinear);
  CHECK_THROWS_WITH_AS(solve_quasilinear_disk(ScalarField(grid, 1.0), constant_phi(grid, 1.0), liar),
                       doctest::Contains("a-priori bound violated at tau"), ConvergenceError);
  ContinuationOptions o;
  o.max_inner = 2;
  CHECK_THROWS_WITH_AS(solve_quasilinear_disk(ScalarField(grid, 1.0), constant_phi(grid, 1.0), make_power(0.5), o),
                       doctest::Contains("no convergence at tau"), ConvergenceError);
  o = {};
  o.damping = 1.5;
  CHECK_THROWS_AS(solve_quasilinear_disk(ScalarField(grid, 1.0), constant_phi(grid, 1.0), make_power(0.5), o), ConfigError);
  CHECK_THROWS_WITH(solve_quasilinear_disk(ScalarField(grid, 1.0), constant_phi(grid, 1.0),
                                           make_exponential(0.1, 1, std::numeric_limits<double>::infinity())),
                    "no a-priori bound");
}

TEST_CASE("dead core detection") {
  const DiskGrid grid(32, 32);
  const DeadCore none = detect_dead_core(ScalarField(grid, 1.0), 1e-6);
  CHECK(none.area == 0.0);
  CHECK(none.components == 0);
  CHECK_FALSE(none.contains_origin);
  const ScalarField bowl = ScalarField::from_function(grid, [](cplx z) { return std::max(0.0, std::abs(z) - 0.5); });
  const DeadCore core = detect_dead_core(bowl, 1e-9);
  CHECK(core.contains_origin);
  CHECK(core.components == 1);
  CHECK(core.radius == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("weak residual of exact solutions") {
  const JordanDomain disk = JordanDomain::disk(0.0, 1.0, 512);
  const MatrixFn I = [](cplx) { return SymMatrix2{}; };
  const FieldEval constant = [](std::span<const cplx> z, std::vector<double>& v, std::vector<cplx>& g) {
    v.assign(z.size(), 3.0);
    g.assign(z.size(), 0.0);
  };
  CHECK(weak_residual(disk, constant, I, make_zero(), 16, 1) < 1e-10);
  const FieldEval bowl = [](std::span<const cplx> z, std::vector<double>& v, std::vector<cplx>& g) {
    v.resize(z.size());
    g.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      v[k] = (std::norm(z[k]) - 1.0) / 4.0;
      g[k] = 0.5 * z[k];
    }
  };
  CHECK(weak_residual(disk, bowl, I, make_constant(1.0), 16, 1) <= 1e-2);
  // A wrong right-hand side is detected.
  CHECK(weak_residual(disk, bowl, I, make_constant(2.0), 16, 1) > 1e-2);
}

TEST_CASE("identity matrix pipeline agrees with the disk solver") {
  const JordanDomain disk = JordanDomain::disk(0.0, 1.0, 512);
  PipelineOptions o;
  o.beltrami.grid_n = 128;
  o.beltrami.inverse_n_r = 64;
  o.beltrami.inverse_n_theta = 64;
  const auto phi = [](double s) { return 1.0 + 0.5 * std::cos(2.0 * M_PI * s); };
  const SemilinearResult r = solve_semilinear(disk, [](cplx) { return SymMatrix2{}; }, phi, make_power(0.5), o);
  const DiskGrid grid(64, 64);
  const BoundaryData bd = BoundaryData::from_function(default_trace_size(grid), [](double t) { return 1.0 + 0.5 * std::cos(t); });
  const DiskSolution d = solve_quasilinear_disk(ScalarField(grid, 1.0), bd, make_power(0.5));
  const std::vector<cplx> pts{0.0, cplx(0.3, 0.2), cplx(-0.5, 0.4), cplx(0.1, -0.8), cplx(0.7, 0.0)};
  const auto ref = evaluate_representation(d.g, d.trace, d.phi, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) CHECK(std::abs(r.u.value(pts[k]) - ref[k].value) < 1e-3);
  CHECK(r.report.weak_residual >= 0.0);
  CHECK(r.report.weak_residual <= 5e-2);

  // Rotating the normalization leaves u unchanged.
  o.beltrami.rotation = 0.9;
  const SemilinearResult rot = solve_semilinear(disk, [](cplx) { return SymMatrix2{}; }, phi, make_power(0.5), o);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const cplx z = std::polar(0.9 * std::sqrt(u(rng)), 2.0 * M_PI * u(rng));
    CHECK(std::abs(r.u.value(z) - rot.u.value(z)) < 1e-3);
  }
}
