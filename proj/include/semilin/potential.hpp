#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "semilin/fields.hpp"

namespace semilin {

// ln |(1 - z conj(w)) / (z - w)|.
double green_function(cplx z, cplx w);
// (1 - |z|^2) / |1 - z e^{-it}|^2.
double poisson_kernel(cplx z, double t);

// Densities are read as trigonometric interpolants in theta and constants on each
// radial cell; potentials of that density are integrated exactly mode by mode.
class PotentialOperator {
 public:
  explicit PotentialOperator(const DiskGrid& grid);
  static std::shared_ptr<const PotentialOperator> shared(const DiskGrid& grid);

  const DiskGrid& grid() const { return grid_; }
  int modes() const { return n_modes_; }

  // Ring spectra X[i * n_theta + k] = (1/n_theta) sum_j g_ij e^{-i k theta_j}.
  std::vector<cplx> spectrum(const ScalarField& g) const;

  ScalarField newtonian(const ScalarField& g) const;
  std::vector<double> newtonian(const ScalarField& g, std::span<const cplx> targets) const;
  // dN/dz at the targets.
  std::vector<cplx> newtonian_gradient(const ScalarField& g, std::span<const cplx> targets) const;

  // Green potential (1/2 pi) int G(z, w) g(w) dm(w).
  ScalarField green(const ScalarField& g) const;
  std::vector<double> green(const ScalarField& g, std::span<const cplx> targets) const;

  // N_g at t_j = 2 pi j / m.
  BoundaryData trace(const ScalarField& g, int m) const;

  // Harmonic extension of the trigonometric interpolant of phi to the grid nodes.
  ScalarField harmonic_extension(const BoundaryData& phi) const;

  // N_g - P_{N*g} on the grid with an m-point trace.
  ScalarField dirichlet_part(const ScalarField& g, int m) const;

  // Smallest M with max |N_g| <= M ||g||_p over all grid nodes and the grid-aligned
  // circle points, for every density on this grid.
  double newton_bound(double p) const;

 private:
  void grid_apply(const std::vector<cplx>& X, const std::vector<double>& mats,
                  std::vector<double>& out) const;
  // Kernel rows R[k * n_r + i] = I_k(r; cell i) (and d/dr when dR is given).
  void kernel_rows(double r, std::vector<double>& R, std::vector<double>* dR) const;

  DiskGrid grid_;
  int n_modes_ = 0;  // K + 1 distinct |k|
  std::vector<double> W_;      // [k][target ring][source ring]
  std::vector<double> moment_;  // [k][ring] = int_a^b rho^{k+1} d rho
};

std::vector<double> poisson_integral(const BoundaryData& phi, std::span<const cplx> targets);
// Trapezoid rule over the m boundary samples; runs on the SIMD kernel table.
std::vector<double> poisson_integral_trapezoid(const BoundaryData& phi, std::span<const cplx> targets);
ScalarField poisson_integral(const BoundaryData& phi, const DiskGrid& grid);
// dP_phi/dz.
std::vector<cplx> poisson_gradient(const BoundaryData& phi, std::span<const cplx> targets);

ScalarField green_potential(const ScalarField& g);
std::vector<double> green_potential(const ScalarField& g, std::span<const cplx> targets);
ScalarField newtonian_potential(const ScalarField& g);
std::vector<double> newtonian_potential(const ScalarField& g, std::span<const cplx> targets);
std::vector<cplx> newtonian_gradient(const ScalarField& g, std::span<const cplx> targets);
// m = 0 picks the smallest admissible size >= n_theta.
BoundaryData boundary_trace(const ScalarField& g, int m = 0);
int default_trace_size(const DiskGrid& grid);

struct PoissonOptions {
  double consistency_tol = 1e-3;
};

struct PoissonSolution {
  ScalarField U;
  BoundaryData trace;
  double representation_gap = 0.0;
};

// U = N_g - P_{N*g} + P_phi, checked against P_phi - G_g.
PoissonSolution solve_poisson_dirichlet(const ScalarField& g, const BoundaryData& phi,
                                        const PoissonOptions& opts = {});

// Off-grid value and dz-derivative of N_g - P_trace + P_phi.
struct RepresentationSample {
  double value;
  cplx dz;
};
std::vector<RepresentationSample> evaluate_representation(const ScalarField& g,
                                                          const BoundaryData& trace,
                                                          const BoundaryData& phi,
                                                          std::span<const cplx> targets);

// max |Delta_h U - g| over rings 2 .. n_r - 3 with the 5-point polar stencil.
double laplacian_residual(const ScalarField& U, const ScalarField& g);

// Cell averages of 1 / (t^2 (1 - ln t)^alpha), t = |z|.
ScalarField prop2_density(double alpha, const DiskGrid& grid);

struct NewtonBound {
  double p = 2.0;
  double M = 0.0;        // exact discrete operator bound
  double M_probe = 0.0;  // max ratio over the probe densities
  int probes = 0;
};

// Random smooth density (a few low modes with random radial polynomials).
ScalarField random_smooth_density(const DiskGrid& grid, std::uint64_t seed);
// max over grid nodes and circle points of |N_g| divided by ||g||_p.
double newton_ratio(const ScalarField& g, double p);
NewtonBound measure_newton_bound(const DiskGrid& grid, double p, int probes, std::uint64_t seed);

}  // namespace semilin
