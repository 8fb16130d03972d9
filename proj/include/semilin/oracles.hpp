#pragma once

#include <string>
#include <vector>

#include "semilin/beltrami.hpp"
#include "semilin/nonlinearity.hpp"

namespace semilin {

struct RadialProfile {
  std::vector<double> r, values, slopes;
  double derivative_at_0 = 0.0;
  double center_value = 0.0;
  double dead_core_radius = 0.0;  // u vanishes identically on [0, dead_core_radius]
  double boundary_residual = 0.0;

  // Cubic Hermite interpolation between samples.
  double operator()(double radius) const;
  // First radius where u exceeds eps.
  double threshold_radius(double eps) const;
  void save_csv(const std::string& path) const;
};

struct ShootOptions {
  int steps = 4000;
  double tol = 1e-10;
  int max_bisections = 200;
};

// u'' + u'/r = lambda f(u), u'(0) = 0, u(1) = boundary_value.
RadialProfile radial_shoot(const Nonlinearity& f, double lambda, double boundary_value, const ShootOptions& opts = {});
RadialProfile radial_shoot(const Nonlinearity& f, double lambda, double boundary_value, double tol);

struct RadialStretch {
  double K = 1.0;
  double k() const { return (K - 1.0) / (K + 1.0); }
  cplx mu(cplx z) const;
  cplx omega(cplx z) const;
  cplx omega_inverse(cplx w) const;
  double jacobian_inverse(cplx w) const;
  SymMatrix2 matrix(cplx z) const;
  BeltramiField sample(const CartesianGrid& grid) const;
};

RadialStretch radial_stretch_reference(double K);

// Newtonian potential of the unit disk indicator.
double uniform_disk_potential(cplx z);

}  // namespace semilin
