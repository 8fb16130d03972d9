#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semilin/fields.hpp"

namespace semilin {

struct SymMatrix2 {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;
  double det() const { return a11 * a22 - a12 * a12; }
};

struct MatrixField {
  CartesianGrid grid;
  std::vector<SymMatrix2> values;
  double K = 1.0;

  void save_csv(const std::string& path) const;
  static MatrixField load_csv(const std::string& path);
  // Bilinear interpolation between nodes.
  SymMatrix2 evaluate(cplx z) const;
};

struct BeltramiField {
  CartesianGrid grid;
  std::vector<cplx> mu;
  double k_bound = 0.0;

  static BeltramiField sample(const CartesianGrid& grid, const std::function<cplx(cplx)>& fn);
  double sup_norm() const;
  cplx evaluate(cplx z) const;
  void save_csv(const std::string& path) const;
};

using DilatationFn = std::function<cplx(cplx)>;
using MatrixFn = std::function<SymMatrix2(cplx)>;

// mu = (a22 - a11 - 2i a12) / det(I + A).
cplx matrix_to_mu(const SymMatrix2& A);
// Inverse map; det A = 1.
SymMatrix2 mu_to_matrix(cplx mu);
BeltramiField matrix_to_mu(const MatrixField& A);
MatrixField mu_to_matrix(const BeltramiField& mu);
DilatationFn dilatation_of(MatrixFn A);

struct EllipticityReport {
  double K_measured = 1.0;
  std::size_t worst_node = 0;
  double max_det_error = 0.0;
  bool passes = true;
};
EllipticityReport ellipticity_check(const MatrixField& A, double det_tol = 1e-10);

struct BeltramiOptions {
  int grid_n = 256;           // Cartesian nodes per side
  double k_max = 0.5;
  double smoothing = 1.5;     // erf width of the support layer outside the domain, in cells
  double margin = 0.1;
  int max_neumann = 400;
  double neumann_tol = 1e-13;
  int boundary_samples = 1024;
  int theodorsen_max = 500;
  double theodorsen_tol = 1e-13;
  double rotation = 0.0;      // omega(mark) = e^{i rotation}
  std::optional<cplx> center;  // omega(center) = 0
  std::optional<cplx> mark;
  int inverse_n_r = 128;
  int inverse_n_theta = 128;
};

class QuasiconformalMap {
 public:
  const CartesianGrid& grid() const { return grid_; }
  const std::vector<cplx>& forward_samples() const { return fwd_; }
  const std::vector<cplx>& plane_samples() const { return plane_; }
  const std::vector<cplx>& dilatation_samples() const { return mu_; }
  const std::vector<std::uint8_t>& inside() const { return inside_; }
  // |w_z|^2 - |w_zbar|^2 at the forward samples, from the spectral derivatives of the plane map.
  const std::vector<double>& jacobian_samples() const { return jac_; }
  // Bicubic interpolant of the forward Jacobian.
  double forward_jacobian(cplx z) const;

  cplx forward(cplx z) const;
  // Value and the partials d omega/dx, d omega/dy of the bicubic interpolant.
  cplx forward(cplx z, cplx& wx, cplx& wy) const;
  // Newton on the interpolated forward map; seed defaults to the nearest sample.
  cplx inverse(cplx w) const;
  cplx inverse(cplx w, cplx seed, bool* ok) const;

  bool has_inverse() const { return !inv_.empty(); }
  const DiskGrid& disk() const { return disk_; }
  const std::vector<cplx>& inverse_samples() const { return inv_; }

  // Boundary parameter s of omega^{-1}(e^{it}) on the domain curve.
  double boundary_parameter(double t) const;

  cplx center() const { return center_; }
  cplx mark() const { return mark_; }
  double rotation() const { return rotation_; }
  int neumann_iterations() const { return neumann_iters_; }
  int theodorsen_iterations() const { return theo_iters_; }
  double k_measured() const { return k_measured_; }

 private:
  friend QuasiconformalMap solve_beltrami(const JordanDomain&, const DilatationFn&,
                                          const BeltramiOptions&);
  friend QuasiconformalMap invert_map(QuasiconformalMap, const DiskGrid&);

  cplx stage2_inverse(cplx zeta, bool* ok) const;
  cplx stage2(cplx w, cplx* dw) const;
  double theta_inverse_param(double theta) const;
  std::size_t nearest_sample(cplx w) const;

  CartesianGrid grid_;
  std::vector<cplx> fwd_, plane_, mu_;
  std::vector<double> jac_;
  std::vector<std::uint8_t> inside_, valid_;
  cplx center_{}, mark_{1.0, 0.0};
  double rotation_ = 0.0;
  double gamma_ = 0.0;  // omega = e^{-i gamma} F0^{-1}(plane)
  int neumann_iters_ = 0, theo_iters_ = 0;
  double k_measured_ = 0.0;

  // Stage 2: F0(w) = c + w exp(G(w)), G = sum a_k w^k.
  cplx c_{};
  std::vector<cplx> a_;
  std::vector<double> theta_t_;  // unwrapped boundary angle theta(t_j)
  // Image boundary angle Theta(s) = Theta0 + 2 pi s + periodic spline.
  double theta0_ = 0.0;
  std::vector<double> theta_per_, theta_per_m2_;
  std::vector<double> logrho_, logrho_m2_;

  // Bucket index over forward samples for seeding inverses.
  int bucket_n_ = 0;
  std::vector<std::uint32_t> bucket_start_, bucket_items_;

  DiskGrid disk_;
  std::vector<cplx> inv_;
};

QuasiconformalMap solve_beltrami(const JordanDomain& domain, const DilatationFn& mu,
                                 const BeltramiOptions& opts = {});
QuasiconformalMap solve_beltrami_disk(const DilatationFn& mu, const BeltramiOptions& opts = {});
QuasiconformalMap solve_beltrami_disk(const BeltramiField& mu, const BeltramiOptions& opts = {});

QuasiconformalMap invert_map(QuasiconformalMap map, const DiskGrid& grid);
ScalarField jacobian_inverse(const QuasiconformalMap& map);

struct JacobianIntegrability {
  double p = 0.0;
  double norm = 0.0;
  double coarse_norm = 0.0;
};
// First p from {preferred, 1.75, 1.5, 1.25, 1.1} (not above preferred) whose L^p norm of J
// agrees within tol with the one from an inversion at half the resolution.
JacobianIntegrability select_jacobian_p(const QuasiconformalMap& map, double preferred, double tol = 0.02);

// Area-weighted L2 norm of omega_zbar - mu omega_z from centred differences of the forward
// samples, over nodes within `radius` of the map centre.
double beltrami_residual(const QuasiconformalMap& map, const DilatationFn& mu, double radius);

// max |S[dbar phi] - d phi| for a Gaussian phi on an n x n grid.
double beurling_self_test(int n = 128);

}  // namespace semilin
