#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semilin/beltrami.hpp"
#include "semilin/fields.hpp"
#include "semilin/nonlinearity.hpp"

namespace semilin {

enum class IterationScheme { picard, anderson, newton_krylov };

const char* scheme_name(IterationScheme s);
IterationScheme parse_scheme(const std::string& s);

struct ContinuationOptions {
  int tau_steps = 10;
  double damping = 0.5;
  double inner_tol = 1e-8;  // on ||g_{k+1} - g_k||_p
  int max_inner = 500;
  double p = 2.0;
  double divergence_margin = 2.0;
  IterationScheme scheme = IterationScheme::picard;
  int anderson_depth = 3;
  int probes = 32;  // random densities reported next to the exact bound M
  std::uint64_t seed = 1;
  double consistency_tol = 1e-3;
};

struct TauStep {
  double tau = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double g_norm = 0.0;
};

struct SolveReport {
  bool converged = false;
  std::vector<TauStep> tau_trace;
  double apriori_bound = 0.0;
  double M = 0.0;
  double M_probe = 0.0;
  double h_norm = 0.0;
  double final_g_norm = 0.0;
  double representation_gap = 0.0;
  double weak_residual = -1.0;  // negative when not evaluated
  double laplacian_residual = -1.0;
  double p_used = 2.0;
  bool clamp_active = false;
  bool went_negative = false;  // positive-part nonlinearity saw u < 0
  double min_value = 0.0;
  std::string scheme;
  std::string nonlinearity;

  void save(const std::string& path) const;
  void save_tau_trace(const std::string& path) const;
};

struct DiskSolution {
  ScalarField U;
  ScalarField g;
  BoundaryData trace;  // N_g on the circle
  BoundaryData phi;
  SolveReport report;
};

// Delta U = h f(U) in the unit disk with U = phi on the circle.
DiskSolution solve_quasilinear_disk(const ScalarField& h, const BoundaryData& phi, const Nonlinearity& f,
                                    const ContinuationOptions& opts = {});

// u = U o omega on a Jordan domain.
class Solution {
 public:
  Solution(QuasiconformalMap map, DiskSolution disk);

  double value(cplx z) const;
  // (u_x, u_y) packed as u_x + i u_y.
  cplx gradient(cplx z) const;
  void evaluate(std::span<const cplx> z, std::vector<double>& values, std::vector<cplx>& gradients) const;

  const QuasiconformalMap& map() const { return map_; }
  const DiskSolution& disk() const { return disk_; }

 private:
  QuasiconformalMap map_;
  DiskSolution disk_;
};

struct PipelineOptions {
  BeltramiOptions beltrami;
  ContinuationOptions continuation;
  int boundary_samples = 256;  // circle nodes for psi = phi o omega^{-1}
  int weak_trials = 16;
  int weak_quadrature = 48;
};

struct SemilinearResult {
  Solution u;
  SolveReport report;
};

// Boundary data phi is a function of the curve parameter s in [0, 1).
SemilinearResult solve_semilinear(const JordanDomain& domain, const MatrixFn& A,
                                  const std::function<double(double)>& phi, const Nonlinearity& f,
                                  const PipelineOptions& opts = {});
SemilinearResult solve_semilinear(const JordanDomain& domain, const MatrixField& A, const BoundaryData& phi,
                                  const Nonlinearity& f, const PipelineOptions& opts = {});

// max over bump trials of |int <A grad u, grad eta> + f(u) eta| / ||eta||_{W^{1,2}}.
using FieldEval = std::function<void(std::span<const cplx>, std::vector<double>&, std::vector<cplx>&)>;
double weak_residual(const JordanDomain& domain, const FieldEval& u, const MatrixFn& A, const Nonlinearity& f,
                     int trials, std::uint64_t seed, int quadrature = 48);
double weak_residual(const Solution& u, const JordanDomain& domain, const MatrixFn& A, const Nonlinearity& f,
                     int trials, std::uint64_t seed, int quadrature = 48);

struct DeadCore {
  std::vector<std::uint8_t> mask;
  int components = 0;
  double area = 0.0;
  bool contains_origin = false;
  double radius = 0.0;  // sqrt(area / pi) of the component through the origin
};
DeadCore detect_dead_core(const ScalarField& u, double eps);

}  // namespace semilin
