#include "semilin/semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "semilin/error.hpp"
#include "semilin/potential.hpp"

namespace semilin {

const char* scheme_name(IterationScheme s) {
  switch (s) {
    case IterationScheme::picard: return "picard";
    case IterationScheme::anderson: return "anderson";
    case IterationScheme::newton_krylov: return "newton_krylov";
  }
  return "unknown";
}

IterationScheme parse_scheme(const std::string& s) {
  if (s == "picard") return IterationScheme::picard;
  if (s == "anderson") return IterationScheme::anderson;
  if (s == "newton_krylov" || s == "newton") return IterationScheme::newton_krylov;
  throw ConfigError("unknown iteration scheme: " + s);
}

void SolveReport::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "converged = " << (converged ? "true" : "false") << "\n"
      << "nonlinearity = " << nonlinearity << "\n"
      << "scheme = " << scheme << "\n"
      << "p_used = " << format_double(p_used) << "\n"
      << "apriori_bound = " << format_double(apriori_bound) << "\n"
      << "M = " << format_double(M) << "\n"
      << "M_probe = " << format_double(M_probe) << "\n"
      << "h_norm = " << format_double(h_norm) << "\n"
      << "final_g_norm = " << format_double(final_g_norm) << "\n"
      << "representation_gap = " << format_double(representation_gap) << "\n"
      << "weak_residual = " << format_double(weak_residual) << "\n"
      << "laplacian_residual = " << format_double(laplacian_residual) << "\n"
      << "clamp_active = " << (clamp_active ? "true" : "false") << "\n"
      << "went_negative = " << (went_negative ? "true" : "false") << "\n"
      << "min_value = " << format_double(min_value) << "\n"
      << "tau_steps = " << tau_trace.size() << "\n";
}

void SolveReport::save_tau_trace(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "tau,iterations,residual,g_norm\n";
  for (const TauStep& s : tau_trace)
    out << format_double(s.tau) << ',' << s.iterations << ',' << format_double(s.residual) << ','
        << format_double(s.g_norm) << '\n';
}

namespace {

// Cell-area weights per node.
std::vector<double> node_weights(const DiskGrid& grid) {
  std::vector<double> w(grid.size());
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) w[grid.index(i, j)] = grid.cell_area(i);
  return w;
}

double lp(const std::vector<double>& v, const std::vector<double>& w, double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += std::pow(std::abs(v[k]), p) * w[k];
  return std::pow(s, 1.0 / p);
}

double dot(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k] * w[k];
  return s;
}

class FixedPoint {
 public:
  FixedPoint(const ScalarField& h, const BoundaryData& phi, const Nonlinearity& f, int m)
      : h_(h), f_(f), op_(PotentialOperator::shared(h.grid())), m_(m),
        pphi_(op_->harmonic_extension(phi)), w_(node_weights(h.grid())) {}

  const std::vector<double>& weights() const { return w_; }

  // S g = N_g - P_{N*g}.
  std::vector<double> S(const std::vector<double>& g) const {
    return op_->dirichlet_part(ScalarField(h_.grid(), g), m_).values();
  }

  std::vector<double> U(const std::vector<double>& g) const {
    std::vector<double> u = S(g);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += pphi_[k];
    return u;
  }

  std::vector<double> F(const std::vector<double>& U, double tau) const {
    std::vector<double> out(U.size());
    for (std::size_t k = 0; k < U.size(); ++k) out[k] = tau * h_[k] * f_(U[k]);
    return out;
  }

  std::vector<double> dF(const std::vector<double>& U, double tau) const {
    std::vector<double> out(U.size());
    for (std::size_t k = 0; k < U.size(); ++k) out[k] = tau * h_[k] * f_.derivative(U[k]);
    return out;
  }

 private:
  const ScalarField& h_;
  const Nonlinearity& f_;
  std::shared_ptr<const PotentialOperator> op_;
  int m_;
  ScalarField pphi_;
  std::vector<double> w_;
};

// Restarted GMRES in the weighted inner product; returns x with |A x - b| <= rtol |b|.
template <class Op>
std::vector<double> gmres(const Op& A, const std::vector<double>& b, const std::vector<double>& w, double rtol,
                          int restart, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  const double bnorm = std::sqrt(dot(b, b, w));
  if (bnorm == 0.0) return x;
  int total = 0;
  while (total < max_iter) {
    std::vector<double> r = b;
    if (total > 0) {
      const std::vector<double> Ax = A(x);
      for (std::size_t k = 0; k < n; ++k) r[k] -= Ax[k];
    }
    const double beta = std::sqrt(dot(r, r, w));
    if (beta <= rtol * bnorm) break;
    std::vector<std::vector<double>> V{r};
    for (double& v : V[0]) v /= beta;
    std::vector<std::vector<double>> H(restart + 1, std::vector<double>(restart, 0.0));
    std::vector<double> cs(restart), sn(restart), e(restart + 1, 0.0);
    e[0] = beta;
    int k = 0;
    while (k < restart && total < max_iter) {
      std::vector<double> v = A(V[k]);
      for (int i = 0; i <= k; ++i) {
        H[i][k] = dot(v, V[i], w);
        for (std::size_t q = 0; q < n; ++q) v[q] -= H[i][k] * V[i][q];
      }
      const double hn = std::sqrt(dot(v, v, w));
      H[k + 1][k] = hn;
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
        H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
        H[i][k] = t;
      }
      const double d = std::hypot(H[k][k], H[k + 1][k]);
      cs[k] = H[k][k] / d;
      sn[k] = H[k + 1][k] / d;
      H[k][k] = d;
      H[k + 1][k] = 0.0;
      e[k + 1] = -sn[k] * e[k];
      e[k] *= cs[k];
      ++k;
      ++total;
      if (std::abs(e[k]) <= rtol * bnorm || hn == 0.0) break;
      for (double& q : v) q /= hn;
      V.push_back(std::move(v));
    }
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = e[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
      y[i] = s / H[i][i];
    }
    for (int i = 0; i < k; ++i)
      for (std::size_t q = 0; q < n; ++q) x[q] += y[i] * V[i][q];
    if (std::abs(e[k]) <= rtol * bnorm) break;
  }
  return x;
}

// Small dense least squares min |r - D gamma| (weighted) via normal equations.
std::vector<double> lsq(const std::vector<std::vector<double>>& D, const std::vector<double>& r,
                        const std::vector<double>& w) {
  const int m = static_cast<int>(D.size());
  std::vector<std::vector<double>> G(m, std::vector<double>(m + 1));
  double scale = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) G[i][j] = dot(D[i], D[j], w);
    G[i][m] = dot(D[i], r, w);
    scale = std::max(scale, G[i][i]);
  }
  for (int i = 0; i < m; ++i) G[i][i] += 1e-12 * scale;
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int i = c + 1; i < m; ++i)
      if (std::abs(G[i][c]) > std::abs(G[piv][c])) piv = i;
    std::swap(G[c], G[piv]);
    if (G[c][c] == 0.0) return std::vector<double>(m, 0.0);
    for (int i = c + 1; i < m; ++i) {
      const double t = G[i][c] / G[c][c];
      for (int j = c; j <= m; ++j) G[i][j] -= t * G[c][j];
    }
  }
  std::vector<double> x(m);
  for (int i = m - 1; i >= 0; --i) {
    double s = G[i][m];
    for (int j = i + 1; j < m; ++j) s -= G[i][j] * x[j];
    x[i] = s / G[i][i];
  }
  return x;
}

std::string tau_label(double tau) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", tau);
  return buf;
}

}  // namespace

DiskSolution solve_quasilinear_disk(const ScalarField& h, const BoundaryData& phi, const Nonlinearity& f,
                                    const ContinuationOptions& opts) {
  if (opts.tau_steps < 1) throw ConfigError("tau_steps must be positive");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw ConfigError("damping must lie in (0,1]");
  if (!(opts.inner_tol > 0.0)) throw ConfigError("inner_tol must be positive");
  if (opts.max_inner < 1) throw ConfigError("max_inner must be positive");
  if (!(opts.p > 1.0)) throw ConfigError("p must exceed 1");
  if (!(opts.divergence_margin >= 1.0)) throw ConfigError("divergence_margin must be >= 1");
  if (opts.anderson_depth < 1) throw ConfigError("anderson_depth must be positive");

  const DiskGrid& grid = h.grid();
  const int m = default_trace_size(grid);
  FixedPoint fp(h, phi, f, m);
  const std::vector<double>& w = fp.weights();
  const double p = opts.p;

  SolveReport rep;
  rep.p_used = p;
  rep.scheme = scheme_name(opts.scheme);
  rep.nonlinearity = f.name();
  const NewtonBound nb = measure_newton_bound(grid, p, opts.probes, opts.seed);
  rep.M = nb.M;
  rep.M_probe = nb.M_probe;
  rep.h_norm = h.lp_norm(p);
  rep.apriori_bound = apriori_bound(f, rep.h_norm, rep.M, phi.sup_norm());
  const double limit = opts.divergence_margin * rep.apriori_bound;

  std::vector<double> g(grid.size(), 0.0);
  auto guard = [&](double gnorm, double tau) {
    if (gnorm > limit + opts.inner_tol)
      throw ConvergenceError("a-priori bound violated at tau = " + tau_label(tau) + " (||g|| = " +
                             format_double(gnorm) + ", B = " + format_double(rep.apriori_bound) + ")");
  };

  for (int step = 1; step <= opts.tau_steps; ++step) {
    const double tau = static_cast<double>(step) / opts.tau_steps;
    TauStep ts;
    ts.tau = tau;
    bool done = false;
    std::vector<std::vector<double>> dG, dR;
    std::vector<double> g_prev, r_prev;
    for (int it = 1; it <= opts.max_inner && !done; ++it) {
      const std::vector<double> U = fp.U(g);
      std::vector<double> gn;
      if (opts.scheme == IterationScheme::newton_krylov) {
        const std::vector<double> F = fp.F(U, tau);
        std::vector<double> R(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) R[k] = g[k] - F[k];
        const std::vector<double> D = fp.dF(U, tau);
        auto J = [&](const std::vector<double>& v) {
          std::vector<double> out = fp.S(v);
          for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] - D[k] * out[k];
          return out;
        };
        std::vector<double> rhs(R.size());
        for (std::size_t k = 0; k < R.size(); ++k) rhs[k] = -R[k];
        const std::vector<double> d = gmres(J, rhs, w, 1e-10, 60, 240);
        const double r0 = std::sqrt(dot(R, R, w));
        double t = 1.0;
        for (;;) {
          gn = g;
          for (std::size_t k = 0; k < g.size(); ++k) gn[k] += t * d[k];
          const std::vector<double> Ft = fp.F(fp.U(gn), tau);
          double rt = 0.0;
          for (std::size_t k = 0; k < g.size(); ++k) rt += (gn[k] - Ft[k]) * (gn[k] - Ft[k]) * w[k];
          if (std::sqrt(rt) <= (1.0 - 1e-4 * t) * r0 || t < 1.0 / 1024) break;
          t *= 0.5;
        }
      } else {
        const std::vector<double> F = fp.F(U, tau);
        std::vector<double> r(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) r[k] = opts.damping * (F[k] - g[k]);
        gn = g;
        for (std::size_t k = 0; k < g.size(); ++k) gn[k] += r[k];
        if (opts.scheme == IterationScheme::anderson) {
          if (!g_prev.empty()) {
            std::vector<double> a(g.size()), b(g.size());
            for (std::size_t k = 0; k < g.size(); ++k) {
              a[k] = g[k] - g_prev[k];
              b[k] = r[k] - r_prev[k];
            }
            dG.push_back(std::move(a));
            dR.push_back(std::move(b));
            if (static_cast<int>(dG.size()) > opts.anderson_depth) {
              dG.erase(dG.begin());
              dR.erase(dR.begin());
            }
            const std::vector<double> gamma = lsq(dR, r, w);
            for (std::size_t i = 0; i < gamma.size(); ++i)
              for (std::size_t k = 0; k < g.size(); ++k) gn[k] -= gamma[i] * (dG[i][k] + dR[i][k]);
          }
          g_prev = g;
          r_prev = r;
        }
      }
      std::vector<double> diff(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) diff[k] = gn[k] - g[k];
      ts.residual = lp(diff, w, p);
      ts.iterations = it;
      g.swap(gn);
      ts.g_norm = lp(g, w, p);
      guard(ts.g_norm, tau);
      done = ts.residual <= opts.inner_tol;
    }
    rep.tau_trace.push_back(ts);
    if (!done) throw ConvergenceError("no convergence at tau = " + tau_label(tau));
  }

  DiskSolution sol;
  ScalarField gf(grid, g);
  PoissonOptions po;
  po.consistency_tol = opts.consistency_tol;
  PoissonSolution ps = solve_poisson_dirichlet(gf, phi, po);
  sol.U = std::move(ps.U);
  sol.trace = std::move(ps.trace);
  sol.g = std::move(gf);
  sol.phi = phi;
  rep.representation_gap = ps.representation_gap;
  rep.final_g_norm = lp(g, w, p);
  rep.converged = true;
  rep.min_value = sol.U.min();
  rep.went_negative = f.positive_part() && rep.min_value < -opts.inner_tol;
  for (std::size_t k = 0; k < sol.U.size(); ++k)
    if (f.clamp_active(sol.U[k])) rep.clamp_active = true;
  if (grid.n_r() >= 32 && grid.n_theta() >= 32) {
    ScalarField rhs(grid);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = h[k] * f(sol.U[k]);
    rep.laplacian_residual = laplacian_residual(sol.U, rhs);
  }
  sol.report = rep;
  return sol;
}

Solution::Solution(QuasiconformalMap map, DiskSolution disk) : map_(std::move(map)), disk_(std::move(disk)) {}

void Solution::evaluate(std::span<const cplx> z, std::vector<double>& values, std::vector<cplx>& gradients) const {
  std::vector<cplx> w(z.size()), wx(z.size()), wy(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    w[k] = map_.forward(z[k], wx[k], wy[k]);
    // Points mapped a hair outside the disk by interpolation are pulled back onto it.
    const double a = std::abs(w[k]);
    if (a > 1.0) w[k] /= a;
  }
  const std::vector<RepresentationSample> s = evaluate_representation(disk_.g, disk_.trace, disk_.phi, w);
  values.resize(z.size());
  gradients.resize(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    values[k] = s[k].value;
    gradients[k] = cplx(2.0 * (s[k].dz * wx[k]).real(), 2.0 * (s[k].dz * wy[k]).real());
  }
}

double Solution::value(cplx z) const {
  std::vector<double> v;
  std::vector<cplx> g;
  evaluate(std::span<const cplx>(&z, 1), v, g);
  return v[0];
}

cplx Solution::gradient(cplx z) const {
  std::vector<double> v;
  std::vector<cplx> g;
  evaluate(std::span<const cplx>(&z, 1), v, g);
  return g[0];
}

SemilinearResult solve_semilinear(const JordanDomain& domain, const MatrixFn& A,
                                  const std::function<double(double)>& phi, const Nonlinearity& f,
                                  const PipelineOptions& opts) {
  if (!is_valid_boundary_size(opts.boundary_samples))
    throw ConfigError("boundary_samples must be >= 16 and a power of two");
  QuasiconformalMap map = solve_beltrami(domain, dilatation_of(A), opts.beltrami);
  const ScalarField J = jacobian_inverse(map);
  const JacobianIntegrability integ = select_jacobian_p(map, opts.continuation.p);
  const BoundaryData psi = BoundaryData::from_function(
      opts.boundary_samples, [&](double t) { return phi(map.boundary_parameter(t)); });
  ContinuationOptions co = opts.continuation;
  co.p = integ.p;
  DiskSolution disk = solve_quasilinear_disk(J, psi, f, co);
  SolveReport rep = disk.report;
  Solution u(std::move(map), std::move(disk));
  if (opts.weak_trials > 0)
    rep.weak_residual = weak_residual(u, domain, A, f, opts.weak_trials, co.seed, opts.weak_quadrature);
  return {std::move(u), rep};
}

SemilinearResult solve_semilinear(const JordanDomain& domain, const MatrixField& A, const BoundaryData& phi,
                                  const Nonlinearity& f, const PipelineOptions& opts) {
  return solve_semilinear(
      domain, [&A](cplx z) { return A.evaluate(z); }, [&phi](double s) { return phi.evaluate(2.0 * kPi * s); },
      f, opts);
}

namespace {

double bump(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }
double bump_d(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return bump(t) * (-2.0 * t / (s * s));
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

double weak_residual(const JordanDomain& domain, const FieldEval& u, const MatrixFn& A, const Nonlinearity& f,
                     int trials, std::uint64_t seed, int quadrature) {
  if (trials < 1 || quadrature < 4) throw ConfigError("weak residual needs trials >= 1 and quadrature >= 4");
  std::mt19937_64 rng(seed);
  const cplx lo = domain.bbox_lo(), hi = domain.bbox_hi();
  const double dmin = 0.05 * domain.diameter();
  double worst = 0.0;
  std::vector<cplx> pts(static_cast<std::size_t>(quadrature) * quadrature);
  std::vector<double> vals;
  std::vector<cplx> grads;
  for (int t = 0; t < trials; ++t) {
    cplx c;
    double d = 0.0;
    for (int tries = 0;; ++tries) {
      if (tries > 100000) throw Error("no room for trial functions");
      c = cplx(lo.real() + uniform01(rng) * (hi.real() - lo.real()), lo.imag() + uniform01(rng) * (hi.imag() - lo.imag()));
      if (!domain.contains(c)) continue;
      d = domain.distance(c);
      if (d > dmin) break;
    }
    const double rho = d / std::sqrt(2.0) * (0.3 + 0.6 * uniform01(rng));
    const double hq = 2.0 * rho / quadrature;
    for (int b = 0; b < quadrature; ++b)
      for (int a = 0; a < quadrature; ++a)
        pts[static_cast<std::size_t>(b) * quadrature + a] =
            c + cplx(-rho + (a + 0.5) * hq, -rho + (b + 0.5) * hq);
    u(pts, vals, grads);
    double form = 0.0, norm2 = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double x = (pts[k].real() - c.real()) / rho, y = (pts[k].imag() - c.imag()) / rho;
      const double bx = bump(x), by = bump(y);
      const double eta = bx * by;
      const double ex = bump_d(x) * by / rho, ey = bx * bump_d(y) / rho;
      const SymMatrix2 M = A(pts[k]);
      const double gx = grads[k].real(), gy = grads[k].imag();
      form += (M.a11 * gx + M.a12 * gy) * ex + (M.a12 * gx + M.a22 * gy) * ey + f(vals[k]) * eta;
      norm2 += eta * eta + ex * ex + ey * ey;
    }
    const double area = hq * hq;
    worst = std::max(worst, std::abs(form * area) / std::sqrt(norm2 * area));
  }
  return worst;
}

double weak_residual(const Solution& u, const JordanDomain& domain, const MatrixFn& A, const Nonlinearity& f,
                     int trials, std::uint64_t seed, int quadrature) {
  return weak_residual(
      domain,
      [&u](std::span<const cplx> z, std::vector<double>& v, std::vector<cplx>& g) { u.evaluate(z, v, g); }, A, f,
      trials, seed, quadrature);
}

DeadCore detect_dead_core(const ScalarField& u, double eps) {
  const DiskGrid& g = u.grid();
  const int nr = g.n_r(), nt = g.n_theta();
  DeadCore dc;
  dc.mask.assign(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k) dc.mask[k] = std::abs(u[k]) <= eps;
  std::vector<int> label(g.size(), -1);
  std::vector<double> comp_area;
  int origin_label = -1;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (!dc.mask[s] || label[s] >= 0) continue;
    const int id = static_cast<int>(comp_area.size());
    comp_area.push_back(0.0);
    std::vector<std::size_t> stack{s};
    label[s] = id;
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const int i = static_cast<int>(k) / nt, j = static_cast<int>(k) % nt;
      comp_area[id] += g.cell_area(i);
      if (i == 0) origin_label = id;
      auto visit = [&](int a, int b) {
        const std::size_t q = g.index(a, ((b % nt) + nt) % nt);
        if (dc.mask[q] && label[q] < 0) {
          label[q] = id;
          stack.push_back(q);
        }
      };
      visit(i, j - 1);
      visit(i, j + 1);
      if (i + 1 < nr) visit(i + 1, j);
      if (i > 0) visit(i - 1, j);
      else visit(0, j + nt / 2);
    }
  }
  dc.components = static_cast<int>(comp_area.size());
  for (double a : comp_area) dc.area += a;
  dc.contains_origin = origin_label >= 0;
  if (dc.contains_origin) dc.radius = std::sqrt(comp_area[origin_label] / kPi);
  return dc;
}

}  // namespace semilin
