#include "semilin/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include "semilin/error.hpp"
#include "semilin/fft.hpp"
#include "semilin/simd/kernels.hpp"

namespace semilin {

double green_function(cplx z, cplx w) {
  if (z == w) throw Error("kernel diagonal");
  return std::log(std::abs((1.0 - z * std::conj(w)) / (z - w)));
}

double poisson_kernel(cplx z, double t) {
  if (std::abs(z) >= 1.0) throw Error("exterior evaluation");
  return (1.0 - std::norm(z)) / std::norm(1.0 - z * std::polar(1.0, -t));
}

namespace {

double F0(double x) { return x > 0.0 ? 0.5 * x * x * std::log(x) - 0.25 * x * x : 0.0; }

// I[k*stride] = int_a^b kappa_k(r, rho) rho d rho, kappa_0 = ln max(r, rho),
// kappa_k = -(1/2k) (r_< / r_>)^k; dI is d/dr.
void cell_kernel(double r, double a, double b, int K, double* I, double* dI, std::size_t stride) {
  if (r == 0.0) {
    I[0] = F0(b) - F0(a);
    if (dI) dI[0] = 0.0;
    for (int k = 1; k <= K; ++k) {
      I[k * stride] = 0.0;
      if (dI) dI[k * stride] = 0.0;
    }
    return;
  }
  const bool lower = a < r, upper = r < b;
  const double c1 = std::min(b, r), c2 = std::max(a, r);
  double i0 = 0.0, d0 = 0.0;
  if (lower) {
    i0 += std::log(r) * 0.5 * (c1 * c1 - a * a);
    d0 += 0.5 * (c1 * c1 - a * a) / r;
  }
  if (upper) i0 += F0(b) - F0(c2);
  I[0] = i0;
  if (dI) dI[0] = d0;

  const double p = lower ? c1 / r : 0.0;
  const double ar = lower ? a / c1 : 0.0;
  const double qr = upper ? r / c2 : 0.0;
  const double cb = upper ? c2 / b : 0.0;
  const double lnbc = upper ? std::log(b / c2) : 0.0;
  double pk = 1.0, ak = ar * ar;
  double qk = 1.0, cbk = upper ? b / c2 : 0.0;
  for (int k = 1; k <= K; ++k) {
    double ain = 0.0, aout = 0.0;
    if (lower) {
      pk *= p;
      ak *= ar;
      ain = c1 * c1 * pk * (1.0 - ak) / (k + 2);
    }
    if (upper) {
      qk *= qr;
      if (k == 2)
        aout = r * r * lnbc;
      else
        aout = c2 * c2 * qk * (1.0 - cbk) / (k - 2);
      cbk *= cb;
    }
    I[k * stride] = -(ain + aout) / (2.0 * k);
    if (dI) dI[k * stride] = (ain - aout) / (2.0 * r);
  }
}

int signed_bin(int k, int n) { return 2 * k <= n ? k : k - n; }

}  // namespace

PotentialOperator::PotentialOperator(const DiskGrid& grid) : grid_(grid) {
  const int nr = grid.n_r(), n = grid.n_theta();
  n_modes_ = n / 2 + 1;
  const int K = n_modes_ - 1;
  W_.assign(static_cast<std::size_t>(n_modes_) * nr * nr, 0.0);
  std::vector<double> R;
  for (int i = 0; i < nr; ++i) {
    kernel_rows(grid.radius(i), R, nullptr);
    for (int k = 0; k <= K; ++k)
      for (int s = 0; s < nr; ++s)
        W_[(static_cast<std::size_t>(k) * nr + i) * nr + s] = R[static_cast<std::size_t>(k) * nr + s];
  }
  moment_.assign(static_cast<std::size_t>(n_modes_) * nr, 0.0);
  for (int s = 0; s < nr; ++s) {
    const double a = grid.inner_edge(s), b = grid.outer_edge(s);
    const double ab = a / b;
    double bk = b * b, abk = ab * ab;  // b^{k+2}, (a/b)^{k+2}
    for (int k = 0; k <= K; ++k) {
      moment_[static_cast<std::size_t>(k) * nr + s] = bk * (1.0 - abk) / (k + 2);
      bk *= b;
      abk *= ab;
    }
  }
}

std::shared_ptr<const PotentialOperator> PotentialOperator::shared(const DiskGrid& grid) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const PotentialOperator>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(grid.n_r(), grid.n_theta());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (cache.size() >= 8) cache.clear();
  auto op = std::make_shared<const PotentialOperator>(grid);
  cache.emplace(key, op);
  return op;
}

void PotentialOperator::kernel_rows(double r, std::vector<double>& R, std::vector<double>* dR) const {
  const int nr = grid_.n_r(), K = n_modes_ - 1;
  R.assign(static_cast<std::size_t>(n_modes_) * nr, 0.0);
  if (dR) dR->assign(R.size(), 0.0);
  for (int s = 0; s < nr; ++s)
    cell_kernel(r, grid_.inner_edge(s), grid_.outer_edge(s), K, R.data() + s,
                dR ? dR->data() + s : nullptr, nr);
}

std::vector<cplx> PotentialOperator::spectrum(const ScalarField& g) const {
  if (!(g.grid() == grid_)) throw Error("density grid does not match operator grid");
  const int n = grid_.n_theta();
  std::vector<cplx> X(g.values().begin(), g.values().end());
  fft::forward(X.data(), n, grid_.n_r());
  const double inv = 1.0 / n;
  for (cplx& x : X) x *= inv;
  return X;
}

void PotentialOperator::grid_apply(const std::vector<cplx>& X, const std::vector<double>& mats,
                                   std::vector<double>& out) const {
  const int nr = grid_.n_r(), n = grid_.n_theta();
  const auto& kern = simd::active();
  std::vector<cplx> Y(X.size()), x(nr), y(nr);
  for (int k = 0; k < n; ++k) {
    const int kk = std::abs(signed_bin(k, n));
    for (int i = 0; i < nr; ++i) x[i] = X[static_cast<std::size_t>(i) * n + k];
    kern.ring_matvec(mats.data() + static_cast<std::size_t>(kk) * nr * nr, nr, nr, x.data(), y.data());
    for (int i = 0; i < nr; ++i) Y[static_cast<std::size_t>(i) * n + k] = y[i];
  }
  fft::backward(Y.data(), n, nr);
  out.resize(Y.size());
  for (std::size_t q = 0; q < Y.size(); ++q) out[q] = Y[q].real();
}

ScalarField PotentialOperator::newtonian(const ScalarField& g) const {
  std::vector<double> out;
  grid_apply(spectrum(g), W_, out);
  return ScalarField(grid_, std::move(out));
}

namespace {

// Sum over spectral bins of a real trigonometric series at angle theta; the Nyquist bin
// contributes its cosine.
double synthesize(const std::vector<cplx>& v, double theta) {
  const int n = static_cast<int>(v.size());
  double s = v[0].real();
  for (int k = 1; k < n; ++k) {
    const int kb = signed_bin(k, n);
    if (2 * k == n)
      s += v[k].real() * std::cos(kb * theta);
    else
      s += (v[k] * std::polar(1.0, kb * theta)).real();
  }
  return s;
}

}  // namespace

std::vector<double> PotentialOperator::newtonian(const ScalarField& g,
                                                 std::span<const cplx> targets) const {
  const std::vector<cplx> X = spectrum(g);
  const int nr = grid_.n_r(), n = grid_.n_theta();
  std::vector<double> out(targets.size());
  std::vector<double> R;
  std::vector<cplx> v(n);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double r = std::abs(targets[t]);
    kernel_rows(r, R, nullptr);
    for (int k = 0; k < n; ++k) {
      const double* row = R.data() + static_cast<std::size_t>(std::abs(signed_bin(k, n))) * nr;
      cplx s = 0.0;
      for (int i = 0; i < nr; ++i) s += row[i] * X[static_cast<std::size_t>(i) * n + k];
      v[k] = s;
    }
    out[t] = synthesize(v, std::arg(targets[t]));
  }
  return out;
}

std::vector<cplx> PotentialOperator::newtonian_gradient(const ScalarField& g,
                                                        std::span<const cplx> targets) const {
  const std::vector<cplx> X = spectrum(g);
  const int nr = grid_.n_r(), n = grid_.n_theta();
  std::vector<cplx> out(targets.size());
  std::vector<double> R, dR;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double r = std::max(std::abs(targets[t]), 1e-12);
    const double th = std::arg(targets[t]);
    kernel_rows(r, R, &dR);
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const int kb = signed_bin(k, n);
      const std::size_t off = static_cast<std::size_t>(std::abs(kb)) * nr;
      cplx N = 0.0, dN = 0.0;
      for (int i = 0; i < nr; ++i) {
        const cplx x = X[static_cast<std::size_t>(i) * n + k];
        N += R[off + i] * x;
        dN += dR[off + i] * x;
      }
      if (2 * k == n) {
        for (int sgn : {1, -1}) {
          const int ks = sgn * kb;
          acc += 0.25 * std::polar(1.0, (ks - 1) * th) * (dN + (static_cast<double>(ks) / r) * N);
        }
      } else {
        acc += 0.5 * std::polar(1.0, (kb - 1) * th) * (dN + (static_cast<double>(kb) / r) * N);
      }
    }
    out[t] = acc;
  }
  return out;
}

ScalarField PotentialOperator::green(const ScalarField& g) const {
  const std::vector<cplx> X = spectrum(g);
  const int nr = grid_.n_r(), n = grid_.n_theta();
  std::vector<double> N;
  grid_apply(X, W_, N);
  std::vector<cplx> Y(X.size());
  for (int k = 0; k < n; ++k) {
    const int kk = std::abs(signed_bin(k, n));
    if (kk == 0) continue;
    cplx m = 0.0;
    for (int s = 0; s < nr; ++s)
      m += moment_[static_cast<std::size_t>(kk) * nr + s] * X[static_cast<std::size_t>(s) * n + k];
    for (int i = 0; i < nr; ++i)
      Y[static_cast<std::size_t>(i) * n + k] = -std::pow(grid_.radius(i), kk) / (2.0 * kk) * m;
  }
  fft::backward(Y.data(), n, nr);
  std::vector<double> out(X.size());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = Y[q].real() - N[q];
  return ScalarField(grid_, std::move(out));
}

std::vector<double> PotentialOperator::green(const ScalarField& g,
                                             std::span<const cplx> targets) const {
  const std::vector<cplx> X = spectrum(g);
  const int nr = grid_.n_r(), n = grid_.n_theta();
  std::vector<cplx> m(n);
  for (int k = 0; k < n; ++k) {
    const int kk = std::abs(signed_bin(k, n));
    cplx s = 0.0;
    if (kk > 0)
      for (int i = 0; i < nr; ++i)
        s += moment_[static_cast<std::size_t>(kk) * nr + i] * X[static_cast<std::size_t>(i) * n + k];
    m[k] = s;
  }
  std::vector<double> N = newtonian(g, targets);
  std::vector<double> out(targets.size());
  std::vector<cplx> v(n);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double r = std::abs(targets[t]);
    for (int k = 0; k < n; ++k) {
      const int kk = std::abs(signed_bin(k, n));
      v[k] = kk == 0 ? cplx(0.0) : -std::pow(r, kk) / (2.0 * kk) * m[k];
    }
    out[t] = synthesize(v, std::arg(targets[t])) - N[t];
  }
  return out;
}

BoundaryData PotentialOperator::trace(const ScalarField& g, int m) const {
  if (!is_valid_boundary_size(m)) throw ConfigError("trace size must be >= 16 and a power of two");
  const std::vector<cplx> X = spectrum(g);
  const int nr = grid_.n_r(), n = grid_.n_theta();
  std::vector<cplx> B(m, 0.0);
  for (int k = 0; k < n; ++k) {
    const int kb = signed_bin(k, n);
    const int kk = std::abs(kb);
    if (kk == 0) continue;
    cplx s = 0.0;
    for (int i = 0; i < nr; ++i)
      s += moment_[static_cast<std::size_t>(kk) * nr + i] * X[static_cast<std::size_t>(i) * n + k];
    s *= -1.0 / (2.0 * kk);
    if (2 * k == n) {
      B[((kb % m) + m) % m] += 0.5 * s;
      B[((-kb % m) + m) % m] += 0.5 * s;
    } else {
      B[((kb % m) + m) % m] += s;
    }
  }
  fft::backward(B.data(), m);
  std::vector<double> out(m);
  for (int j = 0; j < m; ++j) out[j] = B[j].real();
  return BoundaryData(std::move(out));
}

ScalarField PotentialOperator::harmonic_extension(const BoundaryData& phi) const {
  const int m = phi.size(), nr = grid_.n_r(), n = grid_.n_theta();
  std::vector<cplx> P(phi.values().begin(), phi.values().end());
  fft::forward(P.data(), m);
  for (cplx& c : P) c /= static_cast<double>(m);
  std::vector<cplx> Y(grid_.size(), 0.0);
  for (int i = 0; i < nr; ++i) {
    const double r = grid_.radius(i);
    cplx* row = Y.data() + static_cast<std::size_t>(i) * n;
    double rk = 1.0;
    for (int k = 0; k <= m / 2; ++k) {
      if (k == m / 2) {
        const cplx c = 0.5 * P[k] * rk;
        row[((k % n) + n) % n] += c;
        row[((-k % n) + n) % n] += c;
      } else if (k == 0) {
        row[0] += P[0];
      } else {
        row[k % n] += P[k] * rk;
        row[((-k % n) + n) % n] += P[m - k] * rk;
      }
      rk *= r;
    }
  }
  fft::backward(Y.data(), n, nr);
  std::vector<double> out(Y.size());
  for (std::size_t q = 0; q < Y.size(); ++q) out[q] = Y[q].real();
  return ScalarField(grid_, std::move(out));
}

ScalarField PotentialOperator::dirichlet_part(const ScalarField& g, int m) const {
  ScalarField N = newtonian(g);
  const ScalarField P = harmonic_extension(trace(g, m));
  for (std::size_t q = 0; q < N.size(); ++q) N[q] -= P[q];
  return N;
}

double PotentialOperator::newton_bound(double p) const {
  if (!(p > 1.0)) throw ConfigError("p must exceed 1");
  const double q = p / (p - 1.0);
  const int nr = grid_.n_r(), n = grid_.n_theta();
  std::vector<double> aw(nr);
  for (int s = 0; s < nr; ++s) aw[s] = std::pow(grid_.cell_area(s), 1.0 - q);
  std::vector<cplx> buf(static_cast<std::size_t>(nr) * n);
  double M = 0.0;
  for (int i = 0; i <= nr; ++i) {
    for (int s = 0; s < nr; ++s)
      for (int k = 0; k < n; ++k) {
        const int kk = std::abs(signed_bin(k, n));
        double c;
        if (i < nr)
          c = W_[(static_cast<std::size_t>(kk) * nr + i) * nr + s];
        else
          c = kk == 0 ? 0.0 : -moment_[static_cast<std::size_t>(kk) * nr + s] / (2.0 * kk);
        buf[static_cast<std::size_t>(s) * n + k] = c / n;
      }
    fft::backward(buf.data(), n, nr);
    double total = 0.0;
    for (int s = 0; s < nr; ++s) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += std::pow(std::abs(buf[static_cast<std::size_t>(s) * n + j].real()), q);
      total += row * aw[s];
    }
    M = std::max(M, std::pow(total, 1.0 / q));
  }
  return M;
}

namespace {

const PotentialOperator& op_for(const ScalarField& g) { return *PotentialOperator::shared(g.grid()); }

}  // namespace

std::vector<double> poisson_integral(const BoundaryData& phi, std::span<const cplx> targets) {
  const int m = phi.size();
  std::vector<cplx> P(phi.values().begin(), phi.values().end());
  fft::forward(P.data(), m);
  // P_phi = Re F with F(z) = c_0 + 2 sum_{0<k<m/2} c_k z^k + c_{m/2} z^{m/2}
  std::vector<cplx> c(m / 2 + 1);
  c[0] = P[0] / static_cast<double>(m);
  for (int k = 1; k < m / 2; ++k) c[k] = 2.0 * P[k] / static_cast<double>(m);
  c[m / 2] = P[m / 2] / static_cast<double>(m);
  std::vector<double> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const cplx z = targets[t];
    if (std::abs(z) > 1.0) throw Error("exterior evaluation");
    cplx F = 0.0;
    for (int k = m / 2; k >= 0; --k) F = F * z + c[k];
    out[t] = F.real();
  }
  return out;
}

std::vector<cplx> poisson_gradient(const BoundaryData& phi, std::span<const cplx> targets) {
  const int m = phi.size();
  std::vector<cplx> P(phi.values().begin(), phi.values().end());
  fft::forward(P.data(), m);
  // dP/dz = F'(z)/2
  std::vector<cplx> c(m / 2 + 1);
  for (int k = 1; k < m / 2; ++k) c[k] = 2.0 * P[k] / static_cast<double>(m);
  c[m / 2] = P[m / 2] / static_cast<double>(m);
  std::vector<cplx> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const cplx z = targets[t];
    if (std::abs(z) > 1.0) throw Error("exterior evaluation");
    cplx d = 0.0;
    for (int k = m / 2; k >= 1; --k) d = d * z + static_cast<double>(k) * c[k];
    out[t] = 0.5 * d;
  }
  return out;
}

std::vector<double> poisson_integral_trapezoid(const BoundaryData& phi, std::span<const cplx> targets) {
  const int m = phi.size();
  std::vector<double> ct(m), st(m), x(targets.size()), y(targets.size());
  for (int j = 0; j < m; ++j) {
    ct[j] = std::cos(phi.angle(j));
    st[j] = std::sin(phi.angle(j));
  }
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (std::abs(targets[t]) >= 1.0) throw Error("exterior evaluation");
    x[t] = targets[t].real();
    y[t] = targets[t].imag();
  }
  std::vector<double> out(targets.size());
  simd::active().poisson_sum(targets.size(), x.data(), y.data(), m, ct.data(), st.data(),
                             phi.values().data(), out.data());
  return out;
}

ScalarField poisson_integral(const BoundaryData& phi, const DiskGrid& grid) {
  return PotentialOperator::shared(grid)->harmonic_extension(phi);
}

ScalarField green_potential(const ScalarField& g) { return op_for(g).green(g); }
std::vector<double> green_potential(const ScalarField& g, std::span<const cplx> targets) {
  return op_for(g).green(g, targets);
}
ScalarField newtonian_potential(const ScalarField& g) { return op_for(g).newtonian(g); }
std::vector<double> newtonian_potential(const ScalarField& g, std::span<const cplx> targets) {
  return op_for(g).newtonian(g, targets);
}
std::vector<cplx> newtonian_gradient(const ScalarField& g, std::span<const cplx> targets) {
  return op_for(g).newtonian_gradient(g, targets);
}

int default_trace_size(const DiskGrid& grid) {
  int m = 16;
  while (m < grid.n_theta()) m *= 2;
  return m;
}

BoundaryData boundary_trace(const ScalarField& g, int m) {
  return op_for(g).trace(g, m > 0 ? m : default_trace_size(g.grid()));
}

PoissonSolution solve_poisson_dirichlet(const ScalarField& g, const BoundaryData& phi,
                                        const PoissonOptions& opts) {
  const PotentialOperator& op = op_for(g);
  PoissonSolution sol;
  sol.trace = op.trace(g, std::max(phi.size(), default_trace_size(g.grid())));
  ScalarField U = op.newtonian(g);
  const ScalarField Pt = op.harmonic_extension(sol.trace);
  const ScalarField Pp = op.harmonic_extension(phi);
  const ScalarField G = op.green(g);
  double gap = 0.0;
  for (std::size_t q = 0; q < U.size(); ++q) {
    U[q] = U[q] - Pt[q] + Pp[q];
    gap = std::max(gap, std::abs(U[q] - (Pp[q] - G[q])));
  }
  sol.U = std::move(U);
  sol.representation_gap = gap;
  if (gap > opts.consistency_tol) throw Error("representation mismatch");
  return sol;
}

std::vector<RepresentationSample> evaluate_representation(const ScalarField& g,
                                                          const BoundaryData& trace,
                                                          const BoundaryData& phi,
                                                          std::span<const cplx> targets) {
  const PotentialOperator& op = op_for(g);
  const auto N = op.newtonian(g, targets);
  const auto dN = op.newtonian_gradient(g, targets);
  const auto Pt = poisson_integral(trace, targets);
  const auto dPt = poisson_gradient(trace, targets);
  const auto Pp = poisson_integral(phi, targets);
  const auto dPp = poisson_gradient(phi, targets);
  std::vector<RepresentationSample> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t)
    out[t] = {N[t] - Pt[t] + Pp[t], dN[t] - dPt[t] + dPp[t]};
  return out;
}

double laplacian_residual(const ScalarField& U, const ScalarField& g) {
  const DiskGrid& grid = U.grid();
  if (!(grid == g.grid())) throw Error("fields live on different grids");
  const int nr = grid.n_r(), n = grid.n_theta();
  if (nr < 32 || n < 32) throw ConfigError("grid too coarse for the Laplacian residual (need 32x32)");
  const double dr = grid.dr(), dt = grid.dtheta();
  double worst = 0.0;
  for (int i = 2; i <= nr - 3; ++i) {
    const double r = grid.radius(i), rp = r + 0.5 * dr, rm = r - 0.5 * dr;
    for (int j = 0; j < n; ++j) {
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      const double u = U(i, j);
      const double lap = (rp * (U(i + 1, j) - u) - rm * (u - U(i - 1, j))) / (r * dr * dr) +
                         (U(i, jp) - 2.0 * u + U(i, jm)) / (r * r * dt * dt);
      worst = std::max(worst, std::abs(lap - g(i, j)));
    }
  }
  return worst;
}

ScalarField prop2_density(double alpha, const DiskGrid& grid) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw ConfigError("alpha must lie in (1, 2)");
  // int_a^b rho w(rho) d rho = [(1 - ln b)^{1-alpha} - (1 - ln a)^{1-alpha}] / (alpha - 1)
  auto prim = [alpha](double x) {
    return x > 0.0 ? std::pow(1.0 - std::log(x), 1.0 - alpha) / (alpha - 1.0) : 0.0;
  };
  ScalarField g(grid);
  for (int i = 0; i < grid.n_r(); ++i) {
    const double a = grid.inner_edge(i), b = grid.outer_edge(i);
    const double avg = (prim(b) - prim(a)) / (0.5 * (b * b - a * a));
    for (int j = 0; j < grid.n_theta(); ++j) g(i, j) = avg;
  }
  return g;
}

ScalarField random_smooth_density(const DiskGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  constexpr int kModes = 5, kPowers = 4;
  double ca[kModes][kPowers], sa[kModes][kPowers];
  for (int k = 0; k < kModes; ++k)
    for (int l = 0; l < kPowers; ++l) {
      ca[k][l] = nd(rng);
      sa[k][l] = nd(rng);
    }
  return ScalarField::from_function(grid, [&](cplx z) {
    const double r = std::abs(z), t = std::arg(z);
    double v = 0.0;
    for (int k = 0; k < kModes; ++k) {
      double rl = 1.0;
      for (int l = 0; l < kPowers; ++l) {
        v += rl * (ca[k][l] * std::cos(k * t) + sa[k][l] * std::sin(k * t));
        rl *= r;
      }
    }
    return v;
  });
}

double newton_ratio(const ScalarField& g, double p) {
  const PotentialOperator& op = op_for(g);
  double m = op.newtonian(g).sup_norm();
  const DiskGrid& grid = g.grid();
  std::vector<cplx> circle(grid.n_theta());
  for (int j = 0; j < grid.n_theta(); ++j) circle[j] = std::polar(1.0, grid.angle(j));
  for (double v : op.newtonian(g, circle)) m = std::max(m, std::abs(v));
  return m / g.lp_norm(p);
}

NewtonBound measure_newton_bound(const DiskGrid& grid, double p, int probes, std::uint64_t seed) {
  NewtonBound nb;
  nb.p = p;
  nb.probes = probes;
  nb.M = PotentialOperator::shared(grid)->newton_bound(p);
  for (int k = 0; k < probes; ++k)
    nb.M_probe = std::max(nb.M_probe, newton_ratio(random_smooth_density(grid, seed + k), p));
  return nb;
}

}  // namespace semilin
