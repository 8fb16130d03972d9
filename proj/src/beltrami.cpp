#include "semilin/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "semilin/error.hpp"
#include "semilin/fft.hpp"
#include "semilin/simd/kernels.hpp"

namespace semilin {

cplx matrix_to_mu(const SymMatrix2& A) {
  const double d = 1.0 + A.a11 + A.a22 + A.det();
  if (!(d > 0.0)) throw Error("degenerate node");
  return cplx(A.a22 - A.a11, -2.0 * A.a12) / d;
}

SymMatrix2 mu_to_matrix(cplx mu) {
  const double m2 = std::norm(mu);
  if (!(m2 < 1.0)) throw Error("degenerate dilatation");
  const double s = 1.0 / (1.0 - m2);
  return {std::norm(1.0 - mu) * s, -2.0 * mu.imag() * s, std::norm(1.0 + mu) * s};
}

BeltramiField matrix_to_mu(const MatrixField& A) {
  BeltramiField out;
  out.grid = A.grid;
  out.mu.resize(A.values.size());
  for (std::size_t k = 0; k < A.values.size(); ++k) out.mu[k] = matrix_to_mu(A.values[k]);
  out.k_bound = (A.K - 1.0) / (A.K + 1.0);
  return out;
}

MatrixField mu_to_matrix(const BeltramiField& mu) {
  MatrixField out;
  out.grid = mu.grid;
  out.values.resize(mu.mu.size());
  for (std::size_t k = 0; k < mu.mu.size(); ++k) out.values[k] = mu_to_matrix(mu.mu[k]);
  const double k = mu.sup_norm();
  out.K = (1.0 + k) / (1.0 - k);
  return out;
}

DilatationFn dilatation_of(MatrixFn A) {
  return [A = std::move(A)](cplx z) { return matrix_to_mu(A(z)); };
}

EllipticityReport ellipticity_check(const MatrixField& A, double det_tol) {
  EllipticityReport rep;
  for (std::size_t k = 0; k < A.values.size(); ++k) {
    const SymMatrix2& m = A.values[k];
    const double tr = 0.5 * (m.a11 + m.a22);
    const double disc = std::sqrt(0.25 * (m.a11 - m.a22) * (m.a11 - m.a22) + m.a12 * m.a12);
    const double lmax = tr + disc;
    if (lmax > rep.K_measured) {
      rep.K_measured = lmax;
      rep.worst_node = k;
    }
    rep.max_det_error = std::max(rep.max_det_error, std::abs(m.det() - 1.0));
  }
  rep.passes = rep.K_measured <= A.K * (1.0 + 1e-12) && rep.max_det_error <= det_tol;
  return rep;
}

namespace {

template <class T, class Fn>
T bilinear(const CartesianGrid& g, const std::vector<T>& v, cplx z, Fn lerp) {
  const double ux = (z.real() - g.origin.real()) / g.h, uy = (z.imag() - g.origin.imag()) / g.h;
  const int ix = std::clamp(static_cast<int>(std::floor(ux)), 0, g.nx - 2);
  const int iy = std::clamp(static_cast<int>(std::floor(uy)), 0, g.ny - 2);
  const double fx = std::clamp(ux - ix, 0.0, 1.0), fy = std::clamp(uy - iy, 0.0, 1.0);
  const T a = lerp(v[g.index(ix, iy)], v[g.index(ix + 1, iy)], fx);
  const T b = lerp(v[g.index(ix, iy + 1)], v[g.index(ix + 1, iy + 1)], fx);
  return lerp(a, b, fy);
}

void write_grid_header(std::ofstream& out, const char* kind, const CartesianGrid& g) {
  out << "# " << kind << " v1, grid=cartesian,nx=" << g.nx << ",ny=" << g.ny
      << ",x0=" << format_double(g.origin.real()) << ",y0=" << format_double(g.origin.imag())
      << ",h=" << format_double(g.h) << "\n";
}

}  // namespace

SymMatrix2 MatrixField::evaluate(cplx z) const {
  return bilinear(grid, values, z, [](const SymMatrix2& a, const SymMatrix2& b, double t) {
    return SymMatrix2{a.a11 + t * (b.a11 - a.a11), a.a12 + t * (b.a12 - a.a12), a.a22 + t * (b.a22 - a.a22)};
  });
}

void MatrixField::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_grid_header(out, "matrix-field", grid);
  out << "x,y,a11,a12,a22\n";
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const cplx z = grid.node(ix, iy);
      const SymMatrix2& m = values[grid.index(ix, iy)];
      out << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(m.a11)
          << ',' << format_double(m.a12) << ',' << format_double(m.a22) << '\n';
    }
}

MatrixField MatrixField::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix field " + path);
  std::string line;
  std::getline(in, line);
  MatrixField f;
  double x0, y0, h;
  if (std::sscanf(line.c_str(), "# matrix-field v1, grid=cartesian,nx=%d,ny=%d,x0=%lf,y0=%lf,h=%lf",
                  &f.grid.nx, &f.grid.ny, &x0, &y0, &h) != 5)
    throw ConfigError("not a matrix-field v1 file: " + path);
  f.grid.origin = {x0, y0};
  f.grid.h = h;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x, y, a, b, c;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &x, &y, &a, &b, &c) != 5)
      throw ConfigError("malformed matrix-field row: " + line);
    f.values.push_back({a, b, c});
  }
  if (f.values.size() != f.grid.size()) throw ConfigError("matrix field size mismatch: " + path);
  double K = 1.0;
  for (const auto& m : f.values) {
    const double disc = std::sqrt(0.25 * (m.a11 - m.a22) * (m.a11 - m.a22) + m.a12 * m.a12);
    K = std::max(K, 0.5 * (m.a11 + m.a22) + disc);
  }
  f.K = K;
  return f;
}

BeltramiField BeltramiField::sample(const CartesianGrid& grid, const std::function<cplx(cplx)>& fn) {
  BeltramiField f;
  f.grid = grid;
  f.mu.resize(grid.size());
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) f.mu[grid.index(ix, iy)] = fn(grid.node(ix, iy));
  f.k_bound = f.sup_norm();
  return f;
}

double BeltramiField::sup_norm() const {
  double m = 0.0;
  for (const cplx& v : mu) m = std::max(m, std::abs(v));
  return m;
}

cplx BeltramiField::evaluate(cplx z) const {
  return bilinear(grid, mu, z, [](cplx a, cplx b, double t) { return a + t * (b - a); });
}

void BeltramiField::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_grid_header(out, "beltrami-field", grid);
  out << "x,y,re_mu,im_mu\n";
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const cplx z = grid.node(ix, iy), m = mu[grid.index(ix, iy)];
      out << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(m.real())
          << ',' << format_double(m.imag()) << '\n';
    }
}

namespace {

// Multipliers of the Beurling and Cauchy kernels truncated to |z| < R, for the forward
// transform convention e^{-i xi.x}.
struct Multipliers {
  std::vector<cplx> beurling, cauchy;
};

Multipliers make_multipliers(int n, double h, double R) {
  Multipliers m;
  m.beurling.resize(static_cast<std::size_t>(n) * n);
  m.cauchy.resize(m.beurling.size());
  const double dk = 2.0 * kPi / (n * h);
  for (int ky = 0; ky < n; ++ky)
    for (int kx = 0; kx < n; ++kx) {
      const std::size_t q = static_cast<std::size_t>(ky) * n + kx;
      const cplx xi(dk * (2 * kx < n ? kx : kx - n), dk * (2 * ky < n ? ky : ky - n));
      const double a = std::abs(xi);
      if (a == 0.0) {
        m.beurling[q] = 0.0;
        m.cauchy[q] = 0.0;
        continue;
      }
      const double aR = a * R;
      m.beurling[q] = std::conj(xi) / xi * (1.0 - 2.0 * std::cyl_bessel_j(1.0, aR) / aR);
      m.cauchy[q] = cplx(0.0, -2.0) / xi * (1.0 - std::cyl_bessel_j(0.0, aR));
    }
  return m;
}

void apply_multiplier(const std::vector<cplx>& mult, const std::vector<cplx>& in, std::vector<cplx>& out,
                      int n) {
  out = in;
  fft::forward_2d(out.data(), n, n);
  simd::active().complex_mul_add(out.size(), mult.data(), out.data(), nullptr, out.data());
  fft::backward_2d(out.data(), n, n);
  const double s = 1.0 / (static_cast<double>(n) * n);
  for (cplx& v : out) v *= s;
}

// Uniform periodic cubic spline on m knots over [0, 1).
struct PeriodicSpline {
  std::vector<double> y, m2;

  void fit(std::vector<double> values) {
    y = std::move(values);
    const std::size_t n = y.size();
    // m_{k-1} + 4 m_k + m_{k+1} = 6 n^2 (y_{k+1} - 2 y_k + y_{k-1}); Jacobi-like sweeps converge
    // geometrically (ratio 1/2) and keep the code free of a cyclic solver.
    const double h2 = 1.0 / (static_cast<double>(n) * n);
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k)
      rhs[k] = 6.0 * (y[(k + 1) % n] - 2.0 * y[k] + y[(k + n - 1) % n]) / h2;
    m2.assign(n, 0.0);
    std::vector<double> next(n);
    for (int it = 0; it < 200; ++it) {
      double diff = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        next[k] = 0.25 * (rhs[k] - m2[(k + n - 1) % n] - m2[(k + 1) % n]);
        diff = std::max(diff, std::abs(next[k] - m2[k]));
        scale = std::max(scale, std::abs(next[k]));
      }
      m2.swap(next);
      if (diff <= 1e-15 * std::max(scale, 1.0)) break;
    }
  }

  double operator()(double s) const {
    const std::size_t n = y.size();
    const double u = (s - std::floor(s)) * n;
    std::size_t k = static_cast<std::size_t>(u);
    if (k >= n) k = n - 1;
    const double B = u - k, A = 1.0 - B;
    const std::size_t k1 = (k + 1) % n;
    const double h2 = 1.0 / (static_cast<double>(n) * n);
    return A * y[k] + B * y[k1] + ((A * A * A - A) * m2[k] + (B * B * B - B) * m2[k1]) * h2 / 6.0;
  }
};

// Keys cubic convolution weights (a = -1/2) and derivatives at fractional offset f.
void keys_weights(double f, double w[4], double dw[4]) {
  const double a = -0.5;
  for (int m = -1; m <= 2; ++m) {
    const double t = f - m;
    const double at = std::abs(t), sg = t < 0 ? -1.0 : 1.0;
    double v = 0.0, d = 0.0;
    if (at <= 1.0) {
      v = (a + 2.0) * at * at * at - (a + 3.0) * at * at + 1.0;
      d = (3.0 * (a + 2.0) * at * at - 2.0 * (a + 3.0) * at) * sg;
    } else if (at < 2.0) {
      v = a * at * at * at - 5.0 * a * at * at + 8.0 * a * at - 4.0 * a;
      d = (3.0 * a * at * at - 10.0 * a * at + 8.0 * a) * sg;
    }
    w[m + 1] = v;
    dw[m + 1] = d;
  }
}

cplx ray_hit(const JordanDomain& d, cplx from) {
  const auto& p = d.polyline();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const cplx a = p[k] - from, b = p[(k + 1) % p.size()] - from;
    if ((a.imag() > 0.0) == (b.imag() > 0.0) && a.imag() != 0.0) continue;
    if (a.imag() == b.imag()) continue;
    const double t = a.imag() / (a.imag() - b.imag());
    const double x = a.real() + t * (b.real() - a.real());
    if (x > 0.0 && x < best) best = x;
  }
  if (!std::isfinite(best)) throw Error("no boundary point to the right of the map centre");
  return from + best;
}

}  // namespace

cplx QuasiconformalMap::forward(cplx z) const {
  cplx wx, wy;
  return forward(z, wx, wy);
}

cplx QuasiconformalMap::forward(cplx z, cplx& wx, cplx& wy) const {
  const double ux = (z.real() - grid_.origin.real()) / grid_.h;
  const double uy = (z.imag() - grid_.origin.imag()) / grid_.h;
  const int ix = std::clamp(static_cast<int>(std::floor(ux)), 1, grid_.nx - 3);
  const int iy = std::clamp(static_cast<int>(std::floor(uy)), 1, grid_.ny - 3);
  double wxs[4], dxs[4], wys[4], dys[4];
  keys_weights(ux - ix, wxs, dxs);
  keys_weights(uy - iy, wys, dys);
  cplx v = 0.0;
  wx = wy = 0.0;
  for (int b = 0; b < 4; ++b) {
    cplx row = 0.0, drow = 0.0;
    for (int a = 0; a < 4; ++a) {
      const cplx s = fwd_[grid_.index(ix - 1 + a, iy - 1 + b)];
      row += wxs[a] * s;
      drow += dxs[a] * s;
    }
    v += wys[b] * row;
    wx += wys[b] * drow;
    wy += dys[b] * row;
  }
  wx /= grid_.h;
  wy /= grid_.h;
  return v;
}

double QuasiconformalMap::forward_jacobian(cplx z) const {
  const double ux = (z.real() - grid_.origin.real()) / grid_.h;
  const double uy = (z.imag() - grid_.origin.imag()) / grid_.h;
  const int ix = std::clamp(static_cast<int>(std::floor(ux)), 1, grid_.nx - 3);
  const int iy = std::clamp(static_cast<int>(std::floor(uy)), 1, grid_.ny - 3);
  double wxs[4], dxs[4], wys[4], dys[4];
  keys_weights(ux - ix, wxs, dxs);
  keys_weights(uy - iy, wys, dys);
  double v = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += wxs[a] * jac_[grid_.index(ix - 1 + a, iy - 1 + b)];
    v += wys[b] * row;
  }
  return v;
}

std::size_t QuasiconformalMap::nearest_sample(cplx w) const {
  const int n = bucket_n_;
  const double lo = -1.5, cell = 3.0 / n;
  const int cx = std::clamp(static_cast<int>((w.real() - lo) / cell), 0, n - 1);
  const int cy = std::clamp(static_cast<int>((w.imag() - lo) / cell), 0, n - 1);
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double bd = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    for (int y = cy - k; y <= cy + k; ++y) {
      if (y < 0 || y >= n) continue;
      const bool full = (y == cy - k || y == cy + k);
      for (int x = cx - k; x <= cx + k; x += full ? 1 : std::max(1, 2 * k)) {
        if (x < 0 || x >= n) continue;
        const std::size_t b = static_cast<std::size_t>(y) * n + x;
        for (std::uint32_t q = bucket_start_[b]; q < bucket_start_[b + 1]; ++q) {
          const double d = std::abs(fwd_[bucket_items_[q]] - w);
          if (d < bd) {
            bd = d;
            best = bucket_items_[q];
          }
        }
      }
    }
    if (best != std::numeric_limits<std::size_t>::max() && bd <= (k) * cell) break;
  }
  if (best == std::numeric_limits<std::size_t>::max()) throw Error("inversion failure");
  return best;
}

cplx QuasiconformalMap::inverse(cplx w, cplx seed, bool* ok) const {
  cplx z = seed;
  bool good = false;
  for (int it = 0; it < 60; ++it) {
    cplx wx, wy;
    const cplx r = forward(z, wx, wy) - w;
    if (std::abs(r) < 1e-13) {
      good = true;
      break;
    }
    const double a = wx.real(), b = wy.real(), c = wx.imag(), d = wy.imag();
    const double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double dx = (d * r.real() - b * r.imag()) / det;
    const double dy = (-c * r.real() + a * r.imag()) / det;
    cplx step(dx, dy);
    const double lim = 2.0 * grid_.h;
    if (std::abs(step) > lim) step *= lim / std::abs(step);
    z -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) {
      good = std::abs(forward(z) - w) < 1e-10;
      break;
    }
  }
  if (ok) *ok = good;
  return z;
}

cplx QuasiconformalMap::inverse(cplx w) const {
  bool ok = false;
  const std::size_t s = nearest_sample(w);
  const cplx z = inverse(w, grid_.node(static_cast<int>(s % grid_.nx), static_cast<int>(s / grid_.nx)), &ok);
  if (!ok) throw Error("inversion failure");
  return z;
}

cplx QuasiconformalMap::stage2(cplx w, cplx* dw) const {
  // Outside the unit circle the series amplifies high-mode noise; continue it by a
  // second-order expansion from the circle instead.
  const double r = std::abs(w);
  const cplx u = r > 1.0 ? w / r : w;
  cplx G = 0.0, dG = 0.0, d2G = 0.0;
  for (std::size_t k = a_.size(); k-- > 0;) {
    d2G = d2G * u + 2.0 * dG;
    dG = dG * u + G;
    G = G * u + a_[k];
  }
  if (r > 1.0) {
    const cplx d = w - u;
    G += dG * d + 0.5 * d2G * d * d;
    dG += d2G * d;
  }
  const cplx e = std::exp(G);
  if (dw) *dw = e * (1.0 + w * dG);
  return c_ + w * e;
}

double QuasiconformalMap::theta_inverse_param(double theta) const {
  const double two_pi = 2.0 * kPi;
  double th = theta0_ + std::fmod(std::fmod(theta - theta0_, two_pi) + two_pi, two_pi);
  PeriodicSpline sp;
  sp.y = theta_per_;
  sp.m2 = theta_per_m2_;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = theta0_ + two_pi * mid + sp(mid);
    if (v < th)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

cplx QuasiconformalMap::stage2_inverse(cplx zeta, bool* ok) const {
  const cplx v = zeta - c_;
  if (std::abs(v) == 0.0) {
    if (ok) *ok = true;
    return 0.0;
  }
  const double th = std::arg(v);
  PeriodicSpline lr;
  lr.y = logrho_;
  lr.m2 = logrho_m2_;
  const double rho = std::exp(lr(theta_inverse_param(th)));
  // boundary angle -> circle parameter by monotone linear interpolation
  const int m = static_cast<int>(theta_t_.size());
  const double two_pi = 2.0 * kPi;
  const double t0 = theta_t_[0];
  const double thr = t0 + std::fmod(std::fmod(th - t0, two_pi) + two_pi, two_pi);
  auto it = std::upper_bound(theta_t_.begin(), theta_t_.end(), thr);
  const int j = static_cast<int>(it - theta_t_.begin()) - 1;
  const double ta = two_pi * j / m;
  const double tha = theta_t_[j];
  const double thb = j + 1 < m ? theta_t_[j + 1] : theta_t_[0] + two_pi;
  const double t = ta + (two_pi / m) * (thr - tha) / (thb - tha);
  cplx w = std::polar(std::abs(v) / rho, t);
  bool good = false;
  double res = std::abs(stage2(w, nullptr) - zeta);
  for (int k = 0; k < 80; ++k) {
    cplx d;
    const cplx F = stage2(w, &d);
    const cplx step = (F - zeta) / d;
    double lam = 1.0;
    cplx wn = w - step;
    double rn = std::abs(stage2(wn, nullptr) - zeta);
    while (rn > res && lam > 1e-4) {
      lam *= 0.5;
      wn = w - lam * step;
      rn = std::abs(stage2(wn, nullptr) - zeta);
    }
    w = wn;
    res = rn;
    if (std::abs(lam * step) < 1e-15 || res < 1e-15) {
      good = res < 1e-11;
      break;
    }
  }
  if (ok) *ok = good;
  return w;
}

double QuasiconformalMap::boundary_parameter(double t) const {
  const cplx F = stage2(std::polar(1.0, t + gamma_), nullptr);
  return theta_inverse_param(std::arg(F - c_));
}

QuasiconformalMap solve_beltrami(const JordanDomain& domain, const DilatationFn& mu_fn,
                                 const BeltramiOptions& opts) {
  const int n = opts.grid_n;
  if (n < 16 || n % 2 != 0) throw ConfigError("beltrami grid size must be even and >= 16");
  if (!(opts.k_max > 0.0 && opts.k_max < 1.0)) throw ConfigError("k_max must lie in (0, 1)");
  if (!is_valid_boundary_size(opts.boundary_samples))
    throw ConfigError("boundary_samples must be >= 16 and a power of two");

  QuasiconformalMap map;
  const double diam = domain.diameter();
  // The smoothed indicator reaches 6 widths past the boundary; the margin covers it on both
  // sides so that the truncated kernels see the whole support.
  const double layer = 12.0 * std::max(opts.smoothing, 0.0);
  const double margin = std::max(opts.margin, 2.0 * layer * diam / (n - 4.0 * layer));
  const double R = diam + margin;
  const double L = 2.0 * diam + 2.0 * margin;
  const double h = L / n;
  const cplx mid = 0.5 * (domain.bbox_lo() + domain.bbox_hi());
  map.grid_ = {n, n, mid - cplx(0.5 * n * h, 0.5 * n * h), h};
  const CartesianGrid& grid = map.grid_;
  const std::size_t N = grid.size();

  // Stage 1: dilatation density q = mu S q + mu, plane map z + C q.
  map.mu_.assign(N, 0.0);
  map.inside_.assign(N, 0);
  std::vector<double> sd(N);
  const double width = opts.smoothing * h;
  double kmeas = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t q = grid.index(ix, iy);
      const cplx z = grid.node(ix, iy);
      const bool in = domain.contains(z);
      const double d = domain.distance(z);
      sd[q] = in ? -d : d;
      map.inside_[q] = in;
      double chi = in ? 1.0 : 0.0;
      if (width > 0.0) chi = sd[q] < 6.0 * width ? 0.5 * std::erfc(sd[q] / width - 2.0) : 0.0;
      if (chi == 0.0) continue;
      const cplx m = mu_fn(z);
      if (in) kmeas = std::max(kmeas, std::abs(m));
      map.mu_[q] = chi * m;
    }
  map.k_measured_ = kmeas;
  if (kmeas > opts.k_max + 1e-12) throw ConfigError("dilatation exceeds k_max");

  const Multipliers mult = make_multipliers(n, h, R);
  std::vector<cplx> q = map.mu_, Sq, next(N);
  double prev = std::numeric_limits<double>::infinity();
  int rises = 0;
  bool converged = false;
  for (int it = 1; it <= opts.max_neumann; ++it) {
    apply_multiplier(mult.beurling, q, Sq, n);
    simd::active().complex_mul_add(N, map.mu_.data(), Sq.data(), map.mu_.data(), next.data());
    double diff = 0.0;
    for (std::size_t k = 0; k < N; ++k) diff = std::max(diff, std::abs(next[k] - q[k]));
    q.swap(next);
    map.neumann_iters_ = it;
    if (diff < opts.neumann_tol) {
      converged = true;
      break;
    }
    rises = diff > prev ? rises + 1 : 0;
    if (rises >= 3) break;
    prev = diff;
  }
  if (!converged) throw ConvergenceError("dilatation too strong for grid");
  // Plane map derivatives: d/dzbar = q, d/dz = 1 + S q.
  apply_multiplier(mult.beurling, q, Sq, n);
  std::vector<double> jplane(N);
  for (std::size_t k = 0; k < N; ++k) jplane[k] = std::norm(1.0 + Sq[k]) - std::norm(q[k]);

  std::vector<cplx> qhat = q;
  fft::forward_2d(qhat.data(), n, n);
  std::vector<cplx> chat(N);
  simd::active().complex_mul_add(N, mult.cauchy.data(), qhat.data(), nullptr, chat.data());
  std::vector<cplx> Cq = chat;
  fft::backward_2d(Cq.data(), n, n);
  map.plane_.resize(N);
  const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t k = grid.index(ix, iy);
      map.plane_[k] = grid.node(ix, iy) + Cq[k] * inv_n2;
    }
  for (cplx& c : chat) c *= inv_n2;

  // Off-grid plane map from the trigonometric series of C q.
  std::vector<cplx> ex(n), ey(n);
  auto plane_at = [&](cplx p) {
    const double ux = (p.real() - grid.origin.real()) / h, uy = (p.imag() - grid.origin.imag()) / h;
    for (int k = 0; k < n; ++k) {
      const int ks = 2 * k < n ? k : k - n;
      ex[k] = std::polar(1.0, 2.0 * kPi * ks * ux / n);
      ey[k] = std::polar(1.0, 2.0 * kPi * ks * uy / n);
    }
    cplx s = 0.0;
    for (int ky = 0; ky < n; ++ky) {
      cplx row = 0.0;
      const cplx* c = chat.data() + static_cast<std::size_t>(ky) * n;
      for (int kx = 0; kx < n; ++kx) row += c[kx] * ex[kx];
      s += ey[ky] * row;
    }
    return p + s;
  };

  // Stage 2: conformal map of the starlike image onto the disk.
  const cplx zc = opts.center ? *opts.center : (domain.contains(0.0) ? cplx(0.0) : domain.centroid());
  if (!domain.contains(zc)) throw ConfigError("map centre lies outside the domain");
  const cplx zm = opts.mark ? *opts.mark : ray_hit(domain, zc);
  map.center_ = zc;
  map.mark_ = zm;
  map.rotation_ = opts.rotation;
  map.c_ = plane_at(zc);

  const int mb = opts.boundary_samples;
  std::vector<double> Theta(mb), logr(mb);
  for (int j = 0; j < mb; ++j) {
    const cplx v = plane_at(domain.point_at(static_cast<double>(j) / mb)) - map.c_;
    Theta[j] = std::arg(v);
    logr[j] = std::log(std::abs(v));
    if (j > 0) {
      while (Theta[j] <= Theta[j - 1] - kPi) Theta[j] += 2.0 * kPi;
      while (Theta[j] > Theta[j - 1] + kPi) Theta[j] -= 2.0 * kPi;
      if (!(Theta[j] > Theta[j - 1])) throw Error("stage-2 unsupported image");
    }
  }
  {
    double last = Theta[0] + 2.0 * kPi;
    if (!(last > Theta[mb - 1]) || std::abs(last - Theta[mb - 1]) > kPi)
      throw Error("stage-2 unsupported image");
  }
  map.theta0_ = Theta[0];
  std::vector<double> per(mb);
  for (int j = 0; j < mb; ++j) per[j] = Theta[j] - Theta[0] - 2.0 * kPi * j / mb;
  PeriodicSpline sp_theta, sp_rho;
  sp_theta.fit(per);
  sp_rho.fit(logr);
  map.theta_per_ = sp_theta.y;
  map.theta_per_m2_ = sp_theta.m2;
  map.logrho_ = sp_rho.y;
  map.logrho_m2_ = sp_rho.m2;

  // Theodorsen: theta(t) = t + K[log rho(theta(.))](t).
  std::vector<double> theta(mb), Lr(mb);
  std::vector<cplx> buf(mb);
  for (int j = 0; j < mb; ++j) theta[j] = 2.0 * kPi * j / mb + map.theta0_;
  bool theo_ok = false;
  for (int it = 1; it <= opts.theodorsen_max; ++it) {
    for (int j = 0; j < mb; ++j) {
      Lr[j] = sp_rho(map.theta_inverse_param(theta[j]));
      buf[j] = Lr[j];
    }
    fft::forward(buf.data(), mb);
    for (int k = 0; k < mb; ++k) {
      const int ks = 2 * k < mb ? k : k - mb;
      if (ks == 0 || 2 * k == mb)
        buf[k] = 0.0;
      else
        buf[k] *= cplx(0.0, ks > 0 ? -1.0 : 1.0);
    }
    fft::backward(buf.data(), mb);
    double diff = 0.0;
    for (int j = 0; j < mb; ++j) {
      const double nt = 2.0 * kPi * j / mb + map.theta0_ + buf[j].real() / mb;
      diff = std::max(diff, std::abs(nt - theta[j]));
      theta[j] = nt;
    }
    map.theo_iters_ = it;
    if (diff < opts.theodorsen_tol) {
      theo_ok = true;
      break;
    }
  }
  if (!theo_ok) throw ConvergenceError("stage-2 unsupported image");
  for (int j = 0; j < mb; ++j) {
    Lr[j] = sp_rho(map.theta_inverse_param(theta[j]));
    buf[j] = Lr[j];
  }
  fft::forward(buf.data(), mb);
  // theta was seeded with theta0 so that F0(1) lies at angle theta0: G has imaginary part theta0.
  map.a_.assign(mb / 2 + 1, 0.0);
  map.a_[0] = cplx(buf[0].real() / mb, map.theta0_);
  for (int k = 1; k < mb / 2; ++k) map.a_[k] = 2.0 * buf[k] / static_cast<double>(mb);
  map.a_[mb / 2] = buf[mb / 2].real() / mb;
  double amax = 0.0;
  for (const cplx& a : map.a_) amax = std::max(amax, std::abs(a));
  while (map.a_.size() > 1 && std::abs(map.a_.back()) <= 1e-17 * std::max(amax, 1.0)) map.a_.pop_back();
  map.theta_t_ = theta;

  bool ok = false;
  const cplx wm = map.stage2_inverse(plane_at(zm), &ok);
  if (!ok) throw Error("stage-2 unsupported image");
  map.gamma_ = std::arg(wm) - opts.rotation;
  const cplx rot = std::polar(1.0, -map.gamma_);

  map.fwd_.assign(N, 0.0);
  map.jac_.assign(N, 0.0);
  map.valid_.assign(N, 0);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t k = grid.index(ix, iy);
      if (sd[k] > 3.5 * h) continue;
      bool good = false;
      const cplx w = map.stage2_inverse(map.plane_[k], &good);
      map.fwd_[k] = rot * w;
      map.valid_[k] = good;
      cplx dF = 1.0;
      if (good) map.stage2(w, &dF);
      map.jac_[k] = jplane[k] / std::norm(dF);
    }
  for (std::size_t k = 0; k < N; ++k)
    if (map.inside_[k] && !map.valid_[k]) throw Error("stage-2 unsupported image");

  // Seed index over interior forward samples.
  map.bucket_n_ = 64;
  const int bn = map.bucket_n_;
  std::vector<std::vector<std::uint32_t>> buckets(static_cast<std::size_t>(bn) * bn);
  for (std::size_t k = 0; k < N; ++k) {
    if (!map.inside_[k]) continue;
    const cplx w = map.fwd_[k];
    const int bx = std::clamp(static_cast<int>((w.real() + 1.5) / (3.0 / bn)), 0, bn - 1);
    const int by = std::clamp(static_cast<int>((w.imag() + 1.5) / (3.0 / bn)), 0, bn - 1);
    buckets[static_cast<std::size_t>(by) * bn + bx].push_back(static_cast<std::uint32_t>(k));
  }
  map.bucket_start_.assign(buckets.size() + 1, 0);
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    map.bucket_start_[b] = static_cast<std::uint32_t>(map.bucket_items_.size());
    map.bucket_items_.insert(map.bucket_items_.end(), buckets[b].begin(), buckets[b].end());
  }
  map.bucket_start_.back() = static_cast<std::uint32_t>(map.bucket_items_.size());

  return invert_map(std::move(map), DiskGrid(opts.inverse_n_r, opts.inverse_n_theta));
}

QuasiconformalMap solve_beltrami_disk(const DilatationFn& mu, const BeltramiOptions& opts) {
  static const JordanDomain unit = JordanDomain::disk();
  BeltramiOptions o = opts;
  if (!o.center) o.center = cplx(0.0);
  if (!o.mark) o.mark = cplx(1.0);
  return solve_beltrami(unit, mu, o);
}

QuasiconformalMap solve_beltrami_disk(const BeltramiField& mu, const BeltramiOptions& opts) {
  return solve_beltrami_disk([&mu](cplx z) { return mu.evaluate(z); }, opts);
}

QuasiconformalMap invert_map(QuasiconformalMap map, const DiskGrid& grid) {
  if (map.fwd_.empty()) throw Error("inversion needs forward samples");
  map.disk_ = grid;
  map.inv_.assign(grid.size(), 0.0);
  std::size_t failures = 0;
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) {
      const cplx w = grid.node(i, j);
      const std::size_t s = map.nearest_sample(w);
      bool ok = false;
      map.inv_[grid.index(i, j)] =
          map.inverse(w, map.grid_.node(static_cast<int>(s % map.grid_.nx), static_cast<int>(s / map.grid_.nx)), &ok);
      if (!ok) ++failures;
    }
  if (failures > grid.size() / 1000) throw Error("inversion failure");
  return map;
}

ScalarField jacobian_inverse(const QuasiconformalMap& map) {
  if (!map.has_inverse()) throw Error("jacobian needs inverse samples");
  const DiskGrid& g = map.disk();
  const auto& z = map.inverse_samples();
  ScalarField J(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double jf = map.forward_jacobian(z[k]);
    if (!(jf > 0.0)) throw Error("orientation violation");
    J[k] = 1.0 / jf;
  }
  return J;
}

JacobianIntegrability select_jacobian_p(const QuasiconformalMap& map, double preferred, double tol) {
  if (!map.has_inverse()) throw Error("jacobian needs inverse samples");
  const DiskGrid& g = map.disk();
  if (g.n_r() % 2 != 0 || g.n_theta() % 4 != 0) throw ConfigError("integrability check needs even grid sizes");
  const ScalarField J = jacobian_inverse(map);
  const ScalarField Jc = jacobian_inverse(invert_map(map, DiskGrid(g.n_r() / 2, g.n_theta() / 2)));
  std::vector<double> cands{preferred};
  for (double p : {1.75, 1.5, 1.25, 1.1})
    if (p < preferred) cands.push_back(p);
  for (double p : cands) {
    const double fine = J.lp_norm(p), crs = Jc.lp_norm(p);
    if (std::isfinite(fine) && std::abs(fine - crs) <= tol * fine) return {p, fine, crs};
  }
  throw Error("Jacobian not p-integrable on this grid");
}

double beltrami_residual(const QuasiconformalMap& map, const DilatationFn& mu, double radius) {
  const CartesianGrid& g = map.grid();
  const auto& w = map.forward_samples();
  double s = 0.0;
  for (int iy = 1; iy < g.ny - 1; ++iy)
    for (int ix = 1; ix < g.nx - 1; ++ix) {
      const cplx z = g.node(ix, iy);
      if (std::abs(z - map.center()) > radius) continue;
      const cplx wx = (w[g.index(ix + 1, iy)] - w[g.index(ix - 1, iy)]) / (2.0 * g.h);
      const cplx wy = (w[g.index(ix, iy + 1)] - w[g.index(ix, iy - 1)]) / (2.0 * g.h);
      const cplx wz = 0.5 * (wx - cplx(0, 1) * wy), wzb = 0.5 * (wx + cplx(0, 1) * wy);
      s += std::norm(wzb - mu(z) * wz) * g.h * g.h;
    }
  return std::sqrt(s);
}

double beurling_self_test(int n) {
  const double L = 8.0, h = L / n, sigma = 0.5;
  const Multipliers mult = make_multipliers(n, h, 0.5 * L);
  std::vector<cplx> f(static_cast<std::size_t>(n) * n), df(f.size()), out;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const cplx z(h * (ix - n / 2), h * (iy - n / 2));
      const double phi = std::exp(-std::norm(z) / (sigma * sigma));
      f[static_cast<std::size_t>(iy) * n + ix] = -z / (sigma * sigma) * phi;
      df[static_cast<std::size_t>(iy) * n + ix] = -std::conj(z) / (sigma * sigma) * phi;
    }
  apply_multiplier(mult.beurling, f, out, n);
  double err = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const cplx z(h * (ix - n / 2), h * (iy - n / 2));
      if (std::abs(z) > 1.0) continue;
      const std::size_t k = static_cast<std::size_t>(iy) * n + ix;
      err = std::max(err, std::abs(out[k] - df[k]));
    }
  return err;
}

}  // namespace semilin
