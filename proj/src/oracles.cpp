#include "semilin/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "semilin/error.hpp"

namespace semilin {

double RadialProfile::operator()(double radius) const {
  if (radius <= r.front()) return values.front();
  if (radius >= r.back()) return values.back();
  const std::size_t k = std::upper_bound(r.begin(), r.end(), radius) - r.begin() - 1;
  const double h = r[k + 1] - r[k];
  if (h <= 0.0) return values[k];
  const double t = (radius - r[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values[k] + (t3 - 2 * t2 + t) * h * slopes[k] + (-2 * t3 + 3 * t2) * values[k + 1] +
         (t3 - t2) * h * slopes[k + 1];
}

double RadialProfile::threshold_radius(double eps) const {
  if (values.front() > eps) return 0.0;
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (values[k] <= eps) continue;
    double lo = r[k - 1], hi = r[k];
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((*this)(mid) > eps ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return r.back();
}

void RadialProfile::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "r,value\n";
  for (std::size_t k = 0; k < r.size(); ++k) out << format_double(r[k]) << ',' << format_double(values[k]) << '\n';
}

namespace {

struct Shot {
  double end = 0.0;
  RadialProfile profile;
};

// One trajectory for shooting parameter s: u(0) = s, or for the positive-part power with
// s <= 0, a dead core of radius -s.
Shot shoot(const Nonlinearity& f, double lambda, double s, int steps, bool record) {
  Shot out;
  RadialProfile& p = out.profile;
  auto rhs = [&](double r, double u, double v, double& du, double& dv) {
    du = v;
    dv = lambda * f(u) - v / r;
  };
  double r0, u, v;
  const bool core = f.positive_part() && s <= 0.0;
  if (core) {
    const double rc = -s;
    if (rc >= 1.0) {
      out.end = 0.0;
      if (record) {
        p.r = {0.0, 1.0};
        p.values = {0.0, 0.0};
        p.slopes = {0.0, 0.0};
        p.dead_core_radius = 1.0;
      }
      return out;
    }
    // u = K d^beta (1 + a d), d = r - rc.
    const double q = f.power(), beta = 2.0 / (1.0 - q);
    const double lam = lambda * f.scale();
    const double Kq = rc > 0.0 ? lam / (beta * (beta - 1.0)) : lam / (beta * beta);
    const double K = std::pow(Kq, 1.0 / (1.0 - q));
    const double a = rc > 0.0 ? -1.0 / (rc * ((beta + 1.0) - q * (beta - 1.0))) : 0.0;
    // The expansion is in d / rc, so the start must sit well inside the core edge layer.
    const double d = std::min({1e-3, 0.01 * (1.0 - rc), rc > 0.0 ? 0.01 * rc : 1e-3});
    r0 = rc + d;
    u = K * std::pow(d, beta) * (1.0 + a * d);
    v = K * beta * std::pow(d, beta - 1.0) * (1.0 + a * d) + K * a * std::pow(d, beta);
    if (record) {
      p.dead_core_radius = rc;
      p.r = {0.0};
      p.values = {0.0};
      p.slopes = {0.0};
      if (rc > 0.0) {
        p.r.push_back(rc);
        p.values.push_back(0.0);
        p.slopes.push_back(0.0);
      }
    }
  } else {
    const double fs = lambda * f(s);
    r0 = 1e-4;
    u = s + fs * r0 * r0 / 4.0;
    v = fs * r0 / 2.0;
    if (record) {
      p.r = {0.0};
      p.values = {s};
      p.slopes = {0.0};
    }
  }
  if (record) {
    p.r.push_back(r0);
    p.values.push_back(u);
    p.slopes.push_back(v);
  }
  // Core starts use the graded mesh r = r0 + (1 - r0) xi^2 to resolve the edge layer.
  auto node = [&](int k) {
    const double xi = static_cast<double>(k) / steps;
    return core ? r0 + (1.0 - r0) * xi * xi : r0 + (1.0 - r0) * xi;
  };
  double r = r0;
  for (int k = 0; k < steps; ++k) {
    const double h = node(k + 1) - r;
    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    rhs(r, u, v, k1u, k1v);
    rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
    rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
    rhs(r + h, u + h * k3u, v + h * k3v, k4u, k4v);
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    r = node(k + 1);
    if (!std::isfinite(u) || std::abs(u) > 1e150) {
      out.end = u > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      return out;
    }
    if (record) {
      p.r.push_back(r);
      p.values.push_back(u);
      p.slopes.push_back(v);
    }
  }
  out.end = u;
  return out;
}

}  // namespace

RadialProfile radial_shoot(const Nonlinearity& f, double lambda, double b, const ShootOptions& opts) {
  if (opts.steps < 10) throw ConfigError("shooting needs at least 10 steps");
  const double span = 10.0 * (std::abs(b) + 1.0);
  double lo = -span, hi = span;
  double flo = shoot(f, lambda, lo, opts.steps, false).end - b;
  double fhi = shoot(f, lambda, hi, opts.steps, false).end - b;
  if (flo > 0.0 || fhi < 0.0) throw Error("shooting bracket not found");
  double s = 0.5 * (lo + hi);
  bool done = false;
  if (f.positive_part()) {
    // s = 0 starts on the exact power solution; u(1) converges slowly on either side of it.
    const double f0 = shoot(f, lambda, 0.0, opts.steps, false).end - b;
    if (std::abs(f0) <= opts.tol) {
      s = 0.0;
      done = true;
    } else {
      (f0 < 0.0 ? lo : hi) = 0.0;
    }
  }
  for (int it = 0; it < opts.max_bisections && !done; ++it) {
    s = 0.5 * (lo + hi);
    const double fm = shoot(f, lambda, s, opts.steps, false).end - b;
    if (std::abs(fm) <= opts.tol && hi - lo < 1e-3) break;
    (fm < 0.0 ? lo : hi) = s;
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(s))) break;
  }
  Shot sh = shoot(f, lambda, s, opts.steps, true);
  RadialProfile p = std::move(sh.profile);
  p.center_value = p.values.front();
  p.derivative_at_0 = 0.0;
  p.boundary_residual = std::abs(sh.end - b);
  if (!(p.boundary_residual <= opts.tol)) throw Error("shooting did not meet the boundary tolerance");
  return p;
}

RadialProfile radial_shoot(const Nonlinearity& f, double lambda, double b, double tol) {
  ShootOptions o;
  o.tol = tol;
  return radial_shoot(f, lambda, b, o);
}

cplx RadialStretch::mu(cplx z) const {
  if (z == 0.0) return 0.0;
  return k() * z / std::conj(z);
}

cplx RadialStretch::omega(cplx z) const { return z == 0.0 ? z : z * std::pow(std::abs(z), K - 1.0); }

cplx RadialStretch::omega_inverse(cplx w) const { return w == 0.0 ? w : w * std::pow(std::abs(w), 1.0 / K - 1.0); }

double RadialStretch::jacobian_inverse(cplx w) const { return std::pow(std::abs(w), 2.0 / K - 2.0) / K; }

SymMatrix2 RadialStretch::matrix(cplx z) const { return mu_to_matrix(mu(z)); }

BeltramiField RadialStretch::sample(const CartesianGrid& grid) const {
  BeltramiField f = BeltramiField::sample(grid, [this](cplx z) { return mu(z); });
  f.k_bound = k();
  return f;
}

RadialStretch radial_stretch_reference(double K) {
  if (!(K >= 1.0) || !std::isfinite(K)) throw ConfigError("radial stretch needs K >= 1");
  return RadialStretch{K};
}

double uniform_disk_potential(cplx z) {
  const double r = std::abs(z);
  return r <= 1.0 ? 0.25 * (r * r - 1.0) : 0.5 * std::log(r);
}

}  // namespace semilin
