#include "semilin/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

#include "semilin/error.hpp"
#include "semilin/fields.hpp"

namespace semilin {

const char* growth_name(GrowthClass g) {
  switch (g) {
    case GrowthClass::bounded: return "bounded";
    case GrowthClass::sublinear: return "sublinear";
    case GrowthClass::clamped: return "clamped";
    case GrowthClass::unbounded: return "unbounded";
  }
  return "unknown";
}

Nonlinearity::Nonlinearity(std::string name, Fn f, Fn df, Fn envelope, GrowthClass growth)
    : name_(std::move(name)), f_(std::move(f)), df_(std::move(df)), env_(std::move(envelope)), growth_(growth) {}

bool Nonlinearity::clamp_active(double u) const { return std::isfinite(clamp_) && clamp_sign_ * u > clamp_; }

Nonlinearity Nonlinearity::scaled(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("scale must be finite and >= 0");
  Nonlinearity out = *this;
  out.name_ = format_double(lambda) + "*" + name_;
  out.f_ = [f = f_, lambda](double u) { return lambda * f(u); };
  out.df_ = [f = df_, lambda](double u) { return lambda * f(u); };
  out.env_ = [f = env_, lambda](double s) { return lambda * f(s); };
  out.scale_ = scale_ * lambda;
  return out;
}

namespace {

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("power exponent q must lie in (0,1), got " + format_double(q));
}

// Derivative cap for u^{q-1} near zero.
constexpr double kPowerFloor = 1e-12;

}  // namespace

Nonlinearity make_power(double q) {
  check_q(q);
  Nonlinearity f(
      "power(" + format_double(q) + ")", [q](double u) { return u > 0.0 ? std::pow(u, q) : 0.0; },
      [q](double u) { return u > 0.0 ? q * std::pow(std::max(u, kPowerFloor), q - 1.0) : 0.0; },
      [q](double s) { return s > 0.0 ? std::pow(s, q) : 0.0; }, GrowthClass::sublinear);
  f.q_ = q;
  f.positive_part_ = true;
  return f;
}

Nonlinearity make_signed_power(double q) {
  check_q(q);
  Nonlinearity f(
      "signed_power(" + format_double(q) + ")",
      [q](double u) { return u == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(u), q), u); },
      [q](double u) { return q * std::pow(std::max(std::abs(u), kPowerFloor), q - 1.0); },
      [q](double s) { return s > 0.0 ? std::pow(s, q) : 0.0; }, GrowthClass::sublinear);
  f.q_ = q;
  return f;
}

Nonlinearity make_exponential(double delta, int sign, double clamp) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("exponential delta must be > 0");
  if (sign != 1 && sign != -1) throw ConfigError("exponential sign must be +1 or -1");
  if (std::isnan(clamp)) throw ConfigError("exponential clamp must be a number");
  const double s = sign;
  Nonlinearity f(
      "exponential(" + format_double(delta) + "," + std::to_string(sign) + "," + format_double(clamp) + ")",
      [delta, s, clamp](double u) { return delta * std::exp(std::min(s * u, clamp)); },
      [delta, s, clamp](double u) { return s * u < clamp ? s * delta * std::exp(s * u) : 0.0; },
      [delta, clamp](double x) { return delta * std::exp(std::min(std::max(x, 0.0), clamp)); },
      std::isfinite(clamp) ? GrowthClass::clamped : GrowthClass::unbounded);
  f.clamp_ = clamp;
  f.clamp_sign_ = s;
  return f;
}

Nonlinearity make_constant(double c) {
  if (!std::isfinite(c)) throw ConfigError("constant nonlinearity must be finite");
  return Nonlinearity(
      "constant(" + format_double(c) + ")", [c](double) { return c; }, [](double) { return 0.0; },
      [c](double) { return std::abs(c); }, GrowthClass::bounded);
}

Nonlinearity make_zero() {
  return Nonlinearity(
      "zero", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
      GrowthClass::bounded);
}

Nonlinearity make_linear(double c) {
  if (!std::isfinite(c)) throw ConfigError("linear coefficient must be finite");
  return Nonlinearity(
      "linear(" + format_double(c) + ")", [c](double u) { return c * u; }, [c](double) { return c; },
      [c](double s) { return std::abs(c) * std::max(s, 0.0); }, GrowthClass::unbounded);
}

bool verify_sublinear(const Nonlinearity& f) {
  double prev = f.envelope(std::ldexp(1.0, 15)) / std::ldexp(1.0, 15);
  for (int k = 16; k <= 30; ++k) {
    const double s = std::ldexp(1.0, k);
    const double r = f.envelope(s) / s;
    if (!std::isfinite(r) || !(r < prev)) return false;
    prev = r;
  }
  return true;
}

double apriori_bound(const Nonlinearity& f, double h_norm_p, double M, double phi_sup) {
  if (!(M > 0.0)) throw Error("a-priori bound needs M > 0");
  if (!(h_norm_p >= 0.0) || !(phi_sup >= 0.0)) throw Error("a-priori bound needs nonnegative norms");
  const double floor_term = phi_sup / M;
  if (f.growth() == GrowthClass::unbounded) throw Error("no a-priori bound");
  if (f.growth() == GrowthClass::sublinear && !verify_sublinear(f)) throw Error("no a-priori bound");
  if (h_norm_p == 0.0) return floor_term;
  const double c = 1.0 / (3.0 * M * h_norm_p);
  auto ratio = [&](double s) { return f.envelope(s) / s; };
  double hi = std::ldexp(1.0, 60);
  if (ratio(hi) >= c) throw Error("no a-priori bound");
  double lo = hi;
  while (lo > std::ldexp(1.0, -60) && ratio(lo) < c) lo *= 0.5;
  if (ratio(lo) < c) return floor_term;
  hi = 2.0 * lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) >= c ? lo : hi) = mid;
  }
  return std::max(floor_term, hi / (3.0 * M));
}

}  // namespace semilin
