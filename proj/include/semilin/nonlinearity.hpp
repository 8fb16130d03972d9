#pragma once

#include <functional>
#include <limits>
#include <string>

namespace semilin {

enum class GrowthClass { bounded, sublinear, clamped, unbounded };

const char* growth_name(GrowthClass g);

class Nonlinearity {
 public:
  using Fn = std::function<double(double)>;

  Nonlinearity(std::string name, Fn f, Fn df, Fn envelope, GrowthClass growth);

  double operator()(double u) const { return f_(u); }
  double eval(double u) const { return f_(u); }
  double derivative(double u) const { return df_(u); }
  // f_*(s) = max_{|t| <= s} |f(t)|.
  double envelope(double s) const { return env_(s); }
  GrowthClass growth() const { return growth_; }
  const std::string& name() const { return name_; }

  // Clamp threshold T on the exponent; infinite when no clamp applies.
  double clamp_threshold() const { return clamp_; }
  bool clamp_active(double u) const;
  // Exponent q for the power families, 0 otherwise.
  double power() const { return q_; }
  bool positive_part() const { return positive_part_; }
  double scale() const { return scale_; }

  Nonlinearity scaled(double lambda) const;

 private:
  friend Nonlinearity make_power(double);
  friend Nonlinearity make_signed_power(double);
  friend Nonlinearity make_exponential(double, int, double);

  std::string name_;
  Fn f_, df_, env_;
  GrowthClass growth_;
  double clamp_ = std::numeric_limits<double>::infinity();
  double clamp_sign_ = 1.0;
  double q_ = 0.0;
  bool positive_part_ = false;
  double scale_ = 1.0;
};

// max(u, 0)^q.
Nonlinearity make_power(double q);
// |u|^{q-1} u.
Nonlinearity make_signed_power(double q);
// delta exp(min(sign u, clamp)); an infinite clamp gives the unbounded exponential.
Nonlinearity make_exponential(double delta, int sign, double clamp = 10.0);
Nonlinearity make_constant(double c);
Nonlinearity make_zero();
Nonlinearity make_linear(double c = 1.0);

// envelope(s)/s decreasing along s = 2^k on the tail of the ladder up to 2^30.
bool verify_sublinear(const Nonlinearity& f);

// Bound B on ||g||_p for every fixed point g = tau h f(N_g - P_{N*g} + P_phi):
// B = max(phi_sup / M, S / (3 M)) with S = sup{s : f_*(s) / s >= 1 / (3 M ||h||_p)}.
double apriori_bound(const Nonlinearity& f, double h_norm_p, double M, double phi_sup);

}  // namespace semilin
