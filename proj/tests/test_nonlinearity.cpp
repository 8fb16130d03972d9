#include <cmath>
#include <limits>

#include "doctest.h"
#include "semilin/error.hpp"
#include "semilin/nonlinearity.hpp"

using namespace semilin;

namespace {

void check_envelope(const Nonlinearity& f) {
  double prev = 0.0;
  for (double s = 0.0; s <= 12.0; s += 0.25) {
    const double e = f.envelope(s);
    CHECK(e >= prev);
    prev = e;
    for (double t = -s; t <= s; t += s / 16.0 + 1e-3) CHECK(std::abs(f(t)) <= e * (1.0 + 1e-12) + 1e-300);
  }
}

}  // namespace

TEST_CASE("power nonlinearities") {
  const Nonlinearity p = make_power(0.5);
  CHECK(p(4.0) == doctest::Approx(2.0));
  CHECK(p(-1.0) == 0.0);
  CHECK(p.envelope(9.0) == doctest::Approx(3.0));
  CHECK(p.growth() == GrowthClass::sublinear);
  CHECK(p.positive_part());
  CHECK(p.derivative(-1.0) == 0.0);
  CHECK(p.derivative(4.0) == doctest::Approx(0.25));

  const Nonlinearity s = make_signed_power(0.5);
  CHECK(s(4.0) == doctest::Approx(2.0));
  CHECK(s(-4.0) == doctest::Approx(-2.0));
  CHECK(s(0.0) == 0.0);
  CHECK(s.envelope(4.0) == doctest::Approx(2.0));
  for (double q : {0.0, 1.0, 1.5, -0.2}) {
    CHECK_THROWS_AS(make_power(q), ConfigError);
    CHECK_THROWS_AS(make_signed_power(q), ConfigError);
  }
  check_envelope(p);
  check_envelope(s);
  check_envelope(make_power(0.3).scaled(50.0));
}

TEST_CASE("exponential nonlinearities") {
  const Nonlinearity a = make_exponential(1.0, +1, 10.0);
  CHECK(a(0.0) == doctest::Approx(1.0));
  const Nonlinearity b = make_exponential(0.1, -1, 10.0);
  CHECK(b(1.0) == doctest::Approx(0.1 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(b(1.0) == doctest::Approx(0.03679).epsilon(1e-4));
  const Nonlinearity c = make_exponential(0.1, +1, 10.0);
  CHECK(c(20.0) == doctest::Approx(0.1 * std::exp(10.0)));
  CHECK(c.clamp_active(20.0));
  CHECK_FALSE(c.clamp_active(5.0));
  CHECK(c.growth() == GrowthClass::clamped);
  CHECK(make_exponential(0.1, +1, std::numeric_limits<double>::infinity()).growth() == GrowthClass::unbounded);
  check_envelope(c);
  check_envelope(b);
}

TEST_CASE("sublinearity ladder") {
  CHECK(verify_sublinear(make_power(0.5)));
  CHECK(verify_sublinear(make_signed_power(0.9)));
  CHECK_FALSE(verify_sublinear(make_linear(1.0)));
}

TEST_CASE("a-priori bound examples") {
  CHECK(apriori_bound(make_zero(), 1.0, 2.0, 0.0) == 0.0);
  CHECK(apriori_bound(make_zero(), 1.0, 2.0, 3.0) == doctest::Approx(1.5));

  const double M = 1.0, h = 2.0, c = 0.7;
  const double Bc = apriori_bound(make_constant(c), h, M, 0.0);
  CHECK(Bc <= 3.0 * M * h * c);
  CHECK(Bc >= h * c * (1.0 - 1e-9));

  for (double q : {0.25, 0.5, 0.75}) {
    const double Mq = 0.4, hq = 1.3;
    const double B = apriori_bound(make_power(q), hq, Mq, 0.0);
    const double S = std::pow(3.0 * Mq * hq, 1.0 / (1.0 - q));
    CHECK(3.0 * Mq * B == doctest::Approx(S).epsilon(1e-9));
    // Fixed-point balance: h f_*(3 M B) = B.
    CHECK(hq * std::pow(3.0 * Mq * B, q) == doctest::Approx(B).epsilon(1e-9));
  }

  CHECK_THROWS_WITH(apriori_bound(make_exponential(0.1, 1, std::numeric_limits<double>::infinity()), 1.0, 1.0, 0.0),
                    "no a-priori bound");
  CHECK_THROWS_WITH(apriori_bound(make_linear(1.0), 1.0, 1.0, 0.0), "no a-priori bound");
  CHECK(std::isfinite(apriori_bound(make_exponential(0.1, 1, 10.0), 1.0, 0.3, 0.0)));
}
