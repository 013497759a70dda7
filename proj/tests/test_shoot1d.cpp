#include <doctest.h>

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "monostab/error.hpp"
#include "monostab/shoot1d.hpp"
#include "monostab/spectra.hpp"

using namespace monostab;
using std::numbers::pi;

namespace {

// Height oracle: 2F(s) = alpha^2 by bracketing on the closed-form F.
double height_oracle(const Reaction& r, double alpha) {
  auto g = [&](double s) { return 2.0 * r.F(s) - alpha * alpha; };
  boost::uintmax_t it = 200;
  const auto [a, b] =
      boost::math::tools::toms748_solve(g, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("alpha* from the energy identity") {
  CHECK(alpha_star(Reaction::logistic(1.0)) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
  CHECK(alpha_star(Reaction::cubic(1.0, 2.0)) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(alpha_star(Reaction::logistic(4.0)) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("small-slope limit length is pi m^-1/2") {
  CHECK(std::abs(shoot(Reaction::logistic(1.0), 1e-3).length - pi) <= 2e-3);
  CHECK(std::abs(length_by_quadrature(Reaction::logistic(1.0), 1e-3) - pi) <= 2e-3);
  CHECK(std::abs(length_by_quadrature(Reaction::cubic(1.0, 2.0), 1e-3) - pi) <= 2e-3);
  CHECK(std::abs(length_by_quadrature(Reaction::logistic(4.0), 1e-3) - pi / 2.0) <= 1e-3);
}

TEST_CASE("shoot record invariants") {
  const Reaction r = Reaction::logistic(1.0);
  const ShootRecord rec = shoot(r, 0.5);
  CHECK(rec.s_max == doctest::Approx(height_oracle(r, 0.5)).epsilon(1e-10));
  CHECK(std::abs(0.25 - 2.0 * r.F(rec.s_max)) <= 1e-8);
  CHECK(rec.energy_residual <= 1e-8);
  REQUIRE(!rec.profile.empty());
  CHECK(rec.profile.front().x == 0.0);
  CHECK(rec.profile.front().phi == 0.0);
  CHECK(rec.profile.front().dphi == 0.5);
  CHECK(rec.profile.back().x == doctest::Approx(rec.length).epsilon(1e-12));
  CHECK(std::abs(rec.profile.back().phi) <= 1e-10);
  CHECK(rec.profile.back().dphi == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(rec.x_at_max == doctest::Approx(rec.length / 2.0).epsilon(1e-8));
}

TEST_CASE("reflection symmetry about the maximum") {
  const ShootRecord rec = shoot(Reaction::cubic(1.0, 2.0), 0.4);
  const double c = rec.length / 2.0;
  for (double t : {0.1, 0.5, 1.0, 0.9 * c})
    CHECK(std::abs(rec.phi_at(c + t) - rec.phi_at(c - t)) <= 1e-8);
}

TEST_CASE("slope out of range") {
  const Reaction r = Reaction::logistic(1.0);
  CHECK_THROWS_AS(shoot(r, alpha_star(r)), Error);
  CHECK_THROWS_AS(shoot(r, 1.0), Error);
  try {
    shoot(r, 0.7);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::slope_out_of_range);
  }
}

TEST_CASE("shooting and quadrature agree") {
  for (const Reaction& r : {Reaction::logistic(1.0), Reaction::cubic(1.0, 2.0),
                            Reaction::double_hump(39.478, 0.3, 0.01)}) {
    CAPTURE(r.describe());
    const double as = alpha_star(r);
    for (int i = 1; i <= 10; ++i) {
      const double a = as * i / 11.0;
      CHECK(std::abs(shoot(r, a).length - length_by_quadrature(r, a)) <= 1e-6);
    }
  }
}

TEST_CASE("energy residual is fourth order in the step") {
  const Reaction r = Reaction::logistic(1.0);
  const double e1 = shoot(r, 0.5, {.step = 0.08}).energy_residual;
  const double e2 = shoot(r, 0.5, {.step = 0.04}).energy_residual;
  const double e3 = shoot(r, 0.5, {.step = 0.02}).energy_residual;
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
  CHECK(e2 / e3 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("length curves") {
  SUBCASE("logistic: increasing") {
    const LengthCurve c = length_curve(Reaction::logistic(1.0), 64);
    for (double d : c.dlengths) CHECK(d > 0.0);
    CHECK(c.sign_changes.empty());
    for (double L : c.lengths) CHECK(L > pi);
  }
  SUBCASE("cubic c = 2 dips below pi") {
    const LengthCurve c = length_curve(Reaction::cubic(1.0, 2.0), 64);
    CHECK(*std::min_element(c.dlengths.begin(), c.dlengths.end()) < 0.0);
    CHECK(*std::min_element(c.lengths.begin(), c.lengths.end()) < pi);
  }
  SUBCASE("cubic c = 0.5 stays above pi") {
    const LengthCurve c = length_curve(Reaction::cubic(1.0, 0.5), 64);
    for (double L : c.lengths) CHECK(L > pi);
  }
  SUBCASE("heights increase with alpha") {
    const LengthCurve c = length_curve(Reaction::double_hump(39.478, 0.3, 0.01), 64);
    for (std::size_t i = 1; i < c.alphas.size(); ++i) {
      CHECK(c.alphas[i] > c.alphas[i - 1]);
      CHECK(c.s_max[i] > c.s_max[i - 1]);
      CHECK(c.lengths[i] > 0.0);
    }
    CHECK(c.sign_changes.size() >= 2);
  }
}

TEST_CASE("tuned double hump has equal lengths at distinct slopes") {
  const Reaction r = Reaction::double_hump(39.478, 0.3, 0.01);
  const LengthCurve c = length_curve(r, 200);
  REQUIRE(c.sign_changes.size() >= 2);
  // L(alpha) = 1 is hit on both sides of the first local maximum.
  auto g = [&](double a) { return length_by_quadrature(r, a) - 1.0; };
  const double a_peak = c.alphas[c.sign_changes[0]];
  const double a_valley = c.alphas[c.sign_changes[1]];
  boost::uintmax_t it = 100;
  const auto tol = boost::math::tools::eps_tolerance<double>(50);
  const auto [a1, b1] = boost::math::tools::toms748_solve(g, c.alphas.front(), a_peak, tol, it);
  it = 100;
  const auto [a2, b2] = boost::math::tools::toms748_solve(g, a_peak, a_valley, tol, it);
  const double alpha1 = 0.5 * (a1 + b1), alpha2 = 0.5 * (a2 + b2);
  CHECK(alpha2 - alpha1 > 1e-3);
  CHECK(std::abs(length_by_quadrature(r, alpha1) - length_by_quadrature(r, alpha2)) <= 1e-6);
}

TEST_CASE("half-line profile") {
  const Reaction r = Reaction::logistic(1.0);
  const HalfLineProfile p = halfline_profile(r, 30.0);
  CHECK(p.samples.front().phi == 0.0);
  CHECK(p.samples.front().dphi == doctest::Approx(alpha_star(r)).epsilon(1e-12));
  CHECK(p.decay_rate == doctest::Approx(1.0));
  double worst = 0.0;
  for (const auto& s : p.samples) {
    CHECK(s.dphi > 0.0);
    worst = std::max(worst, std::abs(s.ddphi + r.f(s.phi)));
  }
  CHECK(worst <= 1e-6);
  // Tail slope of log(1 - phi) is -1 for x >= 5.
  const double l5 = std::log(1.0 - p.value(8.0)), l15 = std::log(1.0 - p.value(15.0));
  CHECK((l15 - l5) / 7.0 == doctest::Approx(-1.0).epsilon(0.01));
  CHECK(p.value(-1.0) == 0.0);
  CHECK(p.value(35.0) > p.value(30.0));
  CHECK(p.value(40.0) <= 1.0);
}

TEST_CASE("radial exterior profiles") {
  const Reaction r = Reaction::logistic(1.0);
  const RadialProfile p2 = radial_exterior(r, 2, 1.0, 28.0);
  const RadialProfile p3 = radial_exterior(r, 3, 1.0, 28.0);
  for (const RadialProfile* p : {&p2, &p3}) {
    for (std::size_t i = 1; i < p->samples.size(); ++i)
      CHECK(p->samples[i].phi > p->samples[i - 1].phi);
    CHECK(p->samples.back().phi >= 1.0 - 1e-6);
    CHECK(p->samples.back().phi <= 1.0);
    // Positivity radius: u >= 1/2 at distance R from the inner boundary.
    // The 3-D ball constant pi^2 is closed form; the planar one is computed.
    const double R = p->dim == 2 ? radius_of_positivity(r, 0.5, 2)
                                 : pi / std::sqrt(positivity_rate(r, 0.5));
    CHECK(p->value(1.0 + R) >= 0.5);
  }
  CHECK(p3.slope > p2.slope);
  CHECK(p2.slope > alpha_star(r));
}
