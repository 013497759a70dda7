#include <doctest.h>

#include <cmath>
#include <vector>

#include "monostab/error.hpp"
#include "monostab/reaction.hpp"

using namespace monostab;

namespace {

std::vector<Reaction> catalog() {
  return {Reaction::logistic(1.0),
          Reaction::logistic(4.0),
          Reaction::cubic(1.0, 2.0),
          Reaction::cubic(1.0, 0.5),
          Reaction::cubic(3.0, -0.5),
          Reaction::double_hump(39.478, 0.3, 0.01),
          Reaction::double_hump(9.87, 0.45, 1e-4),
          Reaction::interpolated(0.4, Reaction::logistic(2.0), Reaction::cubic(1.0, 2.0))};
}

}  // namespace

TEST_CASE("closed-form values") {
  CHECK(Reaction::logistic(1.0).eval(1.0, 1) == doctest::Approx(-1.0));
  CHECK(Reaction::cubic(1.0, 2.0).eval(0.0, 2) == doctest::Approx(2.0));
  const double m = 20.0, th = 0.35, ep = 0.02;
  const Reaction dh = Reaction::double_hump(m, th, ep);
  const double A = m / (th * th + ep);
  CHECK(dh.eval(th) == doctest::Approx(A * th * (1.0 - th) * ep).epsilon(1e-14));
  CHECK(dh.eval(0.0, 1) == doctest::Approx(m).epsilon(1e-14));
  CHECK(Reaction::logistic(1.0).antiderivative(1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(Reaction::cubic(1.0, 2.0).antiderivative(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("f vanishes exactly at 0 and 1, F(0) = 0") {
  for (const Reaction& r : catalog()) {
    CAPTURE(r.describe());
    CHECK(r.f(0.0) == 0.0);
    CHECK(r.f(1.0) == 0.0);
    CHECK(r.antiderivative(0.0) == 0.0);
    CHECK(r.df(0.0) > 0.0);
    CHECK(r.df(1.0) < 0.0);
    for (int i = 1; i < 1000; ++i) CHECK(r.f(i / 1000.0) > 0.0);
  }
}

TEST_CASE("domain errors") {
  const Reaction r = Reaction::logistic(1.0);
  CHECK_THROWS_AS(r.eval(-0.1), Error);
  CHECK_THROWS_AS(r.eval(1.6), Error);
  CHECK_THROWS_AS(r.eval(0.5, 3), Error);
  CHECK_THROWS_AS(r.antiderivative(1.1), Error);
  CHECK_NOTHROW(r.eval(1.5));
  CHECK_THROWS_AS(Reaction::cubic(1.0, -1.0), Error);
  CHECK_THROWS_AS(Reaction::logistic(-1.0), Error);
}

TEST_CASE("F' = f by centered differences") {
  for (const Reaction& r : catalog()) {
    CAPTURE(r.describe());
    const double scale = r.lipschitz() + std::abs(r.d2f(0.0)) + 1.0;
    for (double h : {1e-3, 1e-4}) {
      double worst = 0.0;
      for (int i = 1; i < 1000; ++i) {
        const double s = i / 1000.0;
        if (s - h < 0.0 || s + h > 1.0) continue;
        const double fd = (r.F(s + h) - r.F(s - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - r.f(s)));
      }
      // O(h^2) truncation plus cancellation in the difference quotient.
      CHECK(worst <= 10.0 * scale * scale * h * h + 1e-11 * scale / h);
    }
  }
}

TEST_CASE("derivatives against finite differences") {
  for (const Reaction& r : catalog()) {
    CAPTURE(r.describe());
    const double h = 1e-5;
    for (double s : {0.1, 0.37, 0.5, 0.81, 1.2}) {
      CHECK(r.df(s) == doctest::Approx((r.f(s + h) - r.f(s - h)) / (2 * h)).epsilon(1e-6));
      CHECK(r.d2f(s) == doctest::Approx((r.df(s + h) - r.df(s - h)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("F_slope is the difference quotient") {
  const Reaction r = Reaction::double_hump(39.478, 0.3, 0.01);
  for (double s : {0.2, 0.6, 0.95})
    for (double z : {0.0, 1e-9, 1e-3, 0.1}) {
      const double expect = z == 0.0 ? r.f(s) : (r.F(s) - r.F(s - z)) / z;
      CHECK(r.F_slope(s, z) == doctest::Approx(expect).epsilon(z < 1e-6 ? 1e-5 : 1e-10));
    }
}

TEST_CASE("classification") {
  const KppClass lg = classify(Reaction::logistic(1.0));
  CHECK(lg.is_strong_kpp());
  CHECK(lg.is_weak_kpp());
  CHECK(lg.is_positive());

  const KppClass c2 = classify(Reaction::cubic(1.0, 2.0));
  CHECK(c2.is_positive());
  CHECK(c2.weak_kpp == Verdict::no);
  CHECK(c2.strong_kpp == Verdict::no);

  const KppClass c05 = classify(Reaction::cubic(1.0, 0.5));
  CHECK(c05.is_weak_kpp());
  CHECK(c05.is_strong_kpp());

  // The double hump: f/s dips and rises again, so not strong-KPP, but the
  // tuned instance stays under f'(0) s.
  const KppClass dh = classify(Reaction::double_hump(39.478, 0.3, 0.01));
  CHECK(dh.is_positive());
  CHECK(dh.is_weak_kpp());
  CHECK(dh.strong_kpp == Verdict::no);
}

TEST_CASE("closed-form classification agrees with the grid check") {
  for (double c : {-0.5, 0.0, 0.5, 0.9, 1.5, 2.0, 5.0}) {
    CAPTURE(c);
    const Reaction r = Reaction::cubic(2.0, c);
    const KppClass a = classify(r), b = classify_on_grid(r);
    CHECK(a.positive == b.positive);
    CHECK(a.weak_kpp == b.weak_kpp);
    CHECK(a.strong_kpp == b.strong_kpp);
  }
}

TEST_CASE("class hierarchy strong => weak => positive") {
  for (const Reaction& r : catalog()) {
    const KppClass k = classify(r);
    if (k.is_strong_kpp()) CHECK(k.is_weak_kpp());
    if (k.is_weak_kpp()) CHECK(k.is_positive());
    CHECK(k.lipschitz >= std::abs(r.df(0.0)));
    CHECK(k.lipschitz >= std::abs(r.df(1.0)));
  }
}

TEST_CASE("interpolation keeps positivity and weak-KPP") {
  const Reaction f0 = Reaction::logistic(39.478);
  const Reaction f1 = Reaction::double_hump(39.478, 0.3, 0.01);
  for (int i = 0; i <= 100; ++i) {
    const Reaction r = Reaction::interpolated(i / 100.0, f0, f1);
    CAPTURE(i);
    CHECK(classify(r).is_positive());
    if (i % 10 == 0) CHECK(classify(r).is_weak_kpp());
  }
  const Reaction mid = Reaction::interpolated(0.25, f0, f1);
  for (double s : {0.1, 0.5, 0.9})
    CHECK(mid.f(s) == doctest::Approx(0.75 * f0.f(s) + 0.25 * f1.f(s)).epsilon(1e-13));
}

TEST_CASE("JSON round trip is exact") {
  for (const Reaction& r : catalog()) {
    const nlohmann::json j = r.to_json();
    const Reaction back = Reaction::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.family() == r.family());
    for (double s : {0.0, 0.13, 0.5, 0.77, 1.0}) CHECK(back.f(s) == r.f(s));
  }
  CHECK_THROWS_AS(Reaction::from_json({{"family", "quartic"}, {"params", {{"m", 1.0}}}}), Error);
  CHECK_THROWS_AS(Reaction::from_json({{"family", "logistic"}, {"params", nlohmann::json::object()}}),
                  Error);
}
