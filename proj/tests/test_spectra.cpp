#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "monostab/error.hpp"
#include "monostab/grid2d.hpp"
#include "monostab/shoot1d.hpp"
#include "monostab/spectra.hpp"

using namespace monostab;
using std::numbers::pi;

TEST_CASE("eigen1d: free interval") {
  const SpectralResult s = eigen1d([](double) { return 0.0; }, 1.0, 401, 2);
  CHECK(s.lambda1 == doctest::Approx(pi * pi).epsilon(1e-5));
  REQUIRE(s.lambda2);
  CHECK(std::abs(*s.lambda2 - 4 * pi * pi) <= 1e-4);
  CHECK(s.extrapolated);
  for (double v : s.vec1) CHECK(v > 0.0);
  CHECK(*std::max_element(s.vec1.begin(), s.vec1.end()) == doctest::Approx(1.0));
  CHECK(s.residual <= 1e-8 * (1 + std::abs(s.lambda1_grid)));
}

TEST_CASE("eigen1d: constant potential at the critical length") {
  for (double m : {1.0, 4.0, 39.478}) {
    const SpectralResult s = eigen1d([m](double) { return m; }, pi / std::sqrt(m), 801);
    CHECK(std::abs(s.lambda1) <= 1e-6);
  }
}

TEST_CASE("eigen1d: cubic dip is unstable with one negative eigenvalue") {
  const Reaction r = Reaction::cubic(1.0, 2.0);
  const LengthCurve c = length_curve(r, 64);
  const auto it = std::min_element(c.dlengths.begin(), c.dlengths.end());
  REQUIRE(*it < 0.0);
  const double a = c.alphas[static_cast<std::size_t>(it - c.dlengths.begin())];
  const ShootRecord rec = shoot(r, a);
  const SpectralResult s =
      eigen1d([&](double x) { return r.df(rec.phi_at(x)); }, rec.length, 801, 2);
  CHECK(s.lambda1 < 0.0);
  REQUIRE(s.lambda2);
  CHECK(*s.lambda2 > 0.0);
}

TEST_CASE("eigen1d: monotone in the potential") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(-3.0, 3.0), P(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    CAPTURE(t);
    std::vector<double> q(201), qt(201);
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = U(rng);
      qt[i] = q[i] + (P(rng) < 0.5 ? 0.0 : P(rng));
    }
    const double l = eigen1d(q, 2.0).lambda1_grid, lt = eigen1d(qt, 2.0).lambda1_grid;
    CHECK(lt <= l + 1e-12);
  }
}

TEST_CASE("eigen2d: monotone in the potential") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-5.0, 5.0), P(0.0, 2.0);
  const MaskPtr m = build_mask(shape::Rectangle{1.0, 1.0}, 1.0 / 16.0);
  for (int t = 0; t < 5; ++t) {
    Field2D q(m), qt(m);
    for (std::size_t k = 0; k < m->size(); ++k)
      if (m->inside(k)) {
        q[k] = U(rng);
        qt[k] = q[k] + P(rng);
      }
    CHECK(eigen2d(qt).lambda1_grid <= eigen2d(q).lambda1_grid + 1e-10);
  }
}

TEST_CASE("eigen2d: separable problems") {
  const MaskPtr sq = build_mask(shape::Rectangle{1.0, 1.0}, 1.0 / 64.0);
  const SpectralResult s = dirichlet_laplacian(sq, 2);
  CHECK(s.lambda1_grid == doctest::Approx(2 * pi * pi).epsilon(0.005));
  REQUIRE(s.lambda2_grid);
  CHECK(*s.lambda2_grid == doctest::Approx(5 * pi * pi).epsilon(0.005));
  std::size_t inside = 0, positive = 0;
  for (std::size_t k = 0; k < sq->size(); ++k)
    if (sq->inside(k)) {
      ++inside;
      positive += s.vec1[k] > 0.0;
    }
  CHECK(positive == inside);
  CHECK(s.residual <= 1e-8 * (1 + s.lambda1_grid));

  const MaskPtr strip = build_mask(shape::Strip{1.0, 4.0}, 1.0 / 32.0);
  CHECK(dirichlet_laplacian(strip).lambda1_grid ==
        doctest::Approx(pi * pi * (1 + 1.0 / 16.0)).epsilon(0.005));
}

TEST_CASE("eigen2d: domain monotonicity on nested rectangles") {
  const double h = 1.0 / 32.0;
  double prev = INFINITY;
  for (double w : {0.5, 0.75, 1.0, 1.5, 2.0}) {
    const double l = dirichlet_laplacian(build_mask(shape::Rectangle{w, 1.0}, h)).lambda1_grid;
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("disk constant and its radial cross-check") {
  const double radial = disk_constant_radial();
  CHECK(radial == doctest::Approx(5.783186).epsilon(1e-5));
  CHECK(disk_constant(1.0 / 32.0) == doctest::Approx(radial).epsilon(0.01));
}

TEST_CASE("product lemma: free strip gap is pi^2 / (2T)^2") {
  std::vector<double> q(31, 0.0);  // h = 1/32
  const auto rows = product_lemma_check(q, 1.0, {1.0, 2.0, 4.0});
  double prev = INFINITY;
  for (const auto& row : rows) {
    CHECK(row.gap == doctest::Approx(pi * pi / (4 * row.T * row.T)).epsilon(0.01));
    CHECK(row.lambda_strip < prev);
    prev = row.lambda_strip;
  }
}

TEST_CASE("product lemma with a profile potential") {
  const Reaction r = Reaction::logistic(1.0);
  const HalfLineProfile p = halfline_profile(r, 10.0);
  const double L = 4.0, h = 1.0 / 16.0;
  std::vector<double> q(63);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double x = (i + 1) * h;
    q[i] = r.df(p.value(std::min(x, L - x)));
  }
  const auto rows = product_lemma_check(q, L, {2.0, 4.0, 8.0});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].gap > 0.0);
    if (i) CHECK(rows[i].lambda_strip < rows[i - 1].lambda_strip);
  }
  CHECK(rows.back().gap <= 0.05);
}

TEST_CASE("half-line linearization is stable and truncation-insensitive") {
  const Reaction r = Reaction::logistic(1.0);
  const HalfLineProfile p = halfline_profile(r, 41.0);
  auto q = [&](double x) { return r.df(p.value(x)); };
  const double l20 = eigen1d(q, 20.0, 2001).lambda1;
  const double l40 = eigen1d(q, 40.0, 4001).lambda1;
  CHECK(l40 > 0.0);
  CHECK(l40 <= 1.0);
  CHECK(std::abs(l20 - l40) <= 1e-3);
}

TEST_CASE("positivity radius") {
  const Reaction lg = Reaction::logistic(1.0);
  CHECK(positivity_rate(lg, 0.5) == doctest::Approx(0.5));
  CHECK(radius_of_positivity(lg, 0.5, 1) == doctest::Approx(pi / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(radius_of_positivity(lg, 0.5, 2) == doctest::Approx(3.4009).epsilon(1e-3));
  const Reaction cu = Reaction::cubic(1.0, 2.0);
  CHECK(positivity_rate(cu, 0.5) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(radius_of_positivity(cu, 0.5, 1) == doctest::Approx(pi / 2).epsilon(1e-8));
  CHECK_THROWS_AS(radius_of_positivity(lg, 0.5, 4), Error);
}

TEST_CASE("Lieb inequality on simple domains") {
  const double h = 1.0 / 32.0;
  SUBCASE("unit square") {
    const Field2D V(build_mask(shape::Rectangle{1.0, 1.0}, h));
    const LiebReport rep = lieb_check(V, 0.5, 16, 1);
    CHECK(rep.holds());
    CHECK(rep.slack > 0.0);
    CHECK(rep.centers_evaluated > 0);
  }
  SUBCASE("4 x 1 rectangle prefers the middle") {
    const Field2D V(build_mask(shape::Rectangle{4.0, 1.0}, h));
    const LiebReport rep = lieb_check(V, 0.5, 40, 2);
    CHECK(rep.holds());
    CHECK(rep.best_y == doctest::Approx(0.5).epsilon(0.15));
    CHECK(rep.best_x > 0.5);
    CHECK(rep.best_x < 3.5);
  }
  CHECK_THROWS_AS(lieb_check(Field2D(build_mask(shape::Rectangle{1.0, 1.0}, h)), 2 * h, 4, 1),
                  Error);
}
