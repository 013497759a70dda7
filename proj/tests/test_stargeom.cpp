#include <doctest.h>

#include <cmath>
#include <numbers>

#include "monostab/error.hpp"
#include "monostab/stargeom.hpp"

using namespace monostab;

namespace {

// Orientation test for the convex-hull oracle.
double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

std::vector<Point> convex_hull(std::vector<Point> p) {
  std::sort(p.begin(), p.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k > 0 ? k - 1 : 0);
  return h;
}

}  // namespace

TEST_CASE("polygon basics") {
  const Polygon sq = Polygon::square(2.0);
  CHECK(sq.area() == doctest::Approx(4.0));
  CHECK(sq.diameter() == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(sq.contains({1.0, 0.0}));
  CHECK_FALSE(sq.contains({1.01, 0.0}));
  // Clockwise input is reoriented.
  const Polygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  CHECK(cw.area() == doctest::Approx(1.0));
  CHECK_THROWS_AS(Polygon({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {3, 1}}), Error);  // self-crossing
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}}), Error);
  const Polygon back = Polygon::from_json(Polygon::l_shape().to_json());
  CHECK(back.area() == doctest::Approx(Polygon::l_shape().area()));
  CHECK(sq.scaled(0.5).area() == doctest::Approx(1.0));
}

TEST_CASE("star centers") {
  const Polygon hex = Polygon::regular(6);
  CHECK(is_star_center(hex, {0.0, 0.0}));
  CHECK_FALSE(is_star_center(Polygon::square(), {2.0, 0.0}));
  const Polygon hg = Polygon::hourglass();
  CHECK(is_star_center(hg, {0.0, 0.0}));
  CHECK_FALSE(is_star_center(hg, {0.01, 0.3}));
  CHECK_FALSE(is_star_center(hg, {0.5, 0.5}));
  const Polygon L = Polygon::l_shape();
  CHECK(is_star_center(L, {-0.5, -0.5}));
  CHECK_FALSE(is_star_center(L, {0.75, 0.25}));
}

TEST_CASE("kernel estimates") {
  const KernelEstimate sq = star_center_set(Polygon::square(), 32);
  CHECK(sq.area_ratio == doctest::Approx(1.0).epsilon(0.15));
  CHECK(sq.strongly_star_shaped);

  const KernelEstimate l = star_center_set(Polygon::l_shape(), 32);
  CHECK(l.strongly_star_shaped);
  CHECK(l.area_ratio > 0.05);
  CHECK(l.area_ratio < 1.0);

  const KernelEstimate h32 = star_center_set(Polygon::hourglass(), 32);
  const KernelEstimate h64 = star_center_set(Polygon::hourglass(), 64);
  CHECK_FALSE(h32.strongly_star_shaped);
  CHECK_FALSE(h64.strongly_star_shaped);
  CHECK(h64.area <= h32.area);
}

TEST_CASE("kernel is convex") {
  const Polygon L = Polygon::l_shape(0.2);
  const KernelEstimate k = star_center_set(L, 48);
  REQUIRE(k.centers.size() >= 3);
  for (const Point& p : convex_hull(k.centers)) CHECK(is_star_center(L, p));
}

TEST_CASE("rays from a kernel disk are transversal") {
  for (const Polygon& p : {Polygon::square(), Polygon::l_shape(), Polygon::regular(6)}) {
    const KernelEstimate k = star_center_set(p, 32);
    REQUIRE(k.strongly_star_shaped);
    CHECK(min_transversality_angle(p, k.disk_center) > kTransversalityThreshold);
  }
}

TEST_CASE("dilation separation") {
  const Polygon hex = Polygon::regular(6);
  const double apothem = std::sqrt(3.0) / 2.0;
  for (double kappa : {1.5, 2.0, 4.0})
    CHECK(std::abs(dilation_separation(hex, kappa) - (kappa - 1.0) * apothem) <= 1e-3);

  const Polygon L = Polygon::l_shape();
  // Centre L at a kernel point so 0 is a star center.
  std::vector<Point> v = L.vertices();
  for (Point& q : v) {
    q.x += 0.5;
    q.y += 0.5;
  }
  const Polygon Lc(v);
  double prev = 0.0;
  for (double kappa : {1.01, 2.0, 4.0, 8.0}) {
    const double s = dilation_separation(Lc, kappa);
    CHECK(s > prev);
    prev = s;
  }
  for (double c : {0.5, 2.0})
    CHECK(dilation_separation(Lc.scaled(c), 2.0) ==
          doctest::Approx(c * dilation_separation(Lc, 2.0)).epsilon(1e-3));

  try {
    dilation_separation(Polygon::square(1.0, {3.0, 3.0}), 2.0);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_star_shaped);
  }
}

TEST_CASE("sampling refinement changes little") {
  const Polygon L = Polygon::l_shape();
  std::vector<Point> v = L.vertices();
  for (Point& q : v) {
    q.x += 0.5;
    q.y += 0.5;
  }
  const Polygon Lc(v);
  const double s1 = dilation_separation(Lc, 3.0, 512);
  const double s2 = dilation_separation(Lc, 3.0, 1024);
  CHECK(std::abs(s1 - s2) <= 1e-3 * Lc.diameter());
}

TEST_CASE("point-segment distance") {
  CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(point_segment_distance({3, 4}, {0, 0}, {0, 0}) == doctest::Approx(5.0));
  CHECK(point_segment_distance({2, 1}, {-1, 0}, {1, 0}) == doctest::Approx(std::sqrt(2.0)));
}
