#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include "monostab/error.hpp"
#include "monostab/grid2d.hpp"
#include "monostab/shoot1d.hpp"
#include "monostab/spectra.hpp"

using namespace monostab;
using std::numbers::pi;

namespace {

const Reaction kHump = Reaction::double_hump(4.0 * pi * pi, 0.3, 0.01);

Field2D random_field(const MaskPtr& m, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Field2D f(m);
  for (std::size_t k = 0; k < m->size(); ++k)
    if (m->inside(k)) f[k] = U(rng);
  return f;
}

}  // namespace

TEST_CASE("mask builders") {
  SUBCASE("rectangle") {
    const MaskPtr m = build_mask(shape::Rectangle{1.0, 1.0}, 1.0 / 64.0);
    CHECK(m->count() == 63 * 63);
    CHECK(m->is_connected());
    CHECK(m->boundary_nodes().size() == 4 * 61 + 4);
    for (std::size_t i = 0; i < m->nx(); ++i) {
      CHECK_FALSE(m->inside(i, 0));
      CHECK_FALSE(m->inside(i, m->ny() - 1));
    }
  }
  SUBCASE("pocket bridge") {
    const double h = 0.0125;
    const MaskPtr m = build_mask(shape::Pocket{1.0, 1.0, 0.05, 3.0}, h);
    CHECK(m->is_connected());
    // Bridge midpoint column: nodes strictly inside |y - yc| < delta.
    const auto mid = m->locate(3.0 + 1.0, 1.5);
    REQUIRE(mid);
    const std::size_t i = *mid % m->nx();
    std::size_t across = 0;
    for (std::size_t j = 0; j < m->ny(); ++j) across += m->inside(i, j);
    CHECK(across == 7);  // 8 cells between the two outside rows
  }
  SUBCASE("wells") {
    const MaskPtr m = build_mask(shape::Wells{0.5, {1.0, 2.0, 4.0}, 3.0, 1.0}, 1.0 / 16.0);
    CHECK(m->is_connected());
    CHECK(m->locate(0.75, -0.9).has_value());   // inside the first well
    CHECK_FALSE(m->locate(0.75, -1.2).has_value());
    CHECK(m->locate(2.25, -3.9).has_value());   // bottom of the deepest well
    CHECK_FALSE(m->locate(1.1, -0.5).has_value());  // between wells
  }
  SUBCASE("interval is a line") {
    const MaskPtr m = build_mask(shape::Interval{2.0}, 0.1);
    CHECK(m->topology() == Topology::line);
    CHECK(m->count() == 19);
    CHECK(m->boundary_nodes().size() == 2);
  }
  SUBCASE("disk and annulus carry boundary fits") {
    CHECK_FALSE(build_mask(shape::Disk{1.0}, 0.1)->boundary_fit().empty());
    const MaskPtr a = build_mask(shape::Annulus{1.0, 3.0}, 0.1);
    CHECK_FALSE(a->boundary_fit().empty());
    for (const BoundaryFit& f : a->boundary_fit())
      for (double t : f.theta) {
        CHECK(t > 0.0);
        CHECK(t <= 1.0);
      }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_mask(shape::Rectangle{-1.0, 1.0}, 0.1), Error);
    CHECK_THROWS_AS(build_mask(shape::Annulus{2.0, 1.0}, 0.1), Error);
    CHECK_THROWS_AS(build_mask(shape::Rectangle{1.0, 1.0}, 0.0), Error);
    std::vector<std::uint8_t> bits(10 * 10, 0);
    bits[2 * 10 + 2] = bits[7 * 10 + 7] = 1;
    try {
      mask_from_bitmap(10, 10, 0.1, bits);
      FAIL("disconnected bitmap accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::disconnected_mask);
    }
  }
}

TEST_CASE("distance transform") {
  SUBCASE("matches brute force") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 4; ++t) {
      std::vector<std::uint8_t> bits(40 * 30, 0);
      std::uniform_int_distribution<int> X(2, 30), Y(2, 20), W(3, 8);
      for (int r = 0; r < 5; ++r) {
        const int x0 = X(rng), y0 = Y(rng), w = W(rng), hgt = W(rng);
        for (int j = y0; j < std::min(y0 + hgt, 29); ++j)
          for (int i = x0; i < std::min(x0 + w, 39); ++i) bits[j * 40 + i] = 1;
      }
      MaskPtr m;
      try {
        m = mask_from_bitmap(40, 30, 0.1, bits);
      } catch (const Error&) {
        continue;
      }
      const Field2D a = distance_to_boundary(m), b = distance_to_boundary_bruteforce(m);
      CHECK(sup_distance(a, b) <= 1e-12);
    }
    const MaskPtr ann = build_mask(shape::Annulus{1.0, 2.0}, 0.05);
    CHECK(sup_distance(distance_to_boundary(ann), distance_to_boundary_bruteforce(ann)) <= 1e-12);
  }
  SUBCASE("geometric examples") {
    const double h = 1.0 / 32.0;
    const MaskPtr sq = build_mask(shape::Rectangle{1.0, 1.0}, h);
    const Field2D d = distance_to_boundary(sq);
    CHECK(std::abs(d[*sq->locate(0.5, 0.5)] - 0.5) <= h);
    const MaskPtr st = build_mask(shape::Strip{1.0, 6.0}, h);
    CHECK(std::abs(distance_to_boundary(st)[*st->locate(0.5, 3.0)] - 0.5) <= h);
    const MaskPtr an = build_mask(shape::Annulus{1.0, 5.0}, 1.0 / 16.0);
    CHECK(std::abs(distance_to_boundary(an)[*an->locate(3.0, 0.0)] - 2.0) <= 1.0 / 16.0);
  }
}

TEST_CASE("phi_kappa") {
  const Reaction r = Reaction::logistic(1.0);
  const double h = 1.0 / 8.0;
  const MaskPtr big = build_mask(shape::Rectangle{20.0, 20.0}, h);
  const Field2D p = phi_kappa(big, r);
  CHECK(p[*big->locate(10.0, 10.0)] >= 0.99);
  const HalfLineProfile hp = halfline_profile(r, 5.0);
  for (std::size_t k : big->boundary_nodes()) CHECK(p[k] <= hp.value(2 * h));
  CHECK(p.sup() < 1.0);
  double prev = 0.0;
  for (double kappa : {1.0, 2.0, 4.0, 8.0}) {
    const Field2D f = phi_kappa(build_mask(shape::Annulus{kappa, 2.0 * kappa}, 1.0 / 8.0), r);
    CHECK(f.sup() > prev);
    prev = f.sup();
  }
}

TEST_CASE("grid half-line profile solves the three-point scheme") {
  const double h = 1.0 / 32.0;
  const HalfLineProfile g = grid_halfline_profile(kHump, h, 2.0);
  const auto& s = g.samples;
  REQUIRE(s.size() > 3);
  CHECK(s.front().phi == 0.0);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    CHECK(s[i].x == doctest::Approx(i * h));
    const double lap = (s[i - 1].phi - 2 * s[i].phi + s[i + 1].phi) / (h * h);
    worst = std::max(worst, std::abs(lap + kHump.f(s[i].phi)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("discrete comparison and range invariance") {
  // Explicit steps with dt = h^2/5 preserve order and [0, 1].
  std::mt19937_64 rng(42);
  const MaskPtr m = build_mask(shape::Rectangle{1.0, 1.0}, 1.0 / 24.0);
  const Reaction r = kHump;
  const double dt = 0.2 * m->h() * m->h();
  // The explicit scheme is order-preserving when 1 - 4 dt/h^2 - dt Lip >= 0.
  REQUIRE(1.0 - 0.8 - dt * r.lipschitz() >= 0.0);
  std::size_t violations = 0, out_of_range = 0;
  for (int pair = 0; pair < 10; ++pair) {
    Field2D u = random_field(m, rng, 0.0, 1.0);
    Field2D v(m);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (std::size_t k = 0; k < m->size(); ++k)
      if (m->inside(k)) v[k] = u[k] + (1.0 - u[k]) * U(rng);
    std::vector<double> un(m->size()), vn(m->size());
    for (int step = 0; step < 400; ++step) {
      kernels::euler_step(m->stencil(), m->weights(), r.coefficients(), dt, u.values, un);
      kernels::euler_step(m->stencil(), m->weights(), r.coefficients(), dt, v.values, vn);
      u.values.swap(un);
      v.values.swap(vn);
      for (std::size_t k = 0; k < m->size(); ++k) {
        violations += u[k] > v[k] + 1e-15;
        out_of_range += u[k] < 0.0 || v[k] > 1.0 + 1e-15;
      }
    }
  }
  CHECK(violations == 0);
  CHECK(out_of_range == 0);
}

TEST_CASE("relaxation") {
  SUBCASE("down from 1 on an interval matches shooting") {
    const Reaction r = Reaction::logistic(1.0);
    const double L = 4.0, h = 1.0 / 32.0;
    const MaskPtr m = build_mask(shape::Interval{L}, h);
    const RelaxResult res = relax(m, r, Field2D(m, 1.0), Direction::down);
    CHECK(res.converged);
    CHECK(res.residual <= 1e-7);
    // Oracle: the shooting slope with L_alpha = L.
    double lo = 1e-6, hi = alpha_star(r) * 0.999999;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (length_by_quadrature(r, mid) < L ? lo : hi) = mid;
    }
    const ShootRecord rec = shoot(r, 0.5 * (lo + hi));
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < m->nx(); ++i)
      err = std::max(err, std::abs(res.u[m->index(i, 1)] - rec.phi_at(m->x(i))));
    CHECK(err <= 5.0 * h * h);
  }
  SUBCASE("below the threshold the solution dies") {
    const MaskPtr m = build_mask(shape::Interval{3.0}, 1.0 / 32.0);
    const RelaxResult res = relax(m, Reaction::logistic(1.0), Field2D(m, 1.0), Direction::down);
    CHECK(res.u.sup() < 1e-6);
  }
  SUBCASE("up from a small eigenfunction on the square") {
    const MaskPtr m = build_mask(shape::Rectangle{1.0, 1.0}, 1.0 / 16.0);
    const MinMaxPair pos = min_max_solutions(m, Reaction::logistic(25.0));
    CHECK_FALSE(pos.trivial);
    CHECK(pos.u_min.sup() > 0.1);
    CHECK(pos.gap <= 1e-6);
    const MinMaxPair dead = min_max_solutions(m, Reaction::logistic(10.0));
    CHECK(dead.trivial);
    CHECK(dead.gap <= 1e-6);
    CHECK(dead.u_max.sup() <= 1e-6);
  }
  SUBCASE("iterates are monotone and stay in range") {
    const MaskPtr m = build_mask(shape::Rectangle{1.0, 1.0}, 1.0 / 16.0);
    const Reaction r = Reaction::logistic(30.0);
    RelaxOptions o;
    o.max_steps = 50;
    o.monotone_tol = 0.0;
    Field2D u(m, 1.0);
    for (int round = 0; round < 20; ++round) {
      const RelaxResult next = relax(m, r, u, Direction::down, o);
      for (std::size_t k = 0; k < m->size(); ++k) {
        CHECK(next.u[k] <= u[k]);
        CHECK(next.u[k] >= 0.0);
      }
      u = next.u;
    }
  }
  SUBCASE("a non-supersolution is rejected") {
    const MaskPtr m = build_mask(shape::Rectangle{1.0, 1.0}, 1.0 / 16.0);
    Field2D u(m);
    for (std::size_t k = 0; k < m->size(); ++k)
      if (m->inside(k)) u[k] = 0.01;
    try {
      relax(m, Reaction::logistic(30.0), u, Direction::down);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::monotonicity_violation);
    }
  }
}

TEST_CASE("min and max solutions of the tuned reaction on (0,1)") {
  const MaskPtr m = build_mask(shape::Interval{1.0}, 1.0 / 64.0);
  const MinMaxPair p = min_max_solutions(m, kHump);
  CHECK(p.converged);
  CHECK(p.gap > 0.2);
  CHECK(p.u_min.sup() < 0.5);
  CHECK(p.u_max.sup() > 0.5);
  for (std::size_t k = 0; k < m->size(); ++k) CHECK(p.u_min[k] <= p.u_max[k] + 1e-12);
  CHECK(steady_residual(p.u_min, kHump) <= 1e-7);
  CHECK(steady_residual(p.u_max, kHump) <= 1e-7);
}

TEST_CASE("Logistic dilation branch is unique and approaches Phi_kappa") {
  const Reaction r = Reaction::logistic(1.0);
  const BranchResult br = dilation_branch(
      [](double k) { return build_mask(shape::Interval{k}, 1.0 / 16.0); }, r, {4.0, 8.0, 16.0});
  double prev = INFINITY;
  for (const BranchPoint& b : br.points) {
    CHECK(b.gap <= 1e-6);
    const double d = std::max(b.dist_grid_min, b.dist_grid_max);
    CHECK(d < prev);
    prev = d;
  }
  REQUIRE(br.kappa_merge);
  CHECK(*br.kappa_merge == 4.0);
  const std::string csv = branch_csv(br);
  CHECK(csv.rfind("kappa,gap,sup_umin,sup_umax,dist_phi_min,dist_phi_max", 0) == 0);
}

TEST_CASE("Newton polish keeps a converged state") {
  const MaskPtr m = build_mask(shape::Interval{2.0}, 1.0 / 32.0);
  const RelaxResult res = relax(m, kHump, Field2D(m, 1.0), Direction::down);
  const PolishResult p = newton_polish(res.u, kHump);
  CHECK(p.residual <= 1e-10);
  CHECK(p.max_change <= 1e-6);
}

TEST_CASE("boundary fit on an annulus follows the radial profile") {
  const Reaction r = Reaction::logistic(1.0);
  const double h = 0.25, R0 = 1.0, R1 = 16.0;
  const MaskPtr m = build_mask(shape::Annulus{R0, R1}, h);
  RelaxOptions o;
  o.boundary_fit = true;
  const RelaxResult fit = relax(m, r, Field2D(m, 1.0), Direction::down, o);
  CHECK(fit.residual <= 1e-7);
  CHECK(steady_residual(fit.u, r, true) <= 1e-7);
  const RadialProfile rad = radial_exterior(r, 2, R0, R0 + 27.0);
  double err = 0.0;
  for (double x = R0 + h; x <= R0 + 6.0; x += h) {
    const auto k = m->locate(x, 0.0);
    REQUIRE(k);
    err = std::max(err, std::abs(fit.u[*k] - rad.value(x)));
  }
  CHECK(err <= 0.02);
}

TEST_CASE("deep maximum principle check") {
  const MaskPtr m = build_mask(shape::Annulus{1.0, 9.0}, 0.25);
  const DeepMpReport rep = deep_mp_check(m, Reaction::logistic(1.0), 3.0, 3, 11);
  CHECK(rep.trials == 3);
  CHECK(rep.violations == 0);
  CHECK(rep.eroded_cells > 0);
  CHECK(rep.seed == 11);
}

TEST_CASE("field I/O") {
  const MaskPtr m = build_mask(shape::Rectangle{1.0, 0.5}, 0.125);
  std::mt19937_64 rng(1);
  const Field2D f = random_field(m, rng, 0.0, 1.0);
  const auto path = std::filesystem::temp_directory_path() / "monostab_field_test.bin";
  write_field_binary(f, path.string());
  const Field2D g = read_field_binary(m, path.string());
  CHECK(g.values == f.values);
  std::filesystem::remove(path);
  const std::string csv = field_csv(f);
  CHECK(csv.rfind("x,y,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(m->count()) + 1);
  const std::string pbm = mask_pbm(*m);
  CHECK(pbm.rfind("P1", 0) == 0);
  const MaskPtr other = build_mask(shape::Rectangle{1.0, 1.0}, 0.125);
  CHECK_THROWS_AS(read_field_binary(other, path.string()), Error);
}
