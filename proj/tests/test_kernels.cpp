#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "monostab/kernels.hpp"
#include "monostab/reaction.hpp"

using namespace monostab;
namespace k = monostab::kernels;

namespace {

struct Grid {
  k::Stencil st;
  std::vector<double> mask, u, q;
};

// Odd sizes so the vector loops hit their scalar tails.
Grid random_grid(std::size_t nx, std::size_t ny, bool line, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Grid g;
  const double h = 1.0 / static_cast<double>(nx - 1);
  g.st = {nx, ny, 1.0 / (h * h), line ? 0.0 : 1.0 / (h * h)};
  g.mask.assign(nx * ny, 0.0);
  g.u.assign(nx * ny, 0.0);
  g.q.assign(nx * ny, 0.0);
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t idx = j * nx + i;
      g.mask[idx] = U(rng) < 0.85 ? 1.0 : 0.0;
      g.u[idx] = g.mask[idx] * U(rng);
      g.q[idx] = 4.0 * U(rng) - 2.0;
    }
  return g;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("dispatcher follows set_isa") {
  const k::Isa before = k::active_isa();
  k::set_isa(k::Isa::scalar);
  CHECK(k::active_isa() == k::Isa::scalar);
  k::set_isa(k::Isa::avx2);
  CHECK(k::active_isa() == (k::cpu_has_avx2() ? k::Isa::avx2 : k::Isa::scalar));
  k::set_isa(before);
}

TEST_CASE("scalar and avx2 kernels agree") {
  if (!k::cpu_has_avx2()) {
    MESSAGE("no AVX2 on this CPU, equivalence not exercised");
    return;
  }
  const Reaction r = Reaction::double_hump(39.478, 0.3, 0.01);
  const auto coeffs = r.coefficients();
  struct Shape {
    std::size_t nx, ny;
    bool line;
  };
  for (const Shape s : {Shape{37, 29, false}, Shape{8, 8, false}, Shape{131, 3, true},
                        Shape{5, 3, true}, Shape{66, 41, false}}) {
    CAPTURE(s.nx);
    CAPTURE(s.ny);
    const Grid g = random_grid(s.nx, s.ny, s.line, s.nx * 1000 + s.ny);
    const std::size_t N = s.nx * s.ny;
    std::vector<double> a(N), b(N);

    const double dt = 0.2 / g.st.wx;
    const k::StepStats sa = k::scalar::euler_step(g.st, g.mask, coeffs, dt, g.u, a);
    const k::StepStats sb = k::avx2::euler_step(g.st, g.mask, coeffs, dt, g.u, b);
    CHECK(max_diff(a, b) <= 1e-13);
    CHECK(sa.max_increase == doctest::Approx(sb.max_increase).epsilon(1e-12));
    CHECK(sa.max_decrease == doctest::Approx(sb.max_decrease).epsilon(1e-12));

    const double ra = k::scalar::reaction_residual(g.st, g.mask, coeffs, g.u, a);
    const double rb = k::avx2::reaction_residual(g.st, g.mask, coeffs, g.u, b);
    CHECK(max_diff(a, b) <= 1e-9 * (1.0 + ra));
    CHECK(ra == doctest::Approx(rb).epsilon(1e-12));

    k::scalar::schrodinger_apply(g.st, g.mask, g.q, g.u, a);
    k::avx2::schrodinger_apply(g.st, g.mask, g.q, g.u, b);
    CHECK(max_diff(a, b) <= 1e-9 * g.st.wx);

    k::scalar::poly_eval(coeffs, g.u, a);
    k::avx2::poly_eval(coeffs, g.u, b);
    CHECK(max_diff(a, b) <= 1e-12);

    const double ca = k::scalar::max_relative_change(g.u, g.q, 1e-3);
    const double cb = k::avx2::max_relative_change(g.u, g.q, 1e-3);
    CHECK(ca == doctest::Approx(cb).epsilon(1e-14));
  }
}

TEST_CASE("euler_step keeps padding and outside nodes at zero") {
  const Grid g = random_grid(21, 17, false, 3);
  const Reaction r = Reaction::logistic(1.0);
  std::vector<double> out(g.u.size(), 7.0);
  k::euler_step(g.st, g.mask, r.coefficients(), 0.2 / g.st.wx, g.u, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (g.mask[i] == 0.0) CHECK(out[i] == 0.0);
}

TEST_CASE("poly_eval matches Horner") {
  const std::vector<double> c = {0.5, -1.0, 2.0, 0.25, -3.0};
  std::vector<double> x, y(101);
  for (int i = 0; i <= 100; ++i) x.push_back(-1.0 + 0.03 * i);
  k::poly_eval(c, x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = 0.0;
    for (std::size_t p = c.size(); p-- > 0;) v = v * x[i] + c[p];
    CHECK(y[i] == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("max_relative_change ignores entries at or below the floor") {
  const std::vector<double> a = {1.0, 5.0, 2.0}, b = {0.5, 1e-20, 1.0};
  CHECK(k::max_relative_change(a, b, 1e-10) == doctest::Approx(1.0));
  CHECK(k::max_relative_change(a, b, 10.0) == 0.0);
}
