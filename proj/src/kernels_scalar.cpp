#include <algorithm>
#include <cmath>

#include "monostab/kernels.hpp"

namespace monostab::kernels::scalar {

namespace {

inline double horner(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

inline double laplacian(const Stencil& st, const double* u, std::size_t k) {
  return st.wx * ((u[k - 1] + u[k + 1]) - 2.0 * u[k]) +
         st.wy * ((u[k - st.nx] + u[k + st.nx]) - 2.0 * u[k]);
}

void zero_padding_rows(const Stencil& st, std::span<double> out) {
  std::fill(out.begin(), out.begin() + st.nx, 0.0);
  std::fill(out.end() - st.nx, out.end(), 0.0);
}

}  // namespace

StepStats euler_step(const Stencil& st, std::span<const double> mask,
                     std::span<const double> coeffs, double dt,
                     std::span<const double> u, std::span<double> u_next) {
  StepStats stats;
  const double* up = u.data();
  for (std::size_t k = st.nx; k < st.nx * (st.ny - 1); ++k) {
    const double v = up[k] + dt * (laplacian(st, up, k) + horner(coeffs, up[k]));
    const double w = mask[k] * v;
    const double d = w - up[k];
    stats.max_increase = std::max(stats.max_increase, d);
    stats.max_decrease = std::max(stats.max_decrease, -d);
    u_next[k] = w;
  }
  zero_padding_rows(st, u_next);
  return stats;
}

double reaction_residual(const Stencil& st, std::span<const double> mask,
                         std::span<const double> coeffs,
                         std::span<const double> u, std::span<double> out) {
  double worst = 0.0;
  const double* up = u.data();
  for (std::size_t k = st.nx; k < st.nx * (st.ny - 1); ++k) {
    const double r = mask[k] * (laplacian(st, up, k) + horner(coeffs, up[k]));
    worst = std::max(worst, std::abs(r));
    out[k] = r;
  }
  zero_padding_rows(st, out);
  return worst;
}

void schrodinger_apply(const Stencil& st, std::span<const double> mask,
                       std::span<const double> q, std::span<const double> u,
                       std::span<double> out) {
  const double* up = u.data();
  for (std::size_t k = st.nx; k < st.nx * (st.ny - 1); ++k)
    out[k] = mask[k] * (-laplacian(st, up, k) - q[k] * up[k]);
  zero_padding_rows(st, out);
}

void poly_eval(std::span<const double> coeffs, std::span<const double> x,
               std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = horner(coeffs, x[i]);
}

double max_relative_change(std::span<const double> a,
                           std::span<const double> b, double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (b[i] > floor) worst = std::max(worst, std::abs(a[i] - b[i]) / b[i]);
  return worst;
}

}  // namespace monostab::kernels::scalar
