#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "monostab/kernels.hpp"

namespace monostab::kernels::avx2 {

namespace {

inline __m256d horner(std::span<const double> c, __m256d x) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = c.size(); i-- > 0;)
    acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

inline double horner1(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = std::fma(acc, x, c[i]);
  return acc;
}

inline __m256d laplacian(const Stencil& st, const double* u, std::size_t k,
                         __m256d wx, __m256d wy, __m256d two) {
  const __m256d c = _mm256_loadu_pd(u + k);
  const __m256d lr = _mm256_add_pd(_mm256_loadu_pd(u + k - 1), _mm256_loadu_pd(u + k + 1));
  const __m256d du =
      _mm256_add_pd(_mm256_loadu_pd(u + k - st.nx), _mm256_loadu_pd(u + k + st.nx));
  const __m256d ax = _mm256_fnmadd_pd(two, c, lr);
  const __m256d ay = _mm256_fnmadd_pd(two, c, du);
  return _mm256_fmadd_pd(wy, ay, _mm256_mul_pd(wx, ax));
}

inline double laplacian1(const Stencil& st, const double* u, std::size_t k) {
  const double ax = std::fma(-2.0, u[k], u[k - 1] + u[k + 1]);
  const double ay = std::fma(-2.0, u[k], u[k - st.nx] + u[k + st.nx]);
  return std::fma(st.wy, ay, st.wx * ax);
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

void zero_padding_rows(const Stencil& st, std::span<double> out) {
  std::fill(out.begin(), out.begin() + st.nx, 0.0);
  std::fill(out.end() - st.nx, out.end(), 0.0);
}

}  // namespace

StepStats euler_step(const Stencil& st, std::span<const double> mask,
                     std::span<const double> coeffs, double dt,
                     std::span<const double> u, std::span<double> u_next) {
  const double* up = u.data();
  const double* mp = mask.data();
  double* out = u_next.data();
  const __m256d wx = _mm256_set1_pd(st.wx), wy = _mm256_set1_pd(st.wy);
  const __m256d two = _mm256_set1_pd(2.0), vdt = _mm256_set1_pd(dt);
  __m256d inc = _mm256_setzero_pd(), dec = _mm256_setzero_pd();
  const std::size_t begin = st.nx, end = st.nx * (st.ny - 1);
  std::size_t k = begin;
  for (; k + 4 <= end; k += 4) {
    const __m256d c = _mm256_loadu_pd(up + k);
    const __m256d rate = _mm256_add_pd(laplacian(st, up, k, wx, wy, two), horner(coeffs, c));
    const __m256d w = _mm256_mul_pd(_mm256_loadu_pd(mp + k), _mm256_fmadd_pd(vdt, rate, c));
    const __m256d d = _mm256_sub_pd(w, c);
    inc = _mm256_max_pd(inc, d);
    dec = _mm256_max_pd(dec, _mm256_sub_pd(_mm256_setzero_pd(), d));
    _mm256_storeu_pd(out + k, w);
  }
  StepStats stats{hmax(inc), hmax(dec)};
  for (; k < end; ++k) {
    const double rate = laplacian1(st, up, k) + horner1(coeffs, up[k]);
    const double w = mp[k] * std::fma(dt, rate, up[k]);
    const double d = w - up[k];
    stats.max_increase = std::max(stats.max_increase, d);
    stats.max_decrease = std::max(stats.max_decrease, -d);
    out[k] = w;
  }
  zero_padding_rows(st, u_next);
  return stats;
}

double reaction_residual(const Stencil& st, std::span<const double> mask,
                         std::span<const double> coeffs,
                         std::span<const double> u, std::span<double> out) {
  const double* up = u.data();
  const double* mp = mask.data();
  const __m256d wx = _mm256_set1_pd(st.wx), wy = _mm256_set1_pd(st.wy);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d worst = _mm256_setzero_pd();
  const std::size_t begin = st.nx, end = st.nx * (st.ny - 1);
  std::size_t k = begin;
  for (; k + 4 <= end; k += 4) {
    const __m256d c = _mm256_loadu_pd(up + k);
    const __m256d r = _mm256_mul_pd(
        _mm256_loadu_pd(mp + k),
        _mm256_add_pd(laplacian(st, up, k, wx, wy, two), horner(coeffs, c)));
    worst = _mm256_max_pd(worst, _mm256_andnot_pd(sign, r));
    _mm256_storeu_pd(out.data() + k, r);
  }
  double w = hmax(worst);
  for (; k < end; ++k) {
    const double r = mp[k] * (laplacian1(st, up, k) + horner1(coeffs, up[k]));
    w = std::max(w, std::abs(r));
    out[k] = r;
  }
  zero_padding_rows(st, out);
  return w;
}

void schrodinger_apply(const Stencil& st, std::span<const double> mask,
                       std::span<const double> q, std::span<const double> u,
                       std::span<double> out) {
  const double* up = u.data();
  const double* mp = mask.data();
  const double* qp = q.data();
  const __m256d wx = _mm256_set1_pd(st.wx), wy = _mm256_set1_pd(st.wy);
  const __m256d two = _mm256_set1_pd(2.0);
  const std::size_t begin = st.nx, end = st.nx * (st.ny - 1);
  std::size_t k = begin;
  for (; k + 4 <= end; k += 4) {
    const __m256d lap = laplacian(st, up, k, wx, wy, two);
    const __m256d qu = _mm256_mul_pd(_mm256_loadu_pd(qp + k), _mm256_loadu_pd(up + k));
    const __m256d r = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_add_pd(lap, qu));
    _mm256_storeu_pd(out.data() + k, _mm256_mul_pd(_mm256_loadu_pd(mp + k), r));
  }
  for (; k < end; ++k) out[k] = mp[k] * -(laplacian1(st, up, k) + qp[k] * up[k]);
  zero_padding_rows(st, out);
}

void poly_eval(std::span<const double> coeffs, std::span<const double> x,
               std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4)
    _mm256_storeu_pd(out.data() + i, horner(coeffs, _mm256_loadu_pd(x.data() + i)));
  for (; i < x.size(); ++i) out[i] = horner1(coeffs, x[i]);
}

double max_relative_change(std::span<const double> a,
                           std::span<const double> b, double floor) {
  const __m256d vf = _mm256_set1_pd(floor);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d worst = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    const __m256d vb = _mm256_loadu_pd(b.data() + i);
    const __m256d keep = _mm256_cmp_pd(vb, vf, _CMP_GT_OQ);
    const __m256d diff = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), vb));
    const __m256d denom = _mm256_blendv_pd(one, vb, keep);
    worst = _mm256_max_pd(worst, _mm256_and_pd(keep, _mm256_div_pd(diff, denom)));
  }
  double w = hmax(worst);
  for (; i < a.size(); ++i)
    if (b[i] > floor) w = std::max(w, std::abs(a[i] - b[i]) / b[i]);
  return w;
}

}  // namespace monostab::kernels::avx2
