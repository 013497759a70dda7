#include "monostab/pipelines.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "monostab/error.hpp"
#include "monostab/kernels.hpp"
#include "monostab/shoot1d.hpp"
#include "monostab/spectra.hpp"

namespace monostab {

namespace {

std::vector<double> sample_lengths(const Reaction& r, std::size_t samples) {
  std::vector<double> L(samples - 1);
  for (std::size_t k = 1; k < samples; ++k)
    L[k - 1] = length_of_height(r, static_cast<double>(k) / static_cast<double>(samples));
  return L;
}

double s_of(std::size_t k, std::size_t samples) {
  return static_cast<double>(k + 1) / static_cast<double>(samples);
}

LengthExtrema extrema_from(const std::vector<double>& L, std::size_t samples) {
  LengthExtrema e;
  std::size_t k = 1;
  for (; k + 1 < L.size(); ++k)
    if (L[k] >= L[k - 1] && L[k] > L[k + 1]) break;
  if (k + 1 >= L.size()) return e;
  e.s_peak = s_of(k, samples);
  e.L_peak = L[k];
  for (++k; k + 1 < L.size(); ++k)
    if (L[k] <= L[k - 1] && L[k] < L[k + 1]) break;
  if (k + 1 >= L.size()) return e;
  e.s_valley = s_of(k, samples);
  e.L_valley = L[k];
  return e;
}

double hump_objective(double m, double theta, double eps, const HumpTuneOptions& o,
                      HumpTuning* out) {
  const Reaction r = Reaction::double_hump(m, theta, eps);
  if (!classify(r).is_weak_kpp()) return -INFINITY;
  const auto L = sample_lengths(r, o.s_samples);
  const LengthExtrema e = extrema_from(L, o.s_samples);
  if (!e.s_valley) return -INFINITY;
  const double L0 = std::numbers::pi / std::sqrt(m);
  const double obj = std::min({std::log(o.length / L0), std::log(o.length / e.L_valley),
                               std::log(e.L_peak / o.length), std::log(o.merge_length / e.L_peak)});
  if (out) {
    out->m = m;
    out->theta = theta;
    out->epsilon = eps;
    out->L_zero = L0;
    out->L_peak = e.L_peak;
    out->L_valley = e.L_valley;
    out->s_peak = *e.s_peak;
    out->s_valley = *e.s_valley;
    out->objective = obj;
  }
  return obj;
}

double root_of_length(const Reaction& r, double length, double a, double b) {
  auto g = [&](double s) { return length_of_height(r, s) - length; };
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      g, a, b, [](double x, double y) { return std::abs(x - y) <= 1e-14; }, iters);
  return 0.5 * (lo + hi);
}

}  // namespace

LengthExtrema length_extrema(const Reaction& r, std::size_t samples) {
  return extrema_from(sample_lengths(r, samples), samples);
}

std::vector<double> heights_of_length(const Reaction& r, double length, std::size_t samples) {
  const auto L = sample_lengths(r, samples);
  std::vector<double> roots;
  // The s -> 0 limit pi m^{-1/2} counts as the left neighbour of the first sample.
  double prev_s = 0.0, prev = std::numbers::pi / std::sqrt(r.m());
  for (std::size_t k = 0; k < L.size(); ++k) {
    const double s = s_of(k, samples);
    if ((prev - length) * (L[k] - length) < 0.0 || L[k] == length)
      roots.push_back(L[k] == length ? s : root_of_length(r, length, std::max(prev_s, 1e-9), s));
    prev_s = s;
    prev = L[k];
  }
  // L -> infinity as s -> 1.
  if (prev < length) roots.push_back(root_of_length(r, length, prev_s, 1.0 - 1e-12));
  return roots;
}

HumpTuning tune_double_hump(const HumpTuneOptions& o) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double m_lo = o.m_lo > 0 ? o.m_lo : pi2, m_hi = o.m_hi > 0 ? o.m_hi : 4.0 * pi2;
  const double le_lo = std::log(o.eps_lo), le_hi = std::log(o.eps_hi);
  HumpTuning best;
  best.objective = -INFINITY;
  std::size_t evals = 0;
  auto lerp = [&](double a, double b, std::size_t i) {
    return a + (b - a) * static_cast<double>(i) / static_cast<double>(o.grid - 1);
  };
  for (std::size_t a = 0; a < o.grid; ++a)
    for (std::size_t b = 0; b < o.grid; ++b)
      for (std::size_t c = 0; c < o.grid; ++c) {
        HumpTuning t;
        // epsilon runs from large to small so ties keep the smoother reaction.
        const double v = hump_objective(lerp(m_lo, m_hi, a), lerp(o.theta_lo, o.theta_hi, b),
                                        std::exp(lerp(le_hi, le_lo, c)), o, &t);
        ++evals;
        if (v > best.objective + 1e-12) best = t;
      }
  if (!(best.objective > 0.0))
    fail(ErrorKind::not_found, "no DoubleHump in the search box has two solutions straddling 1/2");
  // Pattern search in (m, theta, log eps), clamped to the box.
  double step[3] = {(m_hi - m_lo) / static_cast<double>(o.grid - 1),
                    (o.theta_hi - o.theta_lo) / static_cast<double>(o.grid - 1),
                    (le_hi - le_lo) / static_cast<double>(o.grid - 1)};
  for (std::size_t it = 0; it < o.refine; ++it) {
    bool moved = false;
    for (int d = 0; d < 3; ++d)
      for (double sgn : {1.0, -1.0}) {
        double p[3] = {best.m, best.theta, std::log(best.epsilon)};
        p[d] += sgn * step[d];
        p[0] = std::clamp(p[0], m_lo, m_hi);
        p[1] = std::clamp(p[1], o.theta_lo, o.theta_hi);
        p[2] = std::clamp(p[2], le_lo, le_hi);
        HumpTuning t;
        const double v = hump_objective(p[0], p[1], std::exp(p[2]), o, &t);
        ++evals;
        if (v > best.objective + 1e-12) {
          best = t;
          moved = true;
        }
      }
    if (!moved)
      for (double& s : step) s *= 0.5;
  }
  const auto roots = heights_of_length(best.reaction(), o.length, o.s_samples);
  best.s_lo = roots.front();
  best.s_hi = roots.back();
  best.evaluations = evals;
  return best;
}

SlopeMinimum min_length_slope(const Reaction& r, std::size_t samples) {
  const auto L = sample_lengths(r, samples);
  const double ds = 1.0 / static_cast<double>(samples);
  std::size_t kmin = 1;
  double dmin = INFINITY;
  for (std::size_t k = 1; k + 1 < L.size(); ++k) {
    const double d = (L[k + 1] - L[k - 1]) / (2.0 * ds);
    if (d < dmin) {
      dmin = d;
      kmin = k;
    }
  }
  const double delta = 1e-5;
  auto slope = [&](double s) {
    return (length_of_height(r, s + delta) - length_of_height(r, s - delta)) / (2.0 * delta);
  };
  const auto [s, d] =
      boost::math::tools::brent_find_minima(slope, s_of(kmin - 1, samples), s_of(kmin + 1, samples), 40);
  SlopeMinimum out;
  out.s = s;
  out.dL_ds = d;
  out.alpha = slope_of_height(r, s);
  out.length = length_of_height(r, s);
  // ds/dalpha = alpha / f(s).
  out.dL_dalpha = d * out.alpha / r.f(s);
  return out;
}

MarginalResult find_marginal(const Reaction& f0, const Reaction& f1, double width) {
  auto non_injective = [](const Reaction& r) { return min_length_slope(r).dL_ds < 0.0; };
  if (!non_injective(f1))
    fail(ErrorKind::predicate_never_true, "the target reaction " + f1.describe() + " has an injective length map");
  if (non_injective(f0))
    fail(ErrorKind::config, "the base reaction " + f0.describe() + " already has a non-injective length map");
  MarginalResult res;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    (non_injective(Reaction::interpolated(mid, f0, f1)) ? hi : lo) = mid;
    ++res.bisections;
  }
  res.tau_lo = lo;
  res.tau_hi = hi;
  // lambda1 at the dip moves about 100x faster than min dL/dalpha, so the
  // bracket midpoint is not enough: polish the continuous root of min dL/ds.
  auto g = [&](double tau) { return min_length_slope(Reaction::interpolated(tau, f0, f1)).dL_ds; };
  const double glo = g(lo), ghi = g(hi);
  if (glo >= 0.0 && ghi < 0.0) {
    std::uintmax_t iters = 60;
    const auto [a, b] = boost::math::tools::toms748_solve(
        g, lo, hi, glo, ghi, [](double x, double y) { return std::abs(x - y) <= 1e-12; }, iters);
    res.tau_star = 0.5 * (a + b);
  } else {
    res.tau_star = 0.5 * (lo + hi);
  }
  res.reaction = Reaction::interpolated(res.tau_star, f0, f1);
  res.critical = min_length_slope(res.reaction);
  const ShootRecord rec = shoot(res.reaction, res.critical.alpha);
  const auto e = eigen1d([&](double y) { return res.reaction.df(rec.phi_at(y)); }, rec.length, 801);
  res.lambda1 = e.lambda1;
  res.lambda1_grid = e.lambda1_grid;
  return res;
}


namespace {

// u_0 from the outward recurrence; negative once h passes the discrete spacing.
double recurrence_end(const Reaction& r, std::size_t n, double s, double h) {
  const double h2 = h * h;
  const std::size_t c = (n + 1) / 2;  // centre node index, nodes 1..n
  double here = s, next = s - 0.5 * h2 * r.f(s);
  for (std::size_t j = c - 1; j >= 1; --j) {
    // here = u_{j+1}, next = u_j
    const double prev = 2.0 * next - here - h2 * r.f(std::max(next, 0.0));
    here = next;
    next = prev;
    if (j == 1) break;
    if (here <= 0.0) return here;
  }
  return next;
}

}  // namespace

double discrete_spacing(const Reaction& r, std::size_t n, double s) {
  if (n % 2 == 0 || n < 3) fail(ErrorKind::invalid_argument, "discrete_spacing needs odd n >= 3");
  const double est = length_of_height(r, s) / static_cast<double>(n + 1);
  double lo = 0.5 * est, hi = 1.5 * est;
  auto g = [&](double h) { return recurrence_end(r, n, s, h); };
  for (int k = 0; k < 20 && g(lo) <= 0.0; ++k) lo *= 0.7;
  for (int k = 0; k < 20 && g(hi) >= 0.0; ++k) hi *= 1.3;
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, lo, hi, [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::abs(x); }, iters);
  return 0.5 * (a + b);
}

std::vector<double> discrete_profile(const Reaction& r, std::size_t n, double s, double h) {
  std::vector<double> u(n);
  const std::size_t c = (n - 1) / 2;  // 0-based centre
  u[c] = s;
  if (n > 1) u[c - 1] = u[c + 1] = s - 0.5 * h * h * r.f(s);
  for (std::size_t j = c - 1; j >= 1; --j) {
    u[j - 1] = 2.0 * u[j] - u[j + 1] - h * h * r.f(u[j]);
    u[2 * c - (j - 1)] = u[j - 1];
  }
  return u;
}

DiscreteMarginal find_discrete_marginal(const Reaction& f0, const Reaction& f1, std::size_t n,
                                        double tau_guess, double window) {
  auto width = [n](const Reaction& r, double s) {
    return static_cast<double>(n + 1) * discrete_spacing(r, n, s);
  };
  auto min_slope = [&](const Reaction& r, double* s_at) {
    const std::size_t samples = 200;
    const double ds = 1.0 / static_cast<double>(samples);
    std::vector<double> W(samples - 1);
    for (std::size_t k = 1; k < samples; ++k) W[k - 1] = width(r, static_cast<double>(k) * ds);
    std::size_t kmin = 1;
    for (std::size_t k = 1; k + 1 < W.size(); ++k)
      if (W[k + 1] - W[k - 1] < W[kmin + 1] - W[kmin - 1]) kmin = k;
    const double delta = 1e-5;
    auto slope = [&](double s) { return (width(r, s + delta) - width(r, s - delta)) / (2.0 * delta); };
    const auto [s, d] = boost::math::tools::brent_find_minima(
        slope, static_cast<double>(kmin) * ds, static_cast<double>(kmin + 2) * ds, 40);
    if (s_at) *s_at = s;
    return d;
  };
  auto g = [&](double tau) { return min_slope(Reaction::interpolated(tau, f0, f1), nullptr); };
  const double lo = std::max(0.0, tau_guess - window), hi = std::min(1.0, tau_guess + window);
  const double glo = g(lo), ghi = g(hi);
  if (!(glo > 0.0 && ghi < 0.0))
    fail(ErrorKind::not_found, "discrete marginal reaction not bracketed near tau = " +
                                   std::to_string(tau_guess));
  std::uintmax_t iters = 80;
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, lo, hi, glo, ghi, [](double x, double y) { return std::abs(x - y) <= 1e-13; }, iters);
  DiscreteMarginal out;
  out.tau_star = 0.5 * (a + b);
  out.reaction = Reaction::interpolated(out.tau_star, f0, f1);
  out.dW_ds = min_slope(out.reaction, &out.s);
  out.h = discrete_spacing(out.reaction, n, out.s);
  out.width = static_cast<double>(n + 1) * out.h;
  out.phi = discrete_profile(out.reaction, n, out.s, out.h);
  std::vector<double> q(n);
  for (std::size_t j = 0; j < n; ++j) q[j] = out.reaction.df(out.phi[j]);
  out.lambda1_grid = eigen1d(q, out.width, 1).lambda1_grid;
  return out;
}

}  // namespace monostab
