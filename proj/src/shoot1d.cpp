#include "monostab/shoot1d.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "monostab/error.hpp"

namespace monostab {

namespace {

struct State {
  double y;
  double v;
};

State rk4_step(const Reaction& r, State s, double h) {
  const double k1y = s.v, k1v = -r.f(s.y);
  const double k2y = s.v + 0.5 * h * k1v, k2v = -r.f(s.y + 0.5 * h * k1y);
  const double k3y = s.v + 0.5 * h * k2v, k3v = -r.f(s.y + 0.5 * h * k2y);
  const double k4y = s.v + h * k3v, k4v = -r.f(s.y + h * k3y);
  return {s.y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
          s.v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

// Smallest delta in [0, h] where component(rk4_step(s, delta)) changes sign
// from positive, located to 1e-13 by bisection.
template <typename Get>
double locate(const Reaction& r, State s, double h, Get component) {
  double lo = 0.0, hi = h;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (component(rk4_step(r, s, mid)) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ProfileSample sample(const Reaction& r, double x, State s) { return {x, s.y, s.v, -r.f(s.y)}; }

void require_positive(const Reaction& r) {
  if (!(r.m() > 0.0) || !(r.F(1.0) > 0.0))
    fail(ErrorKind::invalid_reaction, "reaction needs f'(0) > 0 and F(1) > 0");
}

}  // namespace

double hermite_value(const std::vector<ProfileSample>& samples, double x) {
  if (samples.empty()) return 0.0;
  if (x <= samples.front().x) return samples.front().phi;
  if (x >= samples.back().x) return samples.back().phi;
  auto it = std::upper_bound(samples.begin(), samples.end(), x,
                             [](double v, const ProfileSample& s) { return v < s.x; });
  const ProfileSample& a = *(it - 1);
  const ProfileSample& b = *it;
  const double h = b.x - a.x;
  const double t = (x - a.x) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h5 = 10 * t3 - 15 * t4 + 6 * t5;
  return h0 * a.phi + h1 * h * a.dphi + h2 * h * h * a.ddphi + h3 * h * h * b.ddphi +
         h4 * h * b.dphi + h5 * b.phi;
}

double HalfLineProfile::value(double x) const {
  if (x <= 0.0) return 0.0;
  if (x <= x_max) return hermite_value(samples, x);
  const double w = 1.0 - samples.back().phi;
  return 1.0 - w * std::exp(-decay_rate * (x - x_max));
}

double RadialProfile::value(double rho) const { return hermite_value(samples, rho); }

double alpha_star(const Reaction& r) {
  const double F1 = r.F(1.0);
  if (!(F1 > 0.0)) fail(ErrorKind::invalid_reaction, "F(1) <= 0");
  return std::sqrt(2.0 * F1);
}

ShootRecord shoot(const Reaction& r, double alpha, const ShootOptions& opts) {
  require_positive(r);
  const double astar = alpha_star(r);
  if (!(alpha > 0.0)) fail(ErrorKind::invalid_argument, "shooting slope must be positive");
  if (alpha >= astar) fail(ErrorKind::slope_out_of_range, "alpha >= alpha*: no return to zero");
  const double scale = 1.0 / std::sqrt(r.m());
  const double h = opts.step > 0.0 ? opts.step : 1e-3 * scale;
  const double cap = opts.x_cap > 0.0 ? opts.x_cap : 200.0 * scale;

  ShootRecord rec;
  rec.alpha = alpha;
  rec.step = h;
  State s{0.0, alpha};
  double x = 0.0;
  rec.profile.push_back(sample(r, x, s));
  bool past_max = false;
  for (;;) {
    State next = rk4_step(r, s, h);
    if (!past_max && next.v <= 0.0) {
      const double d = locate(r, s, h, [](const State& st) { return st.v; });
      const State top = rk4_step(r, s, d);
      rec.s_max = top.y;
      rec.x_at_max = x + d;
      past_max = true;
    }
    if (past_max && next.y <= 0.0) {
      const double d = locate(r, s, h, [](const State& st) { return st.y; });
      const State end = rk4_step(r, s, d);
      rec.length = x + d;
      if (d > 1e-12) rec.profile.push_back(sample(r, rec.length, end));
      break;
    }
    s = next;
    x += h;
    rec.profile.push_back(sample(r, x, s));
    if (s.y > 1.0 || x > cap)
      fail(ErrorKind::slope_out_of_range, "trajectory did not return to zero before the cap");
  }
  for (const auto& p : rec.profile) {
    const double e = std::abs(p.dphi * p.dphi - alpha * alpha + 2.0 * r.F(p.phi));
    rec.energy_residual = std::max(rec.energy_residual, e);
  }
  return rec;
}

double height_of_slope(const Reaction& r, double alpha) {
  require_positive(r);
  const double target = 0.5 * alpha * alpha;
  if (!(alpha > 0.0)) fail(ErrorKind::invalid_argument, "slope must be positive");
  if (target >= r.F(1.0)) fail(ErrorKind::slope_out_of_range, "alpha >= alpha*");
  auto g = [&](double s) { return r.F(s) - target; };
  boost::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      g, 0.0, 1.0, -target, r.F(1.0) - target,
      boost::math::tools::eps_tolerance<double>(52), iters);
  double s = 0.5 * (lo + hi);
  // One Newton polish; F is increasing with F' = f > 0 on (0,1).
  const double fs = r.f(s);
  if (fs > 0.0) s = std::clamp(s - g(s) / fs, lo, hi);
  return s;
}

double slope_of_height(const Reaction& r, double s) { return std::sqrt(2.0 * r.F(s)); }

double length_of_height(const Reaction& r, double s) {
  if (!(s > 0.0 && s < 1.0)) fail(ErrorKind::slope_out_of_range, "height outside (0, 1)");
  // L = 2 int_0^s dz / sqrt(alpha^2 - 2F(s - z)) with z = t^2, and
  // alpha^2 - 2F(s - z) = 2 z G(s, z), so the integrand is 4 / sqrt(2 G(s, t^2)).
  auto integrand = [&](double t) { return 4.0 / std::sqrt(2.0 * r.F_slope(s, t * t)); };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(integrand, 0.0, std::sqrt(s), 12, 1e-13);
}

double length_by_quadrature(const Reaction& r, double alpha) {
  return length_of_height(r, height_of_slope(r, alpha));
}

double length_derivative(const Reaction& r, double alpha) {
  const double astar = alpha_star(r);
  double h = 1e-4 * astar;
  h = std::min({h, 0.5 * alpha, 0.5 * (astar - alpha)});
  return (length_by_quadrature(r, alpha + h) - length_by_quadrature(r, alpha - h)) / (2.0 * h);
}

LengthCurve length_curve(const Reaction& r, std::size_t n) {
  if (n < 8) fail(ErrorKind::invalid_argument, "length_curve needs n >= 8");
  LengthCurve c;
  c.alpha_star = alpha_star(r);
  const std::size_t n_geo = n / 4;
  const double a0 = 1e-3 * c.alpha_star, a1 = 0.1 * c.alpha_star, a2 = 0.995 * c.alpha_star;
  for (std::size_t i = 0; i < n_geo; ++i)
    c.alphas.push_back(a0 * std::pow(a1 / a0, static_cast<double>(i) / n_geo));
  const std::size_t n_uni = n - n_geo;
  for (std::size_t i = 0; i < n_uni; ++i)
    c.alphas.push_back(a1 + (a2 - a1) * static_cast<double>(i) / (n_uni - 1));
  for (double a : c.alphas) {
    const double s = height_of_slope(r, a);
    c.s_max.push_back(s);
    c.lengths.push_back(length_of_height(r, s));
    c.dlengths.push_back(length_derivative(r, a));
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    if ((c.dlengths[i] > 0.0) != (c.dlengths[i + 1] > 0.0)) c.sign_changes.push_back(i);
  return c;
}

std::string to_csv(const LengthCurve& curve) {
  std::ostringstream os;
  os << "alpha,L,dL,s_max\n";
  char buf[128];
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", curve.alphas[i],
                  curve.lengths[i], curve.dlengths[i], curve.s_max[i]);
    os << buf;
  }
  return os.str();
}

HalfLineProfile halfline_profile(const Reaction& r, double x_max, double step) {
  require_positive(r);
  if (!(x_max > 0.0)) fail(ErrorKind::invalid_argument, "x_max must be positive");
  HalfLineProfile p;
  p.alpha_star = alpha_star(r);
  p.decay_rate = std::sqrt(std::abs(r.df(1.0)));
  // Integrate w = 1 - phi, w' = -sqrt(2 w G(1, w)); keeps relative accuracy as w -> 0.
  auto rate = [&](double w) { return w > 0.0 ? -std::sqrt(2.0 * w * r.F_slope(1.0, w)) : 0.0; };
  const double h0 = step > 0.0 ? step : 1e-3 / std::sqrt(r.m());
  const std::size_t n = static_cast<std::size_t>(std::ceil(x_max / h0));
  const double h = x_max / n;
  double w = 1.0;
  auto push = [&](double x, double w_) {
    const double phi = 1.0 - w_;
    p.samples.push_back({x, phi, -rate(w_), -r.f(phi)});
  };
  push(0.0, w);
  for (std::size_t i = 1; i <= n; ++i) {
    const double k1 = rate(w);
    const double k2 = rate(w + 0.5 * h * k1);
    const double k3 = rate(w + 0.5 * h * k2);
    const double k4 = rate(w + h * k3);
    w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    push(i * h, w);
  }
  p.x_max = n * h;
  return p;
}

namespace {

using quad = __float128;

enum class Outcome { undershoot, overshoot, reached };

struct RadialRun {
  Outcome outcome;
  std::vector<ProfileSample> samples;
};

template <typename T>
T poly(const std::span<const double> c, T x) {
  T acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + T(c[i]);
  return acc;
}

// Quad precision keeps the separatrix resolvable out to r_max - R0 ~ 35.
RadialRun radial_run(const Reaction& r, int dim, double R0, double r_max, quad slope, double h,
                     bool keep) {
  const auto c = r.coefficients();
  const quad k = dim - 1;
  auto acc = [&](quad rho, quad u, quad v) { return -k / rho * v - poly<quad>(c, u); };
  RadialRun run{Outcome::reached, {}};
  quad u = 0, v = slope, rho = R0;
  const std::size_t n = static_cast<std::size_t>(std::ceil((r_max - R0) / h));
  const quad hq = quad(r_max - R0) / quad(n);
  if (keep) run.samples.push_back({R0, 0.0, double(v), double(acc(rho, u, v))});
  for (std::size_t i = 0; i < n; ++i) {
    const quad k1u = v, k1v = acc(rho, u, v);
    const quad k2u = v + hq / 2 * k1v, k2v = acc(rho + hq / 2, u + hq / 2 * k1u, k2u);
    const quad k3u = v + hq / 2 * k2v, k3v = acc(rho + hq / 2, u + hq / 2 * k2u, k3u);
    const quad k4u = v + hq * k3v, k4v = acc(rho + hq, u + hq * k3u, k4u);
    u += hq / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += hq / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    rho = quad(R0) + quad(i + 1) * hq;
    if (u > 1) {
      run.outcome = Outcome::overshoot;
      return run;
    }
    if (v <= 0) {
      run.outcome = Outcome::undershoot;
      return run;
    }
    if (keep) run.samples.push_back({double(rho), double(u), double(v), double(acc(rho, u, v))});
  }
  if (double(u) < 1.0 - 1e-6) run.outcome = Outcome::undershoot;
  return run;
}

}  // namespace

RadialProfile radial_exterior(const Reaction& r, int dim, double R0, double r_max) {
  require_positive(r);
  if (dim != 2 && dim != 3) fail(ErrorKind::invalid_argument, "radial dimension must be 2 or 3");
  if (!(R0 > 0.0) || !(r_max > R0 + 20.0 / std::sqrt(r.m())))
    fail(ErrorKind::invalid_argument, "radial shooting needs R0 > 0 and r_max > R0 + 20 m^{-1/2}");
  const double h = 2e-3 / std::sqrt(r.m());
  const double astar = alpha_star(r);
  // The curvature term drains slope, so the exterior slope exceeds alpha*;
  // widen the upper end by the (d-1)/R0 factor.
  const double upper = 2.0 * astar * (1.0 + (dim - 1) / (std::sqrt(r.m()) * R0));
  quad lo = 1e-6, hi = upper;
  auto describe = [&] {
    char buf[128];
    std::snprintf(buf, sizeof buf, "slope interval [%.3g, %.3g]", 1e-6, upper);
    return std::string(buf);
  };
  if (radial_run(r, dim, R0, r_max, lo, h, false).outcome != Outcome::undershoot ||
      radial_run(r, dim, R0, r_max, hi, h, false).outcome != Outcome::overshoot)
    fail(ErrorKind::no_bracketing, "radial slope not bracketed on " + describe());
  for (int it = 0; it < 200; ++it) {
    const quad mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) break;
    const Outcome o = radial_run(r, dim, R0, r_max, mid, h, false).outcome;
    if (o == Outcome::reached) {
      RadialProfile p;
      p.dim = dim;
      p.R0 = R0;
      p.r_max = r_max;
      p.slope = double(mid);
      p.samples = radial_run(r, dim, R0, r_max, mid, h, true).samples;
      return p;
    }
    (o == Outcome::undershoot ? lo : hi) = mid;
  }
  fail(ErrorKind::no_bracketing, "radial bisection collapsed without a monotone profile on " +
                                     describe());
}

}  // namespace monostab
