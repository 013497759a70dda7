#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "monostab/error.hpp"
#include "monostab/grid2d.hpp"
#include "monostab/shoot1d.hpp"

namespace monostab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t cells(double length, double h) {
  const double n = std::round(length / h);
  if (!(n >= 1.0)) fail(ErrorKind::invalid_argument, "geometric length below one grid spacing");
  return static_cast<std::size_t>(n);
}

void require_positive(std::initializer_list<double> values) {
  for (double v : values)
    if (!(v > 0.0 && std::isfinite(v)))
      fail(ErrorKind::invalid_argument, "geometric parameters must be positive");
}

// 1-D squared distance transform (Felzenszwalb-Huttenlocher).
void edt_1d(const double* f, double* d, std::size_t n, std::size_t stride,
            std::vector<std::size_t>& v, std::vector<double>& z, std::vector<double>& buf) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  buf.resize(n);
  for (std::size_t q = 0; q < n; ++q) buf[q] = f[q * stride];
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  std::size_t k = 0;
  std::size_t first = n;
  for (std::size_t q = 0; q < n; ++q)
    if (buf[q] < inf) {
      first = q;
      break;
    }
  if (first == n) {
    for (std::size_t q = 0; q < n; ++q) d[q * stride] = inf;
    return;
  }
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (!(buf[q] < inf)) continue;
    for (;;) {
      const double p = static_cast<double>(v[k]);
      const double qd = static_cast<double>(q);
      const double s = ((buf[q] + qd * qd) - (buf[v[k]] + p * p)) / (2.0 * qd - 2.0 * p);
      if (s <= z[k]) {
        if (k == 0) {
          v[0] = q;
          z[0] = -inf;
          z[1] = inf;
          break;
        }
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = inf;
      break;
    }
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double qd = static_cast<double>(q);
    while (z[k + 1] < qd) ++k;
    const double p = static_cast<double>(v[k]);
    d[q * stride] = (qd - p) * (qd - p) + buf[v[k]];
  }
}

}  // namespace

std::string tag_name(const BuilderTag& tag) {
  return std::visit(overloaded{
                        [](const shape::Rectangle&) { return std::string("Rectangle"); },
                        [](const shape::Strip&) { return std::string("Strip"); },
                        [](const shape::Annulus&) { return std::string("Annulus"); },
                        [](const shape::Disk&) { return std::string("Disk"); },
                        [](const shape::Interval&) { return std::string("Interval"); },
                        [](const shape::Pocket&) { return std::string("Pocket"); },
                        [](const shape::Wedge&) { return std::string("Wedge"); },
                        [](const shape::Wells&) { return std::string("Wells"); },
                        [](const shape::Custom&) { return std::string("Custom"); },
                    },
                    tag);
}

namespace {

// Fractions for nodes next to the circles |x| = radii[i].
std::vector<BoundaryFit> circle_fit(const Mask2D& m, std::initializer_list<double> radii) {
  std::vector<BoundaryFit> out;
  const std::size_t step[4] = {1, m.nx(), 1, m.nx()};
  const double dx[4] = {1.0, 0.0, -1.0, 0.0}, dy[4] = {0.0, 1.0, 0.0, -1.0};
  for (std::size_t j = 1; j + 1 < m.ny(); ++j)
    for (std::size_t i = 1; i + 1 < m.nx(); ++i) {
      const std::size_t k = m.index(i, j);
      if (!m.inside(k)) continue;
      BoundaryFit fit{k};
      bool any = false;
      for (int d = 0; d < 4; ++d) {
        const std::size_t nb = d < 2 ? k + step[d] : k - step[d];
        if (m.inside(nb)) continue;
        any = true;
        // |p + t h e|^2 = R^2, smallest t in (0, 1].
        const double px = m.x(i), py = m.y(j), h = m.h();
        const double b = (px * dx[d] + py * dy[d]) / h, c0 = (px * px + py * py) / (h * h);
        double best = 1.0;
        for (double R : radii) {
          const double c = c0 - R * R / (h * h), disc = b * b - c;
          if (disc < 0.0) continue;
          for (double t : {-b - std::sqrt(disc), -b + std::sqrt(disc)})
            if (t > 0.0 && t < best) best = t;
        }
        fit.theta[d] = std::max(best, 1e-6);
      }
      if (any) out.push_back(fit);
    }
  return out;
}

}  // namespace

Mask2D::Mask2D(std::size_t nx, std::size_t ny, double h, double x0, double y0,
               std::vector<std::uint8_t> inside, Topology topology, BuilderTag tag)
    : nx_(nx), ny_(ny), h_(h), x0_(x0), y0_(y0), inside_(std::move(inside)),
      topology_(topology), tag_(std::move(tag)) {
  if (!(h > 0.0)) fail(ErrorKind::invalid_argument, "mask spacing must be positive");
  if (nx < 3 || ny < 3 || inside_.size() != nx * ny)
    fail(ErrorKind::invalid_argument, "mask dimensions inconsistent");
  if (topology == Topology::line && ny != 3)
    fail(ErrorKind::invalid_argument, "line masks have exactly three rows");
  weights_.assign(nx * ny, 0.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = index(i, j);
      if (!inside_[k]) continue;
      if (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny)
        fail(ErrorKind::invalid_argument, "outer ring of a mask must be outside");
      weights_[k] = 1.0;
      ++count_;
    }
}

kernels::Stencil Mask2D::stencil() const {
  const double w = 1.0 / (h_ * h_);
  return {nx_, ny_, w, topology_ == Topology::line ? 0.0 : w};
}

bool Mask2D::is_connected() const {
  if (count_ == 0) return false;
  std::vector<std::uint8_t> seen(size(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t k = 0; k < size(); ++k)
    if (inside_[k]) {
      queue.push_back(k);
      seen[k] = 1;
      break;
    }
  std::size_t reached = 0;
  const bool planar = topology_ == Topology::planar;
  while (!queue.empty()) {
    const std::size_t k = queue.front();
    queue.pop_front();
    ++reached;
    const std::size_t nb[4] = {k - 1, k + 1, k - nx_, k + nx_};
    for (int t = 0; t < (planar ? 4 : 2); ++t)
      if (inside_[nb[t]] && !seen[nb[t]]) {
        seen[nb[t]] = 1;
        queue.push_back(nb[t]);
      }
  }
  return reached == count_;
}

std::vector<std::size_t> Mask2D::boundary_nodes() const {
  std::vector<std::size_t> out;
  const bool planar = topology_ == Topology::planar;
  for (std::size_t k = 0; k < size(); ++k) {
    if (!inside_[k]) continue;
    bool edge = !inside_[k - 1] || !inside_[k + 1];
    if (planar) edge = edge || !inside_[k - nx_] || !inside_[k + nx_];
    if (edge) out.push_back(k);
  }
  return out;
}

std::optional<std::size_t> Mask2D::locate(double x, double y) const {
  const double fi = std::round((x - x0_) / h_);
  const double fj = topology_ == Topology::line ? 1.0 : std::round((y - y0_) / h_);
  if (fi < 0 || fj < 0 || fi >= static_cast<double>(nx_) || fj >= static_cast<double>(ny_))
    return std::nullopt;
  const std::size_t k = index(static_cast<std::size_t>(fi), static_cast<std::size_t>(fj));
  if (!inside_[k]) return std::nullopt;
  return k;
}

Field2D::Field2D(MaskPtr m, double fill) : mask(std::move(m)), values(mask->size(), 0.0) {
  for (std::size_t k = 0; k < values.size(); ++k)
    if (mask->inside(k)) values[k] = fill;
}

double Field2D::sup() const {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (mask->inside(k)) s = std::max(s, values[k]);
  return s;
}

double Field2D::inf_inside() const {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k)
    if (mask->inside(k)) s = std::min(s, values[k]);
  return s;
}

double Field2D::sup_where(const std::function<bool(double, double)>& pred) const {
  double s = 0.0;
  for (std::size_t j = 0; j < mask->ny(); ++j)
    for (std::size_t i = 0; i < mask->nx(); ++i) {
      const std::size_t k = mask->index(i, j);
      if (mask->inside(k) && pred(mask->x(i), mask->y(j))) s = std::max(s, values[k]);
    }
  return s;
}

double sup_distance(const Field2D& a, const Field2D& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    if (a.mask->inside(k)) d = std::max(d, std::abs(a.values[k] - b.values[k]));
  return d;
}

MaskPtr build_mask(const BuilderTag& tag, double h) {
  if (!(h > 0.0)) fail(ErrorKind::invalid_argument, "mask spacing must be positive");
  MaskPtr mask = std::visit(
      overloaded{
          [&](const shape::Rectangle& s) -> MaskPtr {
            require_positive({s.width, s.height});
            const std::size_t n = cells(s.width, h), m = cells(s.height, h);
            std::vector<std::uint8_t> in((n + 1) * (m + 1), 0);
            for (std::size_t j = 1; j < m; ++j)
              for (std::size_t i = 1; i < n; ++i) in[j * (n + 1) + i] = 1;
            return std::make_shared<Mask2D>(n + 1, m + 1, h, 0.0, 0.0, std::move(in),
                                            Topology::planar, tag);
          },
          [&](const shape::Strip& s) -> MaskPtr {
            require_positive({s.width, s.length});
            const std::size_t n = cells(s.width, h), m = cells(s.length, h);
            std::vector<std::uint8_t> in((n + 1) * (m + 1), 0);
            for (std::size_t j = 1; j < m; ++j)
              for (std::size_t i = 1; i < n; ++i) in[j * (n + 1) + i] = 1;
            return std::make_shared<Mask2D>(n + 1, m + 1, h, 0.0, 0.0, std::move(in),
                                            Topology::planar, tag);
          },
          [&](const shape::Interval& s) -> MaskPtr {
            require_positive({s.length});
            const std::size_t n = cells(s.length, h);
            std::vector<std::uint8_t> in((n + 1) * 3, 0);
            for (std::size_t i = 1; i < n; ++i) in[(n + 1) + i] = 1;
            return std::make_shared<Mask2D>(n + 1, 3, h, 0.0, -h, std::move(in), Topology::line,
                                            tag);
          },
          [&](const shape::Disk& s) -> MaskPtr {
            require_positive({s.radius});
            const std::size_t half = static_cast<std::size_t>(std::ceil(s.radius / h)) + 1;
            const std::size_t n = 2 * half + 1;
            const double x0 = -static_cast<double>(half) * h;
            std::vector<std::uint8_t> in(n * n, 0);
            const double r2 = s.radius * s.radius;
            for (std::size_t j = 0; j < n; ++j)
              for (std::size_t i = 0; i < n; ++i) {
                const double x = x0 + i * h, y = x0 + j * h;
                in[j * n + i] = x * x + y * y < r2 * (1.0 - 1e-12);
              }
            auto m = std::make_shared<Mask2D>(n, n, h, x0, x0, std::move(in), Topology::planar,
                                              tag);
            m->set_boundary_fit(circle_fit(*m, {s.radius}));
            return m;
          },
          [&](const shape::Annulus& s) -> MaskPtr {
            require_positive({s.R0, s.R1});
            if (!(s.R1 > s.R0)) fail(ErrorKind::invalid_argument, "annulus needs R1 > R0");
            const std::size_t half = static_cast<std::size_t>(std::ceil(s.R1 / h)) + 1;
            const std::size_t n = 2 * half + 1;
            const double x0 = -static_cast<double>(half) * h;
            std::vector<std::uint8_t> in(n * n, 0);
            const double a2 = s.R0 * s.R0 * (1.0 + 1e-12), b2 = s.R1 * s.R1 * (1.0 - 1e-12);
            for (std::size_t j = 0; j < n; ++j)
              for (std::size_t i = 0; i < n; ++i) {
                const double x = x0 + i * h, y = x0 + j * h;
                const double r2 = x * x + y * y;
                in[j * n + i] = r2 > a2 && r2 < b2;
              }
            auto m = std::make_shared<Mask2D>(n, n, h, x0, x0, std::move(in), Topology::planar,
                                              tag);
            m->set_boundary_fit(circle_fit(*m, {s.R0, s.R1}));
            return m;
          },
          [&](const shape::Pocket& s) -> MaskPtr {
            require_positive({s.pocket_size, s.half_length, s.half_width, s.base_size});
            const std::size_t nB = cells(s.base_size, h), nL = cells(2.0 * s.half_length, h);
            const std::size_t nd = cells(s.half_width, h), nP = cells(s.pocket_size, h);
            // Work in signed index space, shift afterwards.
            const long jc = static_cast<long>(nB / 2);
            const long pj0 = jc - static_cast<long>(nP / 2), pj1 = pj0 + static_cast<long>(nP);
            const long jlo = std::min(0L, pj0), jhi = std::max(static_cast<long>(nB), pj1);
            const long ib = static_cast<long>(nB), ip = ib + static_cast<long>(nL);
            const long ihi = ip + static_cast<long>(nP);
            const std::size_t nx = static_cast<std::size_t>(ihi + 1);
            const std::size_t ny = static_cast<std::size_t>(jhi - jlo + 1);
            std::vector<std::uint8_t> in(nx * ny, 0);
            for (long j = jlo; j <= jhi; ++j)
              for (long i = 0; i <= ihi; ++i) {
                const bool base = i > 0 && i < ib && j > 0 && j < static_cast<long>(nB);
                const bool pocket = i > ip && i < ihi && j > pj0 && j < pj1;
                const bool bridge = i >= ib - 1 && i <= ip + 1 && j > jc - static_cast<long>(nd) &&
                                    j < jc + static_cast<long>(nd);
                in[static_cast<std::size_t>(j - jlo) * nx + static_cast<std::size_t>(i)] =
                    base || pocket || bridge;
              }
            return std::make_shared<Mask2D>(nx, ny, h, 0.0, static_cast<double>(jlo) * h,
                                            std::move(in), Topology::planar, tag);
          },
          [&](const shape::Wedge& s) -> MaskPtr {
            require_positive({s.slope, s.truncation});
            const std::size_t half =
                static_cast<std::size_t>(std::ceil(s.truncation / s.slope / h)) + 1;
            const std::size_t nx = 2 * half + 1, ny = cells(s.truncation, h) + 1;
            const double x0 = -static_cast<double>(half) * h;
            std::vector<std::uint8_t> in(nx * ny, 0);
            for (std::size_t j = 1; j + 1 < ny; ++j)
              for (std::size_t i = 0; i < nx; ++i) {
                const double x = x0 + i * h, y = j * h;
                in[j * nx + i] = y > s.slope * std::abs(x) + 1e-12 * h;
              }
            return std::make_shared<Mask2D>(nx, ny, h, x0, 0.0, std::move(in), Topology::planar,
                                            tag);
          },
          [&](const shape::Wells& s) -> MaskPtr {
            require_positive({s.width, s.base_width, s.base_height});
            if (s.depths.empty()) fail(ErrorKind::invalid_argument, "wells need depths");
            const std::size_t nW = cells(s.base_width, h), nH = cells(s.base_height, h);
            const std::size_t nw = cells(s.width, h);
            double dmax = 0.0;
            for (double d : s.depths) {
              require_positive({d});
              dmax = std::max(dmax, d);
            }
            const std::size_t nD = cells(dmax, h);
            const std::size_t nx = nW + 1, ny = nH + nD + 1;
            std::vector<std::uint8_t> in(nx * ny, 0);
            // Row index r = j + nD corresponds to y = j h.
            for (std::size_t r = nD + 1; r < nD + nH; ++r)
              for (std::size_t i = 1; i < nW; ++i) in[r * nx + i] = 1;
            const std::size_t nwell = s.depths.size();
            for (std::size_t w = 0; w < nwell; ++w) {
              const double centre = s.base_width * (w + 1.0) / (nwell + 1.0);
              const long i0 = std::lround(centre / h) - static_cast<long>(nw / 2);
              if (i0 < 1 || i0 + static_cast<long>(nw) >= static_cast<long>(nW))
                fail(ErrorKind::invalid_argument, "wells do not fit under the base");
              const std::size_t depth = cells(s.depths[w], h);
              for (std::size_t r = nD - depth + 1; r <= nD; ++r)
                for (long i = i0 + 1; i < i0 + static_cast<long>(nw); ++i)
                  in[r * nx + static_cast<std::size_t>(i)] = 1;
            }
            return std::make_shared<Mask2D>(nx, ny, h, 0.0, -static_cast<double>(nD) * h,
                                            std::move(in), Topology::planar, tag);
          },
          [&](const shape::Custom&) -> MaskPtr {
            fail(ErrorKind::invalid_argument, "custom masks come from mask_from_bitmap");
          },
      },
      tag);
  if (mask->count() == 0) fail(ErrorKind::invalid_argument, "mask has no interior nodes");
  if (!mask->is_connected()) fail(ErrorKind::disconnected_mask, tag_name(tag) + " mask is disconnected");
  return mask;
}

MaskPtr mask_from_bitmap(std::size_t nx, std::size_t ny, double h,
                         const std::vector<std::uint8_t>& inside) {
  if (inside.size() != nx * ny) fail(ErrorKind::invalid_argument, "bitmap size mismatch");
  const std::size_t px = nx + 2, py = ny + 2;
  std::vector<std::uint8_t> in(px * py, 0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) in[(j + 1) * px + i + 1] = inside[j * nx + i] != 0;
  auto mask = std::make_shared<Mask2D>(px, py, h, -h, -h, std::move(in), Topology::planar,
                                       shape::Custom{});
  if (mask->count() == 0) fail(ErrorKind::invalid_argument, "mask has no interior nodes");
  if (!mask->is_connected()) fail(ErrorKind::disconnected_mask, "custom mask is disconnected");
  return mask;
}

Field2D distance_to_boundary(const MaskPtr& mask) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t nx = mask->nx(), ny = mask->ny();
  std::vector<double> g(nx * ny), d(nx * ny);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = mask->inside(k) ? inf : 0.0;
  std::vector<std::size_t> v;
  std::vector<double> z, buf;
  if (mask->topology() == Topology::planar) {
    for (std::size_t i = 0; i < nx; ++i) edt_1d(g.data() + i, d.data() + i, ny, nx, v, z, buf);
    for (std::size_t j = 0; j < ny; ++j)
      edt_1d(d.data() + j * nx, g.data() + j * nx, nx, 1, v, z, buf);
  } else {
    edt_1d(g.data() + nx, d.data() + nx, nx, 1, v, z, buf);
    std::copy(d.begin() + nx, d.begin() + 2 * nx, g.begin() + nx);
  }
  Field2D out(mask);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (mask->inside(k)) out.values[k] = std::sqrt(g[k]) * mask->h();
  return out;
}

Field2D distance_to_boundary_bruteforce(const MaskPtr& mask) {
  const std::size_t nx = mask->nx();
  const bool planar = mask->topology() == Topology::planar;
  std::vector<std::pair<double, double>> walls;
  for (std::size_t j = 0; j < mask->ny(); ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = mask->index(i, j);
      if (mask->inside(k)) continue;
      if (!planar && j != 1) continue;
      bool touches = (i > 0 && mask->inside(k - 1)) || (i + 1 < nx && mask->inside(k + 1));
      if (planar)
        touches = touches || (j > 0 && mask->inside(k - nx)) ||
                  (j + 1 < mask->ny() && mask->inside(k + nx));
      if (touches) walls.emplace_back(mask->x(i), mask->y(j));
    }
  Field2D out(mask);
  for (std::size_t j = 0; j < mask->ny(); ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = mask->index(i, j);
      if (!mask->inside(k)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [wx, wy] : walls)
        best = std::min(best, std::hypot(mask->x(i) - wx, mask->y(j) - wy));
      out.values[k] = best;
    }
  return out;
}

Field2D phi_kappa(const MaskPtr& mask, const HalfLineProfile& profile) {
  Field2D dist = distance_to_boundary(mask);
  for (std::size_t k = 0; k < dist.values.size(); ++k)
    if (mask->inside(k)) dist.values[k] = profile.value(dist.values[k]);
  return dist;
}

Field2D phi_kappa(const MaskPtr& mask, const Reaction& r) {
  const Field2D dist = distance_to_boundary(mask);
  double reach = 0.0;
  for (std::size_t k = 0; k < dist.values.size(); ++k) reach = std::max(reach, dist.values[k]);
  const double scale = 1.0 / std::sqrt(r.m());
  const HalfLineProfile profile = halfline_profile(r, std::max(reach, 40.0 * scale) + mask->h());
  return phi_kappa(mask, profile);
}

HalfLineProfile grid_halfline_profile(const Reaction& r, double h, double x_max) {
  if (!(h > 0.0) || !(x_max > 2.0 * h)) fail(ErrorKind::invalid_argument, "bad half-line grid");
  const std::size_t n = static_cast<std::size_t>(std::ceil(x_max / h));
  const HalfLineProfile cont = halfline_profile(r, static_cast<double>(n) * h);
  std::vector<double> u(n + 1);
  for (std::size_t i = 0; i <= n; ++i) u[i] = cont.value(static_cast<double>(i) * h);
  u[0] = 0.0;
  u[n] = 1.0;
  const double w = 1.0 / (h * h);
  std::vector<double> diag(n), rhs(n), cp(n);
  for (int it = 0; it < 50; ++it) {
    double res = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      rhs[i] = w * (u[i + 1] - 2.0 * u[i] + u[i - 1]) + r.f(u[i]);
      diag[i] = 2.0 * w - r.df(u[i]);
      res = std::max(res, std::abs(rhs[i]));
    }
    if (res < 1e-11) break;
    // Thomas with off-diagonals -w.
    cp[1] = -w / diag[1];
    rhs[1] /= diag[1];
    for (std::size_t i = 2; i < n; ++i) {
      const double den = diag[i] + w * cp[i - 1];
      cp[i] = -w / den;
      rhs[i] = (rhs[i] + w * rhs[i - 1]) / den;
    }
    for (std::size_t i = n - 1; i >= 1; --i) {
      if (i + 1 < n) rhs[i] -= cp[i] * rhs[i + 1];
      u[i] += rhs[i];
    }
  }
  HalfLineProfile p;
  p.alpha_star = (u[1] - u[0]) / h;
  p.decay_rate = cont.decay_rate;
  p.x_max = static_cast<double>(n) * h;
  for (std::size_t i = 0; i <= n; ++i) {
    const double d = i == 0 ? p.alpha_star : i == n ? 0.0 : (u[i + 1] - u[i - 1]) / (2.0 * h);
    p.samples.push_back({static_cast<double>(i) * h, u[i], d, -r.f(u[i])});
  }
  return p;
}

std::string field_csv(const Field2D& f) {
  std::ostringstream os;
  os << "x,y,value\n";
  char buf[96];
  const Mask2D& m = *f.mask;
  for (std::size_t j = 0; j < m.ny(); ++j)
    for (std::size_t i = 0; i < m.nx(); ++i) {
      const std::size_t k = m.index(i, j);
      if (!m.inside(k)) continue;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", m.x(i), m.y(j), f.values[k]);
      os << buf;
    }
  return os.str();
}

void write_field_binary(const Field2D& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + path);
  const char magic[4] = {'M', 'S', 'F', '1'};
  const std::uint64_t dims[2] = {f.mask->nx(), f.mask->ny()};
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) fail(ErrorKind::io, "write failed for " + path);
}

Field2D read_field_binary(const MaskPtr& mask, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  char magic[4];
  std::uint64_t dims[2];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || std::memcmp(magic, "MSF1", 4) != 0) fail(ErrorKind::io, "not a field file: " + path);
  if (dims[0] != mask->nx() || dims[1] != mask->ny())
    fail(ErrorKind::io, "field dimensions do not match the mask");
  Field2D f(mask);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) fail(ErrorKind::io, "truncated field file: " + path);
  return f;
}

std::string mask_pbm(const Mask2D& mask) {
  std::ostringstream os;
  os << "P1\n" << mask.nx() << " " << mask.ny() << "\n";
  for (std::size_t j = mask.ny(); j-- > 0;) {
    for (std::size_t i = 0; i < mask.nx(); ++i) os << (i ? " " : "") << (mask.inside(i, j) ? 1 : 0);
    os << "\n";
  }
  return os.str();
}

}  // namespace monostab
