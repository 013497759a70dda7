#include "monostab/stargeom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "monostab/error.hpp"

namespace monostab {

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Point lerp(Point a, Point b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

double signed_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i], b = v[(i + 1) % v.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool on_segment(Point p, Point a, Point b, double tol) {
  return point_segment_distance(p, a, b) <= tol;
}

// Proper or touching intersection of closed segments ab and cd.
bool segments_meet(Point a, Point b, Point c, Point d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return on_segment(a, c, d, 0.0) || on_segment(b, c, d, 0.0) || on_segment(c, a, b, 0.0) ||
         on_segment(d, a, b, 0.0);
}

// Parameters t in (0,1) where segment a + t(b-a) meets the edge cd.
void crossing_params(Point a, Point b, Point c, Point d, std::vector<double>& out) {
  const double rx = b.x - a.x, ry = b.y - a.y, sx = d.x - c.x, sy = d.y - c.y;
  const double den = rx * sy - ry * sx;
  const double qx = c.x - a.x, qy = c.y - a.y;
  if (std::abs(den) > 1e-300) {
    const double t = (qx * sy - qy * sx) / den;
    const double u = (qx * ry - qy * rx) / den;
    if (u >= -1e-12 && u <= 1 + 1e-12 && t > 0.0 && t < 1.0) out.push_back(t);
    return;
  }
  // Parallel: project the edge endpoints when collinear.
  const double rr = rx * rx + ry * ry;
  if (rr == 0.0 || std::abs(qx * ry - qy * rx) > 1e-12 * std::sqrt(rr)) return;
  for (Point e : {c, d}) {
    const double t = ((e.x - a.x) * rx + (e.y - a.y) * ry) / rr;
    if (t > 0.0 && t < 1.0) out.push_back(t);
  }
}

// Exact closed-set test for the segment: split at every boundary contact and
// test each piece's midpoint.
bool segment_inside(const Polygon& p, Point a, Point b) {
  if (!p.contains(a) || !p.contains(b)) return false;
  std::vector<double> ts{0.0, 1.0};
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) crossing_params(a, b, p.vertex(i), p.vertex(i + 1), ts);
  std::sort(ts.begin(), ts.end());
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    if (ts[k + 1] - ts[k] < 1e-14) continue;
    if (!p.contains(lerp(a, b, 0.5 * (ts[k] + ts[k + 1])))) return false;
  }
  return true;
}

}  // namespace

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

Polygon::Polygon(std::vector<Point> vertices) : v_(std::move(vertices)) {
  if (v_.size() < 3) fail(ErrorKind::invalid_argument, "polygon needs at least 3 vertices");
  const double a = signed_area(v_);
  if (a == 0.0) fail(ErrorKind::invalid_argument, "polygon has zero area");
  if (a < 0.0) std::reverse(v_.begin(), v_.end());
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_meet(v_[i], v_[(i + 1) % n], v_[j], v_[(j + 1) % n]))
        fail(ErrorKind::invalid_argument, "polygon is not simple");
    }
}

double Polygon::area() const { return signed_area(v_); }

double Polygon::diameter() const {
  double d = 0.0;
  for (const Point& a : v_)
    for (const Point& b : v_) d = std::max(d, std::hypot(a.x - b.x, a.y - b.y));
  return d;
}

bool Polygon::contains(Point p, double tol) const {
  const std::size_t n = v_.size();
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = v_[i], b = v_[j];
    if (on_segment(p, a, b, tol)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

Polygon Polygon::scaled(double c) const {
  std::vector<Point> w = v_;
  for (Point& q : w) q = {c * q.x, c * q.y};
  return Polygon(std::move(w));
}

nlohmann::json Polygon::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Point& q : v_) arr.push_back({q.x, q.y});
  return {{"vertices", arr}};
}

Polygon Polygon::from_json(const nlohmann::json& j) {
  std::vector<Point> v;
  try {
    for (const auto& q : j.at("vertices")) v.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("malformed polygon JSON: ") + e.what());
  }
  return Polygon(std::move(v));
}

Polygon Polygon::square(double side, Point c) {
  const double s = 0.5 * side;
  return Polygon({{c.x - s, c.y - s}, {c.x + s, c.y - s}, {c.x + s, c.y + s}, {c.x - s, c.y + s}});
}

Polygon Polygon::regular(std::size_t n, double R, double phase) {
  std::vector<Point> v;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    v.push_back({R * std::cos(t), R * std::sin(t)});
  }
  return Polygon(std::move(v));
}

Polygon Polygon::l_shape(double a) {
  return Polygon({{-1, -1}, {1, -1}, {1, a}, {a, a}, {a, 1}, {-1, 1}});
}

Polygon Polygon::hourglass(double r, std::size_t arc_segments) {
  std::vector<Point> v{{1, 0}, {1, 1}, {0, 1}, {0, r}};
  const double pi = std::numbers::pi;
  for (std::size_t k = 1; k < arc_segments; ++k) {
    const double t = 0.5 * pi + 0.5 * pi * static_cast<double>(k) / static_cast<double>(arc_segments);
    v.push_back({r * std::cos(t), r * std::sin(t)});
  }
  v.insert(v.end(), {{-r, 0}, {-1, 0}, {-1, -1}, {0, -1}, {0, -r}});
  for (std::size_t k = 1; k < arc_segments; ++k) {
    const double t = 1.5 * pi + 0.5 * pi * static_cast<double>(k) / static_cast<double>(arc_segments);
    v.push_back({r * std::cos(t), r * std::sin(t)});
  }
  v.push_back({r, 0});
  return Polygon(std::move(v));
}

bool is_star_center(const Polygon& p, Point x, const StarOptions& opts) {
  if (!p.contains(x)) return false;
  const std::size_t m = opts.samples_per_edge;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point a = p.vertex(i), b = p.vertex(i + 1);
    for (std::size_t k = 0; k < m; ++k) {
      const Point y = lerp(a, b, static_cast<double>(k) / static_cast<double>(m));
      if (!segment_inside(p, y, x)) return false;
    }
  }
  return true;
}

KernelEstimate star_center_set(const Polygon& p, std::size_t grid, const StarOptions& opts) {
  if (grid < 32) fail(ErrorKind::invalid_argument, "star_center_set needs grid >= 32");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Point& q : p.vertices()) {
    x0 = std::min(x0, q.x);
    x1 = std::max(x1, q.x);
    y0 = std::min(y0, q.y);
    y1 = std::max(y1, q.y);
  }
  KernelEstimate est;
  est.grid = grid;
  est.cell = std::max(x1 - x0, y1 - y0) / static_cast<double>(grid);
  const std::size_t nx = static_cast<std::size_t>(std::floor((x1 - x0) / est.cell + 1e-9)) + 1;
  const std::size_t ny = static_cast<std::size_t>(std::floor((y1 - y0) / est.cell + 1e-9)) + 1;
  std::vector<std::uint8_t> hit(nx * ny, 0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const Point c{x0 + static_cast<double>(i) * est.cell, y0 + static_cast<double>(j) * est.cell};
      if (is_star_center(p, c, opts)) {
        hit[j * nx + i] = 1;
        est.centers.push_back(c);
      }
    }
  est.area = static_cast<double>(est.centers.size()) * est.cell * est.cell;
  est.area_ratio = est.area / p.area();
  // Disk of radius 2 cells: all nodes within distance 2 of (i, j) are centers.
  for (std::size_t j = 2; j + 2 < ny && !est.strongly_star_shaped; ++j)
    for (std::size_t i = 2; i + 2 < nx && !est.strongly_star_shaped; ++i) {
      bool all = true;
      for (int dj = -2; dj <= 2 && all; ++dj)
        for (int di = -2; di <= 2 && all; ++di)
          if (di * di + dj * dj <= 4 && !hit[(j + dj) * nx + (i + di)]) all = false;
      if (all) {
        est.strongly_star_shaped = true;
        est.disk_center = {x0 + static_cast<double>(i) * est.cell, y0 + static_cast<double>(j) * est.cell};
      }
    }
  return est;
}

double min_transversality_angle(const Polygon& p, Point c, const StarOptions& opts) {
  double worst = std::numbers::pi / 2.0;
  const std::size_t m = opts.samples_per_edge;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point a = p.vertex(i), b = p.vertex(i + 1);
    const double ex = b.x - a.x, ey = b.y - a.y, el = std::hypot(ex, ey);
    for (std::size_t k = 0; k < m; ++k) {
      const Point y = lerp(a, b, (static_cast<double>(k) + 0.5) / static_cast<double>(m));
      const double rx = y.x - c.x, ry = y.y - c.y, rl = std::hypot(rx, ry);
      if (rl == 0.0) return 0.0;
      const double s = std::abs(rx * ey - ry * ex) / (rl * el);
      worst = std::min(worst, std::asin(std::min(1.0, s)));
    }
  }
  return worst;
}

double dilation_separation(const Polygon& p, double kappa, std::size_t samples_per_edge) {
  if (!(kappa > 1.0)) fail(ErrorKind::invalid_argument, "dilation_separation needs kappa > 1");
  if (!is_star_center(p, {0.0, 0.0}))
    fail(ErrorKind::not_star_shaped, "polygon is not star-shaped about the origin");
  const Polygon q = p.scaled(kappa);
  auto one_way = [samples_per_edge](const Polygon& from, const Polygon& to) {
    double best = INFINITY;
    for (std::size_t i = 0; i < from.size(); ++i) {
      const Point a = from.vertex(i), b = from.vertex(i + 1);
      for (std::size_t k = 0; k < samples_per_edge; ++k) {
        const Point y = lerp(a, b, static_cast<double>(k) / static_cast<double>(samples_per_edge));
        for (std::size_t e = 0; e < to.size(); ++e)
          best = std::min(best, point_segment_distance(y, to.vertex(e), to.vertex(e + 1)));
      }
    }
    return best;
  };
  return std::min(one_way(q, p), one_way(p, q));
}

}  // namespace monostab
