#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace monostab {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Simple polygon, counter-clockwise. The closed region is what the geometry
// lemmas call K.
class Polygon {
 public:
  // Validates simplicity and orientation (reorients clockwise input).
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return v_; }
  std::size_t size() const noexcept { return v_.size(); }
  Point vertex(std::size_t i) const { return v_[i % v_.size()]; }
  double area() const;
  double diameter() const;
  // Closed containment with absolute tolerance tol.
  bool contains(Point p, double tol = 1e-12) const;
  Polygon scaled(double c) const;

  nlohmann::json to_json() const;
  static Polygon from_json(const nlohmann::json& j);

  static Polygon square(double side = 1.0, Point center = {});
  static Polygon regular(std::size_t n, double circumradius = 1.0, double phase = 0.0);
  // L-shape [-1,1]^2 minus the corner square (a,1] x (a,1].
  static Polygon l_shape(double a = 0.5);
  // Two unit squares in the first and third quadrants joined through a small
  // regular arc of radius r about the origin; star-shaped only about 0.
  static Polygon hourglass(double r = 0.2, std::size_t arc_segments = 4);

 private:
  std::vector<Point> v_;
};

struct StarOptions {
  std::size_t samples_per_edge = 256;
};

// Every segment from a boundary sample to x lies in the closed polygon.
bool is_star_center(const Polygon& p, Point x, const StarOptions& opts = {});

struct KernelEstimate {
  std::vector<Point> centers;
  std::size_t grid = 0;
  double cell = 0.0;         // grid spacing
  double area = 0.0;         // centers * cell^2
  double area_ratio = 0.0;   // area / polygon area
  bool strongly_star_shaped = false;  // a sampled disk of radius 2 cells lies in the kernel
  Point disk_center{};
};

// Samples the (grid+1)^2 nodes of the bounding box.
KernelEstimate star_center_set(const Polygon& p, std::size_t grid, const StarOptions& opts = {});

// Smallest angle (radians) between a ray from c and the edge it meets, over
// the edge samples.
double min_transversality_angle(const Polygon& p, Point c, const StarOptions& opts = {});
constexpr double kTransversalityThreshold = 1e-3;

// dist(kappa dP, dP) by sampling both boundaries (512 per edge) against exact
// segment distances. Requires 0 to be a star center.
double dilation_separation(const Polygon& p, double kappa, std::size_t samples_per_edge = 512);

double point_segment_distance(Point p, Point a, Point b);

}  // namespace monostab
