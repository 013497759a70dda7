#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monostab/kernels.hpp"
#include "monostab/reaction.hpp"

namespace monostab {

enum class Topology { planar, line };

namespace shape {
struct Rectangle { double width, height; };                  // (0,w) x (0,h)
struct Strip { double width, length; };                      // (0,w) x (0,T)
struct Annulus { double R0, R1; };                           // R0 < |x| < R1
struct Disk { double radius; };                              // |x| < R
struct Interval { double length; };                          // (0,L), 1-D line
struct Pocket { double pocket_size, half_length, half_width, base_size; };
struct Wedge { double slope, truncation; };                  // slope |x| < y < truncation
struct Wells {
  double width;
  std::vector<double> depths;
  double base_width;
  double base_height;
};
struct Custom {};
}  // namespace shape

// Inside node next to a curved boundary: theta[d] is the distance to the true
// boundary along direction d (+x, +y, -x, -y) in units of h, 1 where the
// neighbour is inside.
struct BoundaryFit {
  std::size_t node = 0;
  double theta[4] = {1.0, 1.0, 1.0, 1.0};
};

using BuilderTag = std::variant<shape::Rectangle, shape::Strip, shape::Annulus, shape::Disk,
                                shape::Interval, shape::Pocket, shape::Wedge, shape::Wells,
                                shape::Custom>;

std::string tag_name(const BuilderTag& tag);

// Node grid: node (i, j) sits at (x0 + i h, y0 + j h). Outside nodes carry the
// Dirichlet value 0; the outermost ring of nodes is always outside.
class Mask2D {
 public:
  Mask2D(std::size_t nx, std::size_t ny, double h, double x0, double y0,
         std::vector<std::uint8_t> inside, Topology topology, BuilderTag tag);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double h() const noexcept { return h_; }
  double x(std::size_t i) const noexcept { return x0_ + static_cast<double>(i) * h_; }
  double y(std::size_t j) const noexcept { return y0_ + static_cast<double>(j) * h_; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }
  bool inside(std::size_t k) const noexcept { return inside_[k] != 0; }
  bool inside(std::size_t i, std::size_t j) const noexcept { return inside_[index(i, j)] != 0; }
  std::size_t count() const noexcept { return count_; }
  Topology topology() const noexcept { return topology_; }
  const BuilderTag& tag() const noexcept { return tag_; }
  // Set by the Disk and Annulus builders; empty for polygonal shapes.
  const std::vector<BoundaryFit>& boundary_fit() const noexcept { return fit_; }
  void set_boundary_fit(std::vector<BoundaryFit> fit) { fit_ = std::move(fit); }

  // 1.0 inside, 0.0 outside; feeds the SIMD kernels.
  const std::vector<double>& weights() const noexcept { return weights_; }
  kernels::Stencil stencil() const;

  bool is_connected() const;
  // Inside nodes with an outside 4-neighbour (x-neighbours only on a line).
  std::vector<std::size_t> boundary_nodes() const;
  // Nearest node to (x, y), if it is inside.
  std::optional<std::size_t> locate(double x, double y) const;

 private:
  std::size_t nx_, ny_;
  double h_, x0_, y0_;
  std::vector<std::uint8_t> inside_;
  std::vector<double> weights_;
  std::size_t count_ = 0;
  Topology topology_;
  BuilderTag tag_;
  std::vector<BoundaryFit> fit_;
};

using MaskPtr = std::shared_ptr<const Mask2D>;

// Values on the full node grid, zero outside the mask.
struct Field2D {
  MaskPtr mask;
  std::vector<double> values;

  Field2D() = default;
  explicit Field2D(MaskPtr m, double fill = 0.0);

  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
  double sup() const;
  double inf_inside() const;
  double sup_where(const std::function<bool(double x, double y)>& pred) const;
};

double sup_distance(const Field2D& a, const Field2D& b);

MaskPtr build_mask(const BuilderTag& tag, double h);
// Custom mask from an inside bitmap (padded automatically by one ring).
MaskPtr mask_from_bitmap(std::size_t nx, std::size_t ny, double h,
                         const std::vector<std::uint8_t>& inside);

// Euclidean distance from each inside node to the nearest outside node
// (exact transform; on a line only x-distances count).
Field2D distance_to_boundary(const MaskPtr& mask);
// Brute force over boundary-adjacent outside nodes; reference for tests.
Field2D distance_to_boundary_bruteforce(const MaskPtr& mask);

struct HalfLineProfile;
Field2D phi_kappa(const MaskPtr& mask, const Reaction& r);
// Half-line profile of the three-point scheme at spacing h: nodes x = i h on
// [0, x_max], phi(0) = 0, phi(x_max) = 1, Newton from the continuous profile.
// Matches the discrete solutions up to the relaxation tolerance instead of O(h^2).
HalfLineProfile grid_halfline_profile(const Reaction& r, double h, double x_max);
Field2D phi_kappa(const MaskPtr& mask, const HalfLineProfile& profile);

enum class Direction { up, down };

struct RelaxOptions {
  double dt_factor = 0.2;         // dt = dt_factor h^2
  double rate_tol = 1e-9;         // stop when max |u_{n+1}-u_n| / dt < rate_tol
  double relative_tol = 1e-6;     // and, going up, the relative rate on u > 1e-30
  std::size_t max_steps = 200'000'000;
  std::size_t check_every = 64;
  double monotone_tol = 1e-13;
  // Shortley-Weller weights at boundary_fit() nodes, updated point-implicitly.
  bool boundary_fit = false;
};

struct RelaxResult {
  Field2D u;
  std::size_t steps = 0;
  double rate = 0.0;
  double residual = 0.0;  // max |Lap_h u + f(u)| at the end
  bool converged = false;
};

RelaxResult relax(const MaskPtr& mask, const Reaction& r, const Field2D& u0, Direction dir,
                  const RelaxOptions& opts = {});

double steady_residual(const Field2D& u, const Reaction& r, bool boundary_fit = false);

struct PolishResult {
  Field2D u;
  std::size_t iterations = 0;
  double residual = 0.0;    // max |Lap_h u + f(u)| after the last step
  double max_change = 0.0;  // sup |u_polished - u_input|
};

// Newton on Lap_h u + f(u) = 0 from a relaxed iterate. Used where the slowest
// relaxation mode is nearly neutral and the explicit scheme would crawl.
PolishResult newton_polish(const Field2D& u, const Reaction& r, double tol = 1e-10,
                           std::size_t max_iterations = 20);

struct MinMaxPair {
  Field2D u_min;
  Field2D u_max;
  double gap = 0.0;
  double epsilon = 0.0;       // seed scale that passed the subsolution check
  double lambda_dirichlet = 0.0;
  bool trivial = false;       // lambda(-Lap) >= f'(0): both zero
  bool converged = true;
  std::size_t steps = 0;
};

MinMaxPair min_max_solutions(const MaskPtr& mask, const Reaction& r,
                             const RelaxOptions& opts = {});

struct BranchPoint {
  double kappa = 0.0;
  Field2D u_min;
  Field2D u_max;
  double gap = 0.0;
  double sup_umin = 0.0;
  double sup_umax = 0.0;
  double dist_phi_min = 0.0;
  double dist_phi_max = 0.0;
  double dist_grid_min = 0.0;  // against Phi_kappa built from grid_halfline_profile
  double dist_grid_max = 0.0;
  double lambda_phi = 0.0;
  bool converged = true;
};

struct BranchResult {
  std::vector<BranchPoint> points;
  std::optional<double> kappa_merge;       // first kappa from which on every gap < 1e-4
  std::optional<double> kappa_half_cross;  // first kappa with sup u_min > 1/2
};

using MaskFamily = std::function<MaskPtr(double kappa)>;

BranchResult dilation_branch(const MaskFamily& family, const Reaction& r,
                             const std::vector<double>& kappas, const RelaxOptions& opts = {});

std::string branch_csv(const BranchResult& branch);

struct DeepMpReport {
  double R = 0.0;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t eroded_cells = 0;
  double worst_excess = 0.0;  // max over trials of max_{Omega[R]} (v - u)
  std::uint64_t seed = 0;
};

DeepMpReport deep_mp_check(const MaskPtr& mask, const Reaction& r, double R, std::size_t trials,
                           std::uint64_t seed, const RelaxOptions& opts = {});

// Field I/O.
std::string field_csv(const Field2D& f);
void write_field_binary(const Field2D& f, const std::string& path);
Field2D read_field_binary(const MaskPtr& mask, const std::string& path);
std::string mask_pbm(const Mask2D& mask);

}  // namespace monostab
