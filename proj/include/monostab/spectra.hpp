#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "monostab/grid2d.hpp"
#include "monostab/reaction.hpp"

namespace monostab {

struct SpectralResult {
  double lambda1 = 0.0;
  std::optional<double> lambda2;
  // Raw values on the finest grid, before any extrapolation.
  double lambda1_grid = 0.0;
  std::optional<double> lambda2_grid;
  bool extrapolated = false;
  std::vector<double> vec1;  // positive, sup-norm 1 (1-D: interior nodes; 2-D: full grid)
  std::vector<double> vec2;
  double residual = 0.0;     // || (A - lambda1) vec1 ||_inf on the finest grid
  std::size_t iterations = 0;
};

// -psi'' - q psi on (0, L), Dirichlet; q sampled at x_i = i L/(n+1), i = 1..n.
// One Richardson step against the every-other-node grid when n is odd.
SpectralResult eigen1d(std::span<const double> q, double length, int n_modes = 1);
// Samples q at n interior nodes (rounded up to odd n).
SpectralResult eigen1d(const std::function<double(double)>& q, double length, std::size_t n,
                       int n_modes = 1);

struct Eigen2dOptions {
  double tol = 1e-10;
  std::size_t max_iterations = 3000;
  std::size_t dense_limit = 600;
  std::optional<double> shift;  // overrides the coarse-grid estimate
};

// Five-point -Lap_h - q on the inside nodes; q on the full grid.
SpectralResult eigen2d(const Mask2D& mask, std::span<const double> q, int n_modes = 1,
                       const Eigen2dOptions& opts = {});
SpectralResult eigen2d(const Field2D& q, int n_modes = 1, const Eigen2dOptions& opts = {});
// q = 0.
SpectralResult dirichlet_laplacian(const MaskPtr& mask, int n_modes = 1);

// lambda(-Lap, B_1) from eigen2d on disk masks at spacings h and h/2.
double disk_constant(double h = 1.0 / 64.0);
// Same constant from the radial Bessel problem by shooting; independent check.
double disk_constant_radial();

struct ProductLemmaRow {
  double T = 0.0;
  double lambda_strip = 0.0;
  double lambda_interval = 0.0;
  double gap = 0.0;
};

// Strip (0,L) x (-T,T) with q constant in y, at the spacing of q1d, against
// the interval eigenvalue on the same grid.
std::vector<ProductLemmaRow> product_lemma_check(std::span<const double> q1d, double length,
                                                 const std::vector<double>& T_list);

struct LiebReport {
  double lhs = 0.0;   // min over centres of lambda(-Lap + V, Omega ∩ B_R(x))
  double rhs = 0.0;   // lambda(-Lap + V, Omega) + lambda_disk R^-2 + tol_disc
  double slack = 0.0;
  double tol_disc = 0.0;
  double lambda_domain = 0.0;
  double lambda_disk = 0.0;
  std::size_t centers_evaluated = 0;
  std::size_t centers_skipped = 0;
  double best_x = 0.0, best_y = 0.0;
  std::uint64_t seed = 0;
  bool holds() const { return slack >= 0.0; }
};

// V is the potential in -Lap + V.
LiebReport lieb_check(const Field2D& V, double R, std::size_t n_centers, std::uint64_t seed);

// rho = inf_{(0,s]} f(r)/r and the radius with lambda(-Lap, B_R) = rho.
double positivity_rate(const Reaction& r, double s);
double radius_of_positivity(const Reaction& r, double s, int dim);

}  // namespace monostab
