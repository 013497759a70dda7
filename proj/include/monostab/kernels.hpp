#pragma once

// Grid kernels for the five-point operator on a padded node grid.
// Every routine has a scalar reference and an AVX2+FMA variant; the
// dispatcher picks one at runtime.

#include <cstddef>
#include <span>
#include <string_view>

namespace monostab::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);
bool cpu_has_avx2();
Isa active_isa();
// Forces a variant. Requesting avx2 on a CPU without it keeps scalar.
void set_isa(Isa isa);

// Row-major nx*ny grid. The first and last row and column are padding and
// must carry mask 0. wy = 0 gives a 1-D line (ny = 3, middle row active).
struct Stencil {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double wx = 0.0;  // 1/h^2 along x
  double wy = 0.0;  // 1/h^2 along y, or 0
};

struct StepStats {
  double max_increase = 0.0;
  double max_decrease = 0.0;
};

// Polynomial coefficients are in the power basis, c[0] + c[1] s + ...

// u_next = mask * (u + dt (Lap_h u + p(u))).
StepStats euler_step(const Stencil& st, std::span<const double> mask,
                     std::span<const double> coeffs, double dt,
                     std::span<const double> u, std::span<double> u_next);

// out = mask * (Lap_h u + p(u)); returns max |out|.
double reaction_residual(const Stencil& st, std::span<const double> mask,
                         std::span<const double> coeffs,
                         std::span<const double> u, std::span<double> out);

// out = mask * (-Lap_h u - q u).
void schrodinger_apply(const Stencil& st, std::span<const double> mask,
                       std::span<const double> q, std::span<const double> u,
                       std::span<double> out);

void poly_eval(std::span<const double> coeffs, std::span<const double> x,
               std::span<double> out);

// max |a - b| / b over entries with b > floor; 0 if there are none.
double max_relative_change(std::span<const double> a,
                           std::span<const double> b, double floor);

namespace scalar {
StepStats euler_step(const Stencil&, std::span<const double>,
                     std::span<const double>, double, std::span<const double>,
                     std::span<double>);
double reaction_residual(const Stencil&, std::span<const double>,
                         std::span<const double>, std::span<const double>,
                         std::span<double>);
void schrodinger_apply(const Stencil&, std::span<const double>,
                       std::span<const double>, std::span<const double>,
                       std::span<double>);
void poly_eval(std::span<const double>, std::span<const double>,
               std::span<double>);
double max_relative_change(std::span<const double>, std::span<const double>,
                           double);
}  // namespace scalar

namespace avx2 {
StepStats euler_step(const Stencil&, std::span<const double>,
                     std::span<const double>, double, std::span<const double>,
                     std::span<double>);
double reaction_residual(const Stencil&, std::span<const double>,
                         std::span<const double>, std::span<const double>,
                         std::span<double>);
void schrodinger_apply(const Stencil&, std::span<const double>,
                       std::span<const double>, std::span<const double>,
                       std::span<double>);
void poly_eval(std::span<const double>, std::span<const double>,
               std::span<double>);
double max_relative_change(std::span<const double>, std::span<const double>,
                           double);
}  // namespace avx2

}  // namespace monostab::kernels
