#include "monostab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace monostab::kernels {

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("MONOSTAB_ISA"); env && std::strcmp(env, "scalar") == 0)
    return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

StepStats euler_step(const Stencil& st, std::span<const double> mask,
                     std::span<const double> coeffs, double dt,
                     std::span<const double> u, std::span<double> u_next) {
  if (active_isa() == Isa::avx2) return avx2::euler_step(st, mask, coeffs, dt, u, u_next);
  return scalar::euler_step(st, mask, coeffs, dt, u, u_next);
}

double reaction_residual(const Stencil& st, std::span<const double> mask,
                         std::span<const double> coeffs,
                         std::span<const double> u, std::span<double> out) {
  if (active_isa() == Isa::avx2) return avx2::reaction_residual(st, mask, coeffs, u, out);
  return scalar::reaction_residual(st, mask, coeffs, u, out);
}

void schrodinger_apply(const Stencil& st, std::span<const double> mask,
                       std::span<const double> q, std::span<const double> u,
                       std::span<double> out) {
  if (active_isa() == Isa::avx2) return avx2::schrodinger_apply(st, mask, q, u, out);
  scalar::schrodinger_apply(st, mask, q, u, out);
}

void poly_eval(std::span<const double> coeffs, std::span<const double> x,
               std::span<double> out) {
  if (active_isa() == Isa::avx2) return avx2::poly_eval(coeffs, x, out);
  scalar::poly_eval(coeffs, x, out);
}

double max_relative_change(std::span<const double> a,
                           std::span<const double> b, double floor) {
  if (active_isa() == Isa::avx2) return avx2::max_relative_change(a, b, floor);
  return scalar::max_relative_change(a, b, floor);
}

}  // namespace monostab::kernels
