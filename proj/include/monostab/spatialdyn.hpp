#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "monostab/reaction.hpp"

namespace monostab {

// Unstable interval solution phi_alpha on (0, L) and its linearization
// -d_y^2 - f'(phi). Discrete quantities live on y_j = j h, j = 1..n, h = L/(n+1).
struct CrossSection {
  Reaction reaction = Reaction::logistic(1.0);
  double alpha = 0.0;
  double L = 0.0;
  double s_max = 0.0;
  double dlength = 0.0;  // dL/dalpha at alpha
  std::size_t n = 0;
  double h = 0.0;
  std::vector<double> phi;   // discrete steady state (Newton-corrected)
  std::vector<double> q;     // f'(phi)
  std::vector<double> psi1;  // sup-norm 1
  // Raw grid eigenvalues of the discrete operator; they set the orbit period.
  double lambda1_grid = 0.0;
  double lambda2_grid = 0.0;
  // Extrapolated eigenvalues of the continuous problem.
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Scans the length curve for dL/dalpha < 0 and keeps the alpha with the most
// negative lambda1. Throws not_found when no such alpha has lambda1 < 0 < lambda2.
CrossSection cross_section(const Reaction& r, std::size_t n = 127, std::size_t scan = 64);

// Eigenvalues of the first-order operator B = [[0, I], [-d_y^2 - f'(phi), 0]]
// on the discrete cross-section, sorted by modulus.
std::vector<std::complex<double>> spatial_spectrum(const CrossSection& cs);

struct OrbitOptions {
  std::size_t n_tau = 64;
  double tol = 1e-8;
  std::size_t max_iterations = 40;
};

// u(tau, y) on a periodic tau grid tau_i = i T / n_tau times the y grid of the
// cross-section. field is tau-major: field[i * n_y + j].
struct PeriodicOrbit {
  double period = 0.0;
  double epsilon = 0.0;
  double amplitude = 0.0;  // max |u - phi|
  double residual = 0.0;   // max |u_tt + u_yy + f(u)|
  double unfolding = 0.0;  // coefficient of the damping term, zero at a true orbit
  double lambda1 = 0.0;
  double linear_period = 0.0;  // 2 pi / sqrt|lambda1_grid|
  std::size_t iterations = 0;
  std::size_t n_tau = 0;
  std::size_t n_y = 0;
  double h_y = 0.0;
  std::vector<double> field;

  double at(std::size_t i, std::size_t j) const { return field[i * n_y + j]; }
  double h_tau() const { return period / static_cast<double>(n_tau); }
};

// Newton on the torus for -u_tt - u_yy = f(u), Dirichlet in y, periodic in tau
// with unknown period. Amplitude pinned by <u(0) - phi, psi1> = eps |psi1|^2 and
// phase by <u_t(0), psi1> = 0. warm, when given, replaces the linear guess.
PeriodicOrbit orbit_search(const CrossSection& cs, double epsilon, const OrbitOptions& opts = {},
                           const PeriodicOrbit* warm = nullptr);

// H(tau_i) = sum_y [u_t^2/2 - u_y^2/2 + F(u)] h_y, with centered u_t.
std::vector<double> spatial_energy(const std::vector<double>& field, std::size_t n_tau,
                                   std::size_t n_y, double h_tau, double h_y, const Reaction& r);
std::vector<double> spatial_energy(const PeriodicOrbit& orbit, const Reaction& r);

// max_i |H_i - H_0| / (1 + |H_0|).
double energy_drift(const std::vector<double>& H);

// Field shifted by k tau-nodes.
std::vector<double> shift_tau(const PeriodicOrbit& orbit, std::size_t k);

std::string orbit_csv(const PeriodicOrbit& orbit);
nlohmann::json orbit_header(const PeriodicOrbit& orbit);

}  // namespace monostab
