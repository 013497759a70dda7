#include "monostab/spatialdyn.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "monostab/error.hpp"
#include "monostab/shoot1d.hpp"
#include "monostab/spectra.hpp"

namespace monostab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

// Newton for -D^2 phi = f(phi) on the interior nodes, starting from phi.
void polish_interval_solution(const Reaction& r, double h, std::vector<double>& phi) {
  const std::size_t n = phi.size();
  const double w = 1.0 / (h * h);
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd res(n);
    std::vector<Trip> t;
    for (std::size_t j = 0; j < n; ++j) {
      const double left = j ? phi[j - 1] : 0.0;
      const double right = j + 1 < n ? phi[j + 1] : 0.0;
      res[j] = w * (2.0 * phi[j] - left - right) - r.f(phi[j]);
      t.emplace_back(j, j, 2.0 * w - r.df(phi[j]));
      if (j) t.emplace_back(j, j - 1, -w);
      if (j + 1 < n) t.emplace_back(j, j + 1, -w);
    }
    if (res.lpNorm<Eigen::Infinity>() < 1e-13) return;
    SpMat J(n, n);
    J.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SpMat> lu(J);
    if (lu.info() != Eigen::Success) fail(ErrorKind::newton_divergence, "singular cross-section Jacobian");
    const Eigen::VectorXd d = lu.solve(res);
    for (std::size_t j = 0; j < n; ++j) phi[j] -= d[j];
  }
}

struct Candidate {
  double alpha, dlength, lambda1, lambda2;
};

}  // namespace

CrossSection cross_section(const Reaction& r, std::size_t n, std::size_t scan) {
  if (n < 16) fail(ErrorKind::invalid_argument, "cross_section needs n >= 16");
  const LengthCurve curve = length_curve(r, scan);
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    if (curve.dlengths[i] >= 0.0) continue;
    const ShootRecord rec = shoot(r, curve.alphas[i]);
    const auto e = eigen1d([&](double y) { return r.df(rec.phi_at(y)); }, rec.length, 401, 2);
    cands.push_back({curve.alphas[i], curve.dlengths[i], e.lambda1, e.lambda2.value_or(0.0)});
  }
  const Candidate* best = nullptr;
  for (const auto& c : cands)
    if (c.lambda1 < 0.0 && c.lambda2 > 0.0 && (!best || c.lambda1 < best->lambda1)) best = &c;
  if (!best)
    fail(ErrorKind::not_found, "no alpha with dL/dalpha < 0 and lambda1 < 0 < lambda2 for " +
                                   r.describe());

  CrossSection cs;
  cs.reaction = r;
  cs.alpha = best->alpha;
  cs.dlength = best->dlength;
  const ShootRecord rec = shoot(r, cs.alpha);
  cs.L = rec.length;
  cs.s_max = rec.s_max;
  cs.n = n;
  cs.h = cs.L / static_cast<double>(n + 1);
  cs.phi.resize(n);
  for (std::size_t j = 0; j < n; ++j) cs.phi[j] = rec.phi_at(static_cast<double>(j + 1) * cs.h);
  polish_interval_solution(r, cs.h, cs.phi);
  cs.q.resize(n);
  for (std::size_t j = 0; j < n; ++j) cs.q[j] = r.df(cs.phi[j]);

  const auto grid = eigen1d(cs.q, cs.L, 2);
  cs.lambda1_grid = grid.lambda1_grid;
  cs.lambda2_grid = grid.lambda2_grid.value_or(0.0);
  cs.psi1 = grid.vec1;
  const auto fine = eigen1d([&](double y) { return r.df(rec.phi_at(y)); }, cs.L, 801, 2);
  cs.lambda1 = fine.lambda1;
  cs.lambda2 = fine.lambda2.value_or(0.0);
  if (!(cs.lambda1_grid < 0.0 && cs.lambda2_grid > 0.0))
    fail(ErrorKind::not_found, "discrete cross-section lost the lambda1 < 0 < lambda2 structure");
  return cs;
}

std::vector<std::complex<double>> spatial_spectrum(const CrossSection& cs) {
  const auto n = static_cast<Eigen::Index>(cs.n);
  const double w = 1.0 / (cs.h * cs.h);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  B.topRightCorner(n, n).setIdentity();
  for (Eigen::Index j = 0; j < n; ++j) {
    B(n + j, j) = 2.0 * w - cs.q[static_cast<std::size_t>(j)];
    if (j) B(n + j, j - 1) = -w;
    if (j + 1 < n) B(n + j, j + 1) = -w;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
  std::vector<std::complex<double>> mu(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(mu.begin(), mu.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
  return mu;
}

PeriodicOrbit orbit_search(const CrossSection& cs, double epsilon, const OrbitOptions& opts,
                           const PeriodicOrbit* warm) {
  if (!(epsilon >= 1e-3 && epsilon <= 5e-2))
    fail(ErrorKind::invalid_argument, "orbit_search epsilon must lie in [1e-3, 5e-2]");
  const std::size_t nt = opts.n_tau, ny = cs.n;
  if (nt < 8) fail(ErrorKind::invalid_argument, "orbit_search needs n_tau >= 8");
  if (warm && (warm->n_tau != nt || warm->n_y != ny))
    fail(ErrorKind::invalid_argument, "warm start grid does not match");
  const std::size_t N = nt * ny;
  const double ds = 1.0 / static_cast<double>(nt);
  const double wy = 1.0 / (cs.h * cs.h);
  const Reaction& r = cs.reaction;
  const double two_pi = 2.0 * std::numbers::pi;

  PeriodicOrbit orb;
  orb.epsilon = epsilon;
  orb.lambda1 = cs.lambda1_grid;
  orb.linear_period = two_pi / std::sqrt(-cs.lambda1_grid);
  orb.n_tau = nt;
  orb.n_y = ny;
  orb.h_y = cs.h;

  double psi_norm2 = 0.0;
  for (double p : cs.psi1) psi_norm2 += p * p;

  std::vector<double> u(N);
  double T = orb.linear_period, mu = 0.0;
  if (warm) {
    u = warm->field;
    T = warm->period;
  } else {
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        u[i * ny + j] = cs.phi[j] + epsilon * std::cos(two_pi * static_cast<double>(i) * ds) * cs.psi1[j];
  }

  auto id = [ny](std::size_t i, std::size_t j) { return static_cast<Eigen::Index>(i * ny + j); };
  const Eigen::Index iT = static_cast<Eigen::Index>(N), iMu = iT + 1, iAmp = iT, iPh = iT + 1;

  // Residual rows 0..N-1 are the PDE, row N amplitude, row N+1 phase.
  auto residual = [&](Eigen::VectorXd& R) {
    R.resize(static_cast<Eigen::Index>(N + 2));
    const double wt = 1.0 / (T * T * ds * ds);
    const double wd = mu / (2.0 * T * ds);
    for (std::size_t i = 0; i < nt; ++i) {
      const std::size_t ip = (i + 1) % nt, im = (i + nt - 1) % nt;
      for (std::size_t j = 0; j < ny; ++j) {
        const double c = u[i * ny + j];
        const double up = j + 1 < ny ? u[i * ny + j + 1] : 0.0;
        const double dn = j ? u[i * ny + j - 1] : 0.0;
        R[id(i, j)] = -wt * (u[ip * ny + j] - 2.0 * c + u[im * ny + j]) - wy * (up - 2.0 * c + dn) -
                      r.f(c) + wd * (u[ip * ny + j] - u[im * ny + j]);
      }
    }
    double amp = 0.0, ph = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      amp += (u[j] - cs.phi[j]) * cs.psi1[j];
      ph += (u[ny + j] - u[(nt - 1) * ny + j]) * cs.psi1[j];
    }
    R[iAmp] = amp - epsilon * psi_norm2;
    R[iPh] = ph;
  };

  auto pde_residual = [&]() {
    double worst = 0.0;
    const double wt = 1.0 / (T * T * ds * ds);
    for (std::size_t i = 0; i < nt; ++i) {
      const std::size_t ip = (i + 1) % nt, im = (i + nt - 1) % nt;
      for (std::size_t j = 0; j < ny; ++j) {
        const double c = u[i * ny + j];
        const double up = j + 1 < ny ? u[i * ny + j + 1] : 0.0;
        const double dn = j ? u[i * ny + j - 1] : 0.0;
        const double res = wt * (u[ip * ny + j] - 2.0 * c + u[im * ny + j]) + wy * (up - 2.0 * c + dn) + r.f(c);
        worst = std::max(worst, std::abs(res));
      }
    }
    return worst;
  };

  Eigen::VectorXd R;
  residual(R);
  double rnorm = R.lpNorm<Eigen::Infinity>();
  std::size_t it = 0;
  for (; it < opts.max_iterations && !(rnorm <= 0.1 * opts.tol && it > 0); ++it) {
    const double wt = 1.0 / (T * T * ds * ds);
    const double wd = mu / (2.0 * T * ds);
    std::vector<Trip> t;
    t.reserve(N * 9 + 2 * ny);
    for (std::size_t i = 0; i < nt; ++i) {
      const std::size_t ip = (i + 1) % nt, im = (i + nt - 1) % nt;
      for (std::size_t j = 0; j < ny; ++j) {
        const Eigen::Index row = id(i, j);
        const double c = u[i * ny + j];
        const double d2 = u[ip * ny + j] - 2.0 * c + u[im * ny + j];
        const double d1 = u[ip * ny + j] - u[im * ny + j];
        t.emplace_back(row, row, 2.0 * wt + 2.0 * wy - r.df(c));
        t.emplace_back(row, id(ip, j), -wt + wd);
        t.emplace_back(row, id(im, j), -wt - wd);
        if (j) t.emplace_back(row, id(i, j - 1), -wy);
        if (j + 1 < ny) t.emplace_back(row, id(i, j + 1), -wy);
        t.emplace_back(row, iT, 2.0 * d2 / (T * T * T * ds * ds) - mu * d1 / (2.0 * T * T * ds));
        t.emplace_back(row, iMu, d1 / (2.0 * T * ds));
      }
    }
    for (std::size_t j = 0; j < ny; ++j) {
      t.emplace_back(iAmp, id(0, j), cs.psi1[j]);
      t.emplace_back(iPh, id(1, j), cs.psi1[j]);
      t.emplace_back(iPh, id(nt - 1, j), -cs.psi1[j]);
    }
    SpMat J(static_cast<Eigen::Index>(N + 2), static_cast<Eigen::Index>(N + 2));
    J.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      fail(ErrorKind::newton_divergence, "singular orbit Jacobian at iteration " + std::to_string(it));
    const Eigen::VectorXd d = lu.solve(R);
    for (std::size_t k = 0; k < N; ++k) u[k] -= d[static_cast<Eigen::Index>(k)];
    T -= d[iT];
    mu -= d[iMu];
    residual(R);
    const double next = R.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(next) || T <= 0.0 || next > 1e6) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "orbit Newton diverged at iteration %zu, residual %.3e", it, next);
      fail(ErrorKind::newton_divergence, buf);
    }
    rnorm = next;
  }
  orb.iterations = it;
  orb.period = T;
  orb.unfolding = mu;
  orb.field = u;
  orb.residual = pde_residual();
  if (!(rnorm <= opts.tol)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "orbit Newton stalled after %zu iterations, residual %.3e", it, rnorm);
    fail(ErrorKind::newton_divergence, buf);
  }
  double amp = 0.0, lo = INFINITY;
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      amp = std::max(amp, std::abs(u[i * ny + j] - cs.phi[j]));
      lo = std::min(lo, u[i * ny + j]);
    }
  orb.amplitude = amp;
  if (amp < 1e-4)
    fail(ErrorKind::amplitude_collapse, "orbit collapsed onto the constant cross-section");
  if (!(lo > 0.0)) fail(ErrorKind::newton_divergence, "orbit field is not positive");
  return orb;
}

std::vector<double> spatial_energy(const std::vector<double>& field, std::size_t n_tau,
                                   std::size_t n_y, double h_tau, double h_y, const Reaction& r) {
  std::vector<double> H(n_tau, 0.0);
  for (std::size_t i = 0; i < n_tau; ++i) {
    const std::size_t ip = (i + 1) % n_tau, im = (i + n_tau - 1) % n_tau;
    double sum = 0.0;
    for (std::size_t j = 0; j < n_y; ++j) {
      const double c = field[i * n_y + j];
      const double ut = (field[ip * n_y + j] - field[im * n_y + j]) / (2.0 * h_tau);
      sum += 0.5 * ut * ut + r.F(c);
    }
    // u_y on the n_y + 1 cells including both Dirichlet ends.
    for (std::size_t j = 0; j <= n_y; ++j) {
      const double a = j ? field[i * n_y + j - 1] : 0.0;
      const double b = j < n_y ? field[i * n_y + j] : 0.0;
      const double uy = (b - a) / h_y;
      sum -= 0.5 * uy * uy;
    }
    H[i] = sum * h_y;
  }
  return H;
}

std::vector<double> spatial_energy(const PeriodicOrbit& orbit, const Reaction& r) {
  return spatial_energy(orbit.field, orbit.n_tau, orbit.n_y, orbit.h_tau(), orbit.h_y, r);
}

double energy_drift(const std::vector<double>& H) {
  double worst = 0.0;
  for (double v : H) worst = std::max(worst, std::abs(v - H.front()));
  return worst / (1.0 + std::abs(H.front()));
}

std::vector<double> shift_tau(const PeriodicOrbit& orbit, std::size_t k) {
  std::vector<double> out(orbit.field.size());
  for (std::size_t i = 0; i < orbit.n_tau; ++i) {
    const std::size_t src = (i + k) % orbit.n_tau;
    std::copy_n(orbit.field.begin() + static_cast<std::ptrdiff_t>(src * orbit.n_y), orbit.n_y,
                out.begin() + static_cast<std::ptrdiff_t>(i * orbit.n_y));
  }
  return out;
}

std::string orbit_csv(const PeriodicOrbit& orbit) {
  std::string out = "tau,y,u\n";
  char buf[96];
  for (std::size_t i = 0; i < orbit.n_tau; ++i)
    for (std::size_t j = 0; j < orbit.n_y; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", static_cast<double>(i) * orbit.h_tau(),
                    static_cast<double>(j + 1) * orbit.h_y, orbit.at(i, j));
      out += buf;
    }
  return out;
}

nlohmann::json orbit_header(const PeriodicOrbit& orbit) {
  return {{"T", orbit.period},
          {"epsilon", orbit.epsilon},
          {"lambda1", orbit.lambda1},
          {"residual", orbit.residual},
          {"amplitude", orbit.amplitude},
          {"unfolding", orbit.unfolding},
          {"n_tau", orbit.n_tau},
          {"n_y", orbit.n_y}};
}

}  // namespace monostab
