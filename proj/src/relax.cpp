#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "monostab/error.hpp"
#include "monostab/grid2d.hpp"
#include "monostab/spectra.hpp"

namespace monostab {

namespace {

// Shortley-Weller weights and the weighted neighbour sum at a fitted node.
struct FitTerms {
  double weight = 0.0;  // sum of the weights, the diagonal
  double pull = 0.0;    // sum of weight * neighbour (0 on the boundary)
};

FitTerms fit_terms(const Mask2D& m, const BoundaryFit& fit, const std::vector<double>& u) {
  const double h2 = m.h() * m.h();
  const std::size_t step[4] = {1, m.nx(), 1, m.nx()};
  FitTerms t;
  for (int axis = 0; axis < 2; ++axis) {
    const double a = fit.theta[axis], b = fit.theta[axis + 2];  // + and - side
    const double wa = 2.0 / (a * (a + b) * h2), wb = 2.0 / (b * (a + b) * h2);
    const std::size_t k = fit.node;
    t.weight += wa + wb;
    if (a == 1.0) t.pull += wa * u[k + step[axis]];
    if (b == 1.0) t.pull += wb * u[k - step[axis]];
  }
  return t;
}

}  // namespace

double steady_residual(const Field2D& u, const Reaction& r, bool boundary_fit) {
  std::vector<double> out(u.values.size());
  double worst = kernels::reaction_residual(u.mask->stencil(), u.mask->weights(),
                                            r.coefficients(), u.values, out);
  if (!boundary_fit || u.mask->boundary_fit().empty()) return worst;
  for (const BoundaryFit& fit : u.mask->boundary_fit()) out[fit.node] = 0.0;
  worst = 0.0;
  for (double v : out) worst = std::max(worst, std::abs(v));
  for (const BoundaryFit& fit : u.mask->boundary_fit()) {
    const FitTerms t = fit_terms(*u.mask, fit, u.values);
    const double uk = u.values[fit.node];
    worst = std::max(worst, std::abs(t.pull - t.weight * uk + r.f(uk)));
  }
  return worst;
}

PolishResult newton_polish(const Field2D& u0, const Reaction& r, double tol,
                           std::size_t max_iterations) {
  const Mask2D& m = *u0.mask;
  std::vector<long> id(m.size(), -1);
  long n = 0;
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.inside(k)) id[k] = n++;
  const kernels::Stencil st = m.stencil();
  const std::size_t offs[4] = {1, st.nx, 1, st.nx};
  const double wgt[4] = {st.wx, st.wy, st.wx, st.wy};
  PolishResult out;
  out.u = u0;
  std::vector<double>& u = out.u.values;
  out.residual = steady_residual(out.u, r);
  for (; out.iterations < max_iterations && out.residual > tol; ++out.iterations) {
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd rhs(n);
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (id[k] < 0) continue;
      double diag = -r.df(u[k]), lap = 0.0;
      for (int d = 0; d < 4; ++d) {
        if (wgt[d] == 0.0) continue;
        const std::size_t nb = d < 2 ? k + offs[d] : k - offs[d];
        diag += 2.0 * wgt[d] * 0.5;
        lap += wgt[d] * (u[nb] - u[k]);
        if (id[nb] >= 0) t.emplace_back(id[k], id[nb], -wgt[d]);
      }
      t.emplace_back(id[k], id[k], diag);
      rhs[id[k]] = lap + r.f(u[k]);
    }
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success) fail(ErrorKind::non_convergence, "singular Jacobian in newton_polish");
    const Eigen::VectorXd d = lu.solve(rhs);
    for (std::size_t k = 0; k < m.size(); ++k)
      if (id[k] >= 0) u[k] += d[id[k]];
    out.residual = steady_residual(out.u, r);
  }
  for (std::size_t k = 0; k < m.size(); ++k)
    out.max_change = std::max(out.max_change, std::abs(u[k] - u0.values[k]));
  if (out.residual > tol)
    fail(ErrorKind::non_convergence, "newton_polish stalled at residual " + std::to_string(out.residual));
  return out;
}

RelaxResult relax(const MaskPtr& mask, const Reaction& r, const Field2D& u0, Direction dir,
                  const RelaxOptions& opts) {
  if (u0.values.size() != mask->size()) fail(ErrorKind::invalid_argument, "field/mask mismatch");
  const kernels::Stencil st = mask->stencil();
  const double dt = opts.dt_factor * mask->h() * mask->h();
  const auto coeffs = r.coefficients();
  const auto& w = mask->weights();
  std::vector<double> a(mask->size()), b(mask->size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = w[k] * u0.values[k];

  RelaxResult res;
  const bool up = dir == Direction::up;
  std::size_t step = 0;
  const bool fitted = opts.boundary_fit && !mask->boundary_fit().empty();
  while (step < opts.max_steps) {
    kernels::StepStats s = kernels::euler_step(st, w, coeffs, dt, a, b);
    ++step;
    if (fitted) {
      // Point-implicit in the diagonal: stable for any theta and still monotone.
      for (const BoundaryFit& fit : mask->boundary_fit()) {
        const FitTerms t = fit_terms(*mask, fit, a);
        const double uk = a[fit.node];
        b[fit.node] = (uk + dt * (t.pull + r.f(uk))) / (1.0 + dt * t.weight);
      }
      s = {};
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = b[k] - a[k];
        s.max_increase = std::max(s.max_increase, d);
        s.max_decrease = std::max(s.max_decrease, -d);
      }
    }
    const double wrong = up ? s.max_decrease : s.max_increase;
    if (wrong > opts.monotone_tol)
      fail(ErrorKind::monotonicity_violation,
           "iterate moved against the relaxation direction by " + std::to_string(wrong));
    a.swap(b);  // a: newest, b: previous
    res.rate = std::max(s.max_increase, s.max_decrease) / dt;
    if (res.rate < opts.rate_tol || step % opts.check_every == 0) {
      if (res.rate >= opts.rate_tol) continue;
      if (up && kernels::max_relative_change(a, b, 1e-30) / dt >= opts.relative_tol) continue;
      res.converged = true;
      break;
    }
  }
  res.steps = step;
  res.u = Field2D(mask);
  res.u.values = std::move(a);
  res.residual = steady_residual(res.u, r, fitted);
  return res;
}

MinMaxPair min_max_solutions(const MaskPtr& mask, const Reaction& r, const RelaxOptions& opts) {
  MinMaxPair out;
  const SpectralResult eig = dirichlet_laplacian(mask, 1);
  out.lambda_dirichlet = eig.lambda1;
  RelaxResult top = relax(mask, r, Field2D(mask, 1.0), Direction::down, opts);
  out.u_max = std::move(top.u);
  out.converged = top.converged;
  out.steps = top.steps;
  if (eig.lambda1_grid >= r.m()) {
    // No small positive subsolution exists; the minimal solution is 0.
    out.trivial = true;
    out.u_min = Field2D(mask);
  } else {
    const kernels::Stencil st = mask->stencil();
    const double h = mask->h();
    const double tol_scale = 64.0 * std::numeric_limits<double>::epsilon() *
                             (8.0 / (h * h) + r.lipschitz());
    std::vector<double> v(mask->size()), res(mask->size());
    double eps = 1.0;
    bool ok = false;
    for (int halvings = 0; halvings <= 40 && !ok; ++halvings, eps *= 0.5) {
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = eps * eig.vec1[k];
      kernels::reaction_residual(st, mask->weights(), r.coefficients(), v, res);
      ok = true;
      for (std::size_t k = 0; k < v.size() && ok; ++k)
        if (mask->inside(k) && res[k] < -tol_scale * eps) ok = false;
      if (ok) break;
    }
    if (!ok) fail(ErrorKind::non_convergence, "no subsolution found after 40 halvings");
    out.epsilon = eps;
    Field2D seed(mask);
    seed.values = v;
    RelaxResult bottom = relax(mask, r, seed, Direction::up, opts);
    out.u_min = std::move(bottom.u);
    out.converged = out.converged && bottom.converged;
    out.steps += bottom.steps;
  }
  out.gap = sup_distance(out.u_max, out.u_min);
  return out;
}

}  // namespace monostab
