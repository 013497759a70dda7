#include "monostab/spectra.hpp"

#include <Eigen/Dense>
#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>

#include "monostab/error.hpp"

namespace monostab {

namespace {

// ---- 1-D: symmetric tridiagonal with constant off-diagonal e ----

struct Tridiag {
  std::vector<double> a;  // diagonal
  double e;               // off-diagonal
};

Tridiag assemble_1d(std::span<const double> q, double h) {
  Tridiag t{std::vector<double>(q.size()), -1.0 / (h * h)};
  for (std::size_t i = 0; i < q.size(); ++i) t.a[i] = 2.0 / (h * h) - q[i];
  return t;
}

std::size_t sturm_count(const Tridiag& t, double x) {
  const double e2 = t.e * t.e;
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, e2);
  std::size_t neg = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < t.a.size(); ++i) {
    d = t.a[i] - x - (i ? e2 / d : 0.0);
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++neg;
  }
  return neg;
}

double bisect_eigenvalue(const Tridiag& t, std::size_t k) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < t.a.size(); ++i) {
    const double r = (i > 0 ? std::abs(t.e) : 0.0) + (i + 1 < t.a.size() ? std::abs(t.e) : 0.0);
    lo = std::min(lo, t.a[i] - r);
    hi = std::max(hi, t.a[i] + r);
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
      break;
    if (sturm_count(t, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Inverse iteration with the Thomas algorithm; returns a sup-normalized vector.
std::vector<double> tridiag_vector(const Tridiag& t, double lambda, bool positive) {
  const std::size_t n = t.a.size();
  std::vector<double> x(n, 1.0), c(n), d(n);
  const double tiny = std::numeric_limits<double>::epsilon() * (std::abs(t.e) + 1.0);
  for (int sweep = 0; sweep < 3; ++sweep) {
    double piv = t.a[0] - lambda;
    if (std::abs(piv) < tiny) piv = tiny;
    c[0] = t.e / piv;
    d[0] = x[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
      piv = t.a[i] - lambda - t.e * c[i - 1];
      if (std::abs(piv) < tiny) piv = tiny;
      c[i] = t.e / piv;
      d[i] = (x[i] - t.e * d[i - 1]) / piv;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    double big = 0.0;
    for (double v : x) big = std::max(big, std::abs(v));
    for (double& v : x) v /= big;
  }
  // Orient: positive principal vector, otherwise positive first entry.
  double sum = 0.0;
  for (double v : x) sum += v;
  if ((positive && sum < 0.0) || (!positive && x[0] < 0.0))
    for (double& v : x) v = -v;
  return x;
}

double tridiag_residual(const Tridiag& t, const std::vector<double>& v, double lambda) {
  double r = 0.0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    double av = t.a[i] * v[i];
    if (i > 0) av += t.e * v[i - 1];
    if (i + 1 < n) av += t.e * v[i + 1];
    r = std::max(r, std::abs(av - lambda * v[i]));
  }
  return r;
}

// ---- 2-D ----

using SpMat = Eigen::SparseMatrix<double>;

struct Indexing {
  std::vector<long> of_node;              // -1 outside
  std::vector<std::size_t> node_of;       // inverse
};

Indexing index_nodes(const Mask2D& m) {
  Indexing ix;
  ix.of_node.assign(m.size(), -1);
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.inside(k)) {
      ix.of_node[k] = static_cast<long>(ix.node_of.size());
      ix.node_of.push_back(k);
    }
  return ix;
}

SpMat assemble_2d(const Mask2D& m, std::span<const double> q, const Indexing& ix) {
  const double w = 1.0 / (m.h() * m.h());
  const bool planar = m.topology() == Topology::planar;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(ix.node_of.size() * 5);
  for (std::size_t r = 0; r < ix.node_of.size(); ++r) {
    const std::size_t k = ix.node_of[r];
    trip.emplace_back(r, r, (planar ? 4.0 : 2.0) * w - q[k]);
    const std::size_t nb[4] = {k - 1, k + 1, k - m.nx(), k + m.nx()};
    for (int t = 0; t < (planar ? 4 : 2); ++t)
      if (ix.of_node[nb[t]] >= 0) trip.emplace_back(r, ix.of_node[nb[t]], -w);
  }
  SpMat A(ix.node_of.size(), ix.node_of.size());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

struct Coarse {
  std::shared_ptr<Mask2D> mask;
  std::vector<double> q;
};

std::optional<Coarse> coarsen(const Mask2D& m, std::span<const double> q) {
  const bool planar = m.topology() == Topology::planar;
  const std::size_t nx = (m.nx() + 1) / 2;
  const std::size_t ny = planar ? (m.ny() + 1) / 2 : 3;
  if (nx < 3 || ny < 3) return std::nullopt;
  std::vector<std::uint8_t> in(nx * ny, 0);
  std::vector<double> qc(nx * ny, 0.0);
  for (std::size_t J = 1; J + 1 < ny; ++J)
    for (std::size_t I = 1; I + 1 < nx; ++I) {
      const std::size_t j = planar ? 2 * J : 1;
      const std::size_t k = m.index(2 * I, j);
      if (2 * I >= m.nx() || j >= m.ny() || !m.inside(k)) continue;
      in[J * nx + I] = 1;
      qc[J * nx + I] = q[k];
    }
  auto mc = std::make_shared<Mask2D>(nx, ny, 2.0 * m.h(), m.x(0), m.y(0), std::move(in),
                                     m.topology(), shape::Custom{});
  if (mc->count() < 50) return std::nullopt;
  return Coarse{mc, std::move(qc)};
}

double gershgorin_floor(const Mask2D& m, std::span<const double> q) {
  double lo = INFINITY;
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.inside(k)) lo = std::min(lo, -q[k]);
  return lo;
}

void finish_vectors(SpectralResult& res, const Mask2D& m, const Indexing& ix, const SpMat& A,
                    const Eigen::MatrixXd& X, const Eigen::VectorXd& theta, int n_modes) {
  auto to_grid = [&](const Eigen::VectorXd& v, bool principal) {
    Eigen::VectorXd w = v;
    if (principal ? w.sum() < 0.0 : w(0) < 0.0) w = -w;
    w /= w.cwiseAbs().maxCoeff();
    std::vector<double> g(m.size(), 0.0);
    for (std::size_t r = 0; r < ix.node_of.size(); ++r) g[ix.node_of[r]] = w(r);
    return std::make_pair(w, g);
  };
  auto [w1, g1] = to_grid(X.col(0), true);
  res.lambda1 = res.lambda1_grid = theta(0);
  res.vec1 = std::move(g1);
  res.residual = (A * w1 - theta(0) * w1).cwiseAbs().maxCoeff();
  if (n_modes > 1) {
    res.lambda2 = res.lambda2_grid = theta(1);
    res.vec2 = to_grid(X.col(1), false).second;
  }
}

SpectralResult eigen2d_impl(const Mask2D& m, std::span<const double> q, int n_modes,
                            const Eigen2dOptions& opts) {
  if (m.count() == 0) fail(ErrorKind::invalid_argument, "empty mask");
  const Indexing ix = index_nodes(m);
  const SpMat A = assemble_2d(m, q, ix);
  const long n = static_cast<long>(ix.node_of.size());
  SpectralResult res;

  if (static_cast<std::size_t>(n) <= opts.dense_limit) {
    const Eigen::MatrixXd dense(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    finish_vectors(res, m, ix, A, es.eigenvectors(), es.eigenvalues(), std::min<long>(n_modes, n));
    res.iterations = 1;
    return res;
  }

  double sigma;
  if (opts.shift) {
    sigma = *opts.shift;
  } else {
    sigma = gershgorin_floor(m, q) - 1.0;
    if (m.count() > 4000) {
      if (auto c = coarsen(m, q)) {
        Eigen2dOptions copt = opts;
        copt.tol = 1e-6;
        const SpectralResult cr = eigen2d_impl(*c->mask, c->q, 1, copt);
        sigma = std::max(sigma, cr.lambda1 - 1.0);
      }
    }
  }

  // Supernodal Cholesky of A - sigma I; failure to factor means the
  // shifted matrix is not positive definite, i.e. sigma sits above lambda1.
  Eigen::CholmodSupernodalLLT<SpMat, Eigen::Lower> ldlt;
  SpMat I(n, n);
  I.setIdentity();
  bool analyzed = false;
  auto factor = [&](double s) {
    const SpMat shifted = A - s * I;
    if (!analyzed) {
      ldlt.analyzePattern(shifted);
      analyzed = true;
    }
    ldlt.factorize(shifted);
    return ldlt.info() == Eigen::Success;
  };
  for (int attempt = 0; !factor(sigma); ++attempt) {
    if (attempt > 60) fail(ErrorKind::non_convergence, "could not place the shift below lambda1");
    sigma -= std::ldexp(1.0 + 0.1 * std::abs(sigma), attempt);
  }

  const int block = n_modes + 2;
  Eigen::MatrixXd X(n, block);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  X.col(0).setOnes();
  for (int c = 1; c < block; ++c)
    for (long r = 0; r < n; ++r) X(r, c) = uni(rng);

  Eigen::VectorXd theta = Eigen::VectorXd::Constant(block, INFINITY), prev = theta;
  int refactors = 0;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    Eigen::MatrixXd Y = ldlt.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Y = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    const Eigen::MatrixXd H = Y.transpose() * (A * Y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
    X = Y * es.eigenvectors();
    prev = theta;
    theta = es.eigenvalues();
    double change = 0.0;
    for (int c = 0; c < n_modes; ++c) change = std::max(change, std::abs(theta(c) - prev(c)));
    if (change < opts.tol) {
      ++it;
      break;
    }
    // Once the Ritz values settle, move the shift up toward lambda1.
    const double rel = change / (1.0 + std::abs(theta(0)));
    if (refactors < 2 && rel < 1e-2 && it > 2) {
      const double proposal = theta(0) - 0.25 * (theta(n_modes) - theta(0)) -
                              10.0 * change;
      if (proposal > sigma + 1e-3 * (theta(0) - sigma)) {
        ++refactors;
        if (factor(proposal))
          sigma = proposal;
        else if (!factor(sigma))
          fail(ErrorKind::non_convergence, "refactorization failed");
      }
    }
  }
  if (it >= opts.max_iterations)
    fail(ErrorKind::non_convergence, "eigen2d: eigenvalue change did not drop below tolerance");
  finish_vectors(res, m, ix, A, X, theta, n_modes);
  res.iterations = it;
  return res;
}

}  // namespace

SpectralResult eigen1d(std::span<const double> q, double length, int n_modes) {
  if (!(length > 0.0)) fail(ErrorKind::invalid_argument, "interval length must be positive");
  if (q.size() < 3) fail(ErrorKind::invalid_argument, "eigen1d needs at least 3 nodes");
  if (n_modes < 1 || n_modes > 2) fail(ErrorKind::invalid_argument, "n_modes must be 1 or 2");
  const std::size_t n = q.size();
  const double h = length / static_cast<double>(n + 1);
  const Tridiag t = assemble_1d(q, h);
  SpectralResult res;
  res.lambda1_grid = bisect_eigenvalue(t, 0);
  res.vec1 = tridiag_vector(t, res.lambda1_grid, true);
  res.residual = tridiag_residual(t, res.vec1, res.lambda1_grid);
  if (n_modes == 2) {
    res.lambda2_grid = bisect_eigenvalue(t, 1);
    res.vec2 = tridiag_vector(t, *res.lambda2_grid, false);
  }
  res.lambda1 = res.lambda1_grid;
  res.lambda2 = res.lambda2_grid;
  res.iterations = 1;
  if (n % 2 == 1 && n >= 7) {
    std::vector<double> qc;
    for (std::size_t i = 1; i < n; i += 2) qc.push_back(q[i]);
    const Tridiag tc = assemble_1d(qc, 2.0 * h);
    res.lambda1 = (4.0 * res.lambda1_grid - bisect_eigenvalue(tc, 0)) / 3.0;
    if (n_modes == 2) res.lambda2 = (4.0 * *res.lambda2_grid - bisect_eigenvalue(tc, 1)) / 3.0;
    res.extrapolated = true;
  }
  return res;
}

SpectralResult eigen1d(const std::function<double(double)>& q, double length, std::size_t n,
                       int n_modes) {
  if (n % 2 == 0) ++n;
  std::vector<double> s(n);
  const double h = length / static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n; ++i) s[i] = q(h * static_cast<double>(i + 1));
  return eigen1d(s, length, n_modes);
}

SpectralResult eigen2d(const Mask2D& mask, std::span<const double> q, int n_modes,
                       const Eigen2dOptions& opts) {
  if (n_modes < 1 || n_modes > 2) fail(ErrorKind::invalid_argument, "n_modes must be 1 or 2");
  if (q.size() != mask.size()) fail(ErrorKind::invalid_argument, "potential size mismatch");
  return eigen2d_impl(mask, q, n_modes, opts);
}

SpectralResult eigen2d(const Field2D& q, int n_modes, const Eigen2dOptions& opts) {
  return eigen2d(*q.mask, q.values, n_modes, opts);
}

SpectralResult dirichlet_laplacian(const MaskPtr& mask, int n_modes) {
  const std::vector<double> zero(mask->size(), 0.0);
  return eigen2d(*mask, zero, n_modes);
}

double disk_constant(double h) {
  static std::mutex mu;
  static std::vector<std::pair<double, double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  for (const auto& [hh, v] : cache)
    if (hh == h) return v;
  // The staircase disk is O(h) too large; extrapolate linearly from h and h/2.
  const double coarse = dirichlet_laplacian(build_mask(shape::Disk{1.0}, h)).lambda1;
  const double fine = dirichlet_laplacian(build_mask(shape::Disk{1.0}, 0.5 * h)).lambda1;
  const double v = 2.0 * fine - coarse;
  cache.emplace_back(h, v);
  return v;
}

double disk_constant_radial() {
  // psi'' + psi'/r + lambda psi = 0, psi(0) = 1, psi'(0) = 0; first zero at r = 1.
  auto psi_at_one = [](double lambda) {
    const int n = 20000;
    const double h = 1.0 / n;
    // Series start at r = h avoids the coordinate singularity.
    double r = h, y = 1.0 - lambda * h * h / 4.0, v = -lambda * h / 2.0;
    auto acc = [&](double rr, double yy, double vv) { return -vv / rr - lambda * yy; };
    for (int i = 1; i < n; ++i) {
      const double k1y = v, k1v = acc(r, y, v);
      const double k2y = v + 0.5 * h * k1v, k2v = acc(r + 0.5 * h, y + 0.5 * h * k1y, k2y);
      const double k3y = v + 0.5 * h * k2v, k3v = acc(r + 0.5 * h, y + 0.5 * h * k2y, k3y);
      const double k4y = v + h * k3v, k4v = acc(r + h, y + h * k3y, k4y);
      y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
      v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      r += h;
    }
    return y;
  };
  boost::uintmax_t iters = 100;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      psi_at_one, 4.0, 8.0, boost::math::tools::eps_tolerance<double>(48), iters);
  return 0.5 * (lo + hi);
}

std::vector<ProductLemmaRow> product_lemma_check(std::span<const double> q1d, double length,
                                                 const std::vector<double>& T_list) {
  const std::size_t n = q1d.size();
  const double h = length / static_cast<double>(n + 1);
  const double lambda_interval = eigen1d(q1d, length, 1).lambda1_grid;
  std::vector<ProductLemmaRow> rows;
  for (double T : T_list) {
    const MaskPtr mask = build_mask(shape::Strip{length, 2.0 * T}, h);
    if (mask->nx() != n + 2) fail(ErrorKind::invalid_argument, "strip grid does not match q1d");
    std::vector<double> q(mask->size(), 0.0);
    for (std::size_t j = 0; j < mask->ny(); ++j)
      for (std::size_t i = 1; i + 1 < mask->nx(); ++i) q[mask->index(i, j)] = q1d[i - 1];
    const double ls = eigen2d(*mask, q, 1).lambda1_grid;
    rows.push_back({T, ls, lambda_interval, ls - lambda_interval});
  }
  return rows;
}

LiebReport lieb_check(const Field2D& V, double R, std::size_t n_centers, std::uint64_t seed) {
  const Mask2D& m = *V.mask;
  const double h = m.h();
  if (!(R >= 4.0 * h)) fail(ErrorKind::invalid_argument, "Lieb radius must be at least 4h");
  LiebReport rep;
  rep.seed = seed;
  std::vector<double> q(V.values.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    q[k] = -V.values[k];
    if (m.inside(k)) scale = std::max(scale, std::abs(V.values[k]));
  }
  rep.lambda_domain = eigen2d(m, q, 1).lambda1_grid;
  rep.lambda_disk = disk_constant();
  rep.tol_disc = 10.0 * h * h * std::max(1.0, scale);
  rep.rhs = rep.lambda_domain + rep.lambda_disk / (R * R) + rep.tol_disc;

  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.inside(k)) nodes.push_back(k);
  std::mt19937_64 rng(seed);
  if (n_centers < nodes.size()) {
    std::shuffle(nodes.begin(), nodes.end(), rng);
    nodes.resize(n_centers);
    std::sort(nodes.begin(), nodes.end());
  }
  rep.lhs = INFINITY;
  for (std::size_t c : nodes) {
    const std::size_t ci = c % m.nx(), cj = c / m.nx();
    // Connected component of Omega ∩ B_R(x) containing x; its eigenvalue
    // bounds the intersection's from above, so the test stays sound.
    std::vector<std::uint8_t> in(m.size(), 0);
    std::vector<std::size_t> stack{c};
    in[c] = 1;
    std::size_t count = 0;
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      ++count;
      const std::size_t nb[4] = {k - 1, k + 1, k - m.nx(), k + m.nx()};
      for (std::size_t t : nb) {
        if (in[t] || !m.inside(t)) continue;
        const double dx = (static_cast<double>(t % m.nx()) - static_cast<double>(ci)) * h;
        const double dy = (static_cast<double>(t / m.nx()) - static_cast<double>(cj)) * h;
        if (dx * dx + dy * dy < R * R) {
          in[t] = 1;
          stack.push_back(t);
        }
      }
    }
    if (count == 0) {
      ++rep.centers_skipped;
      continue;
    }
    Mask2D sub(m.nx(), m.ny(), h, m.x(0), m.y(0), std::move(in), Topology::planar,
               shape::Custom{});
    const double l = eigen2d(sub, q, 1).lambda1_grid;
    ++rep.centers_evaluated;
    if (l < rep.lhs) {
      rep.lhs = l;
      rep.best_x = m.x(ci);
      rep.best_y = m.y(cj);
    }
  }
  if (rep.centers_evaluated == 0) fail(ErrorKind::invalid_argument, "all Lieb centres skipped");
  rep.slack = rep.rhs - rep.lhs;
  return rep;
}

double positivity_rate(const Reaction& r, double s) {
  if (!(s > 0.0 && s < 1.0)) fail(ErrorKind::invalid_argument, "s must lie in (0, 1)");
  double rho = r.m();  // limit of f(r)/r as r -> 0
  const int n = 10000;
  for (int i = 1; i <= n; ++i) {
    const double x = s * static_cast<double>(i) / n;
    rho = std::min(rho, r.f(x) / x);
  }
  return rho;
}

double radius_of_positivity(const Reaction& r, double s, int dim) {
  const double rho = positivity_rate(r, s);
  if (!(rho > 0.0)) fail(ErrorKind::invalid_reaction, "f(r)/r not positive on (0, s]");
  if (dim == 1) return std::acos(-1.0) / (2.0 * std::sqrt(rho));
  if (dim == 2) return std::sqrt(disk_constant() / rho);
  fail(ErrorKind::invalid_argument, "radius_of_positivity supports d = 1, 2");
}

}  // namespace monostab
