#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>

#include "monostab/error.hpp"
#include "monostab/grid2d.hpp"
#include "monostab/shoot1d.hpp"
#include "monostab/spectra.hpp"

namespace monostab {

namespace {

double linearized_lambda(const Field2D& phi, const Reaction& r) {
  const Mask2D& m = *phi.mask;
  std::vector<double> q(m.size(), 0.0);
  for (std::size_t k = 0; k < q.size(); ++k)
    if (m.inside(k)) q[k] = r.df(phi.values[k]);
  if (m.topology() == Topology::line) {
    std::vector<double> row(q.begin() + static_cast<long>(m.nx()) + 1,
                            q.begin() + static_cast<long>(2 * m.nx()) - 1);
    return eigen1d(row, m.h() * static_cast<double>(m.nx() - 1), 1).lambda1_grid;
  }
  return eigen2d(m, q, 1).lambda1_grid;
}

}  // namespace

BranchResult dilation_branch(const MaskFamily& family, const Reaction& r,
                             const std::vector<double>& kappas, const RelaxOptions& opts) {
  for (std::size_t i = 1; i < kappas.size(); ++i)
    if (!(kappas[i] > kappas[i - 1])) fail(ErrorKind::invalid_argument, "kappas must increase");
  BranchResult out;
  std::vector<MaskPtr> masks;
  double reach = 0.0;
  for (double kappa : kappas) {
    masks.push_back(family(kappa));
    const Field2D d = distance_to_boundary(masks.back());
    reach = std::max(reach, d.sup());
  }
  const HalfLineProfile profile =
      halfline_profile(r, std::max(reach, 40.0 / std::sqrt(r.m())) + 1.0);
  std::optional<HalfLineProfile> grid_profile;
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const MaskPtr& mask = masks[i];
    if (!grid_profile || grid_profile->samples[1].x != mask->h())
      grid_profile = grid_halfline_profile(r, mask->h(), profile.x_max);
    MinMaxPair mm = min_max_solutions(mask, r, opts);
    // Drop the relaxation floor; keep the relaxed state if Newton wanders.
    for (Field2D* u : {&mm.u_min, &mm.u_max}) {
      if (!mm.converged || u->sup() == 0.0) continue;
      try {
        PolishResult pol = newton_polish(*u, r, 1e-11);
        if (pol.max_change < 1e-6) *u = std::move(pol.u);
      } catch (const Error&) {
      }
    }
    mm.gap = sup_distance(mm.u_max, mm.u_min);
    BranchPoint p;
    p.kappa = kappas[i];
    const Field2D phi = phi_kappa(mask, profile);
    p.gap = mm.gap;
    p.sup_umin = mm.u_min.sup();
    p.sup_umax = mm.u_max.sup();
    p.dist_phi_min = sup_distance(mm.u_min, phi);
    p.dist_phi_max = sup_distance(mm.u_max, phi);
    const Field2D phi_grid = phi_kappa(mask, *grid_profile);
    p.dist_grid_min = sup_distance(mm.u_min, phi_grid);
    p.dist_grid_max = sup_distance(mm.u_max, phi_grid);
    p.lambda_phi = linearized_lambda(phi, r);
    p.converged = mm.converged;
    p.u_min = std::move(mm.u_min);
    p.u_max = std::move(mm.u_max);
    if (!out.kappa_half_cross && p.sup_umin > 0.5) out.kappa_half_cross = p.kappa;
    out.points.push_back(std::move(p));
  }
  for (std::size_t i = out.points.size(); i-- > 0 && out.points[i].gap < 1e-4;)
    out.kappa_merge = out.points[i].kappa;
  return out;
}

std::string branch_csv(const BranchResult& branch) {
  std::ostringstream os;
  os << "kappa,gap,sup_umin,sup_umax,dist_phi_min,dist_phi_max,dist_grid_min,dist_grid_max,"
        "lambda_phi\n";
  char buf[256];
  for (const auto& p : branch.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  p.kappa, p.gap, p.sup_umin, p.sup_umax, p.dist_phi_min, p.dist_phi_max,
                  p.dist_grid_min, p.dist_grid_max, p.lambda_phi);
    os << buf;
  }
  return os.str();
}

DeepMpReport deep_mp_check(const MaskPtr& mask, const Reaction& r, double R, std::size_t trials,
                           std::uint64_t seed, const RelaxOptions& opts) {
  DeepMpReport rep;
  rep.R = R;
  rep.trials = trials;
  rep.seed = seed;
  const Field2D dist = distance_to_boundary(mask);
  std::vector<std::size_t> deep;
  for (std::size_t k = 0; k < mask->size(); ++k)
    if (mask->inside(k) && dist.values[k] > R) deep.push_back(k);
  rep.eroded_cells = deep.size();
  if (deep.empty()) fail(ErrorKind::invalid_argument, "eroded domain is empty");

  const Field2D u = relax(mask, r, Field2D(mask, 1.0), Direction::down, opts).u;
  const double h = mask->h();
  // Smallest disk radius that carries a positive solution (lambda_disk / r^2 < m).
  const double r_min = std::sqrt(disk_constant() / r.m()) * 1.15;
  std::vector<std::size_t> hosts;
  for (std::size_t k = 0; k < mask->size(); ++k)
    if (mask->inside(k) && dist.values[k] > r_min + 2.0 * h) hosts.push_back(k);
  if (hosts.empty()) fail(ErrorKind::invalid_argument, "mask too thin for subsolution disks");

  std::mt19937_64 rng(seed);
  RelaxOptions short_run = opts;
  short_run.max_steps = 2000;
  for (std::size_t t = 0; t < trials; ++t) {
    std::uniform_int_distribution<std::size_t> pick(0, hosts.size() - 1);
    std::uniform_int_distribution<int> how_many(1, 3);
    Field2D v(mask);
    const int n_disks = how_many(rng);
    for (int d = 0; d < n_disks; ++d) {
      const std::size_t c = hosts[pick(rng)];
      const double cx = mask->x(c % mask->nx()), cy = mask->y(c / mask->nx());
      std::uniform_real_distribution<double> radius(r_min, std::max(r_min, dist.values[c] - h));
      const double rad = radius(rng);
      std::vector<std::uint8_t> in(mask->size(), 0);
      for (std::size_t k = 0; k < mask->size(); ++k) {
        if (!mask->inside(k)) continue;
        const double dx = mask->x(k % mask->nx()) - cx, dy = mask->y(k / mask->nx()) - cy;
        in[k] = dx * dx + dy * dy < rad * rad;
      }
      auto sub = std::make_shared<Mask2D>(mask->nx(), mask->ny(), h, mask->x(0), mask->y(0),
                                          std::move(in), Topology::planar, shape::Custom{});
      const Field2D w = relax(sub, r, Field2D(sub, 1.0), Direction::down, opts).u;
      for (std::size_t k = 0; k < v.values.size(); ++k) v.values[k] = std::max(v.values[k], w.values[k]);
    }
    // A subsolution evolves upward; a short parabolic run keeps it one.
    short_run.monotone_tol = 1e-9;
    const Field2D vt = relax(mask, r, v, Direction::up, short_run).u;
    double worst = -INFINITY;
    for (std::size_t k : deep) worst = std::max(worst, vt.values[k] - u.values[k]);
    rep.worst_excess = std::max(rep.worst_excess, worst);
    if (worst > 1e-9) ++rep.violations;
  }
  return rep;
}

}  // namespace monostab
