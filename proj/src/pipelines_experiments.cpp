#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "monostab/error.hpp"
#include "monostab/grid2d.hpp"
#include "monostab/pipelines.hpp"
#include "monostab/shoot1d.hpp"
#include "monostab/spatialdyn.hpp"
#include "monostab/spectra.hpp"
#include "monostab/stargeom.hpp"

namespace monostab {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string out;
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!out.empty()) out += ',';
    out += buf;
  }
  return out + "\n";
}

std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

Report start(const ExperimentConfig& cfg) {
  Report rep;
  rep.experiment = cfg.experiment;
  rep.config = cfg.params;
  rep.config["experiment"] = to_string(cfg.experiment);
  if (cfg.seed) rep.config["seed"] = *cfg.seed;
  return rep;
}

// Tuning is a few seconds; share it between experiments in one process.
HumpTuning cached_tuning(const HumpTuneOptions& o) {
  static std::mutex mu;
  static std::map<std::string, HumpTuning> cache;
  char key[256];
  std::snprintf(key, sizeof key, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g", o.theta_lo,
                o.theta_hi, o.eps_lo, o.eps_hi, o.m_lo, o.m_hi, o.length, o.merge_length);
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, tune_double_hump(o)).first;
  return it->second;
}

Reaction hump_reaction(const json& p, Report& rep) {
  if (!p.at("tune").get<bool>()) {
    rep.results["reaction"] = p.at("reaction");
    return Reaction::from_json(p.at("reaction"));
  }
  const json& t = p.at("tuning");
  HumpTuneOptions o;
  o.theta_lo = t.at("theta_lo");
  o.theta_hi = t.at("theta_hi");
  o.eps_lo = t.at("eps_lo");
  o.eps_hi = t.at("eps_hi");
  o.m_lo = t.at("m_lo");
  o.m_hi = t.at("m_hi");
  o.length = t.at("length");
  o.merge_length = t.at("merge_length");
  const HumpTuning ht = cached_tuning(o);
  rep.results["tuning"] = {{"m", ht.m},
                           {"theta", ht.theta},
                           {"epsilon", ht.epsilon},
                           {"L_zero", ht.L_zero},
                           {"L_peak", ht.L_peak},
                           {"L_valley", ht.L_valley},
                           {"s_peak", ht.s_peak},
                           {"s_valley", ht.s_valley},
                           {"s_lo", ht.s_lo},
                           {"s_hi", ht.s_hi},
                           {"objective", ht.objective},
                           {"evaluations", ht.evaluations}};
  rep.results["reaction"] = ht.reaction().to_json();
  return ht.reaction();
}

// sup_{(0,1]} f(s)/s on a fine grid, at least f'(0).
double growth_bound(const Reaction& r) {
  double mu = r.m();
  for (int i = 1; i <= 10000; ++i) {
    const double s = i / 10000.0;
    mu = std::max(mu, r.f(s) / s);
  }
  return mu;
}

// Principal eigenvalue of -d^2 - f'(phi) on the shooting profile at alpha.
double profile_lambda1(const Reaction& r, double alpha) {
  const ShootRecord rec = shoot(r, alpha);
  return eigen1d([&](double y) { return r.df(rec.phi_at(y)); }, rec.length, 801).lambda1;
}

bool strictly_decreasing(const std::vector<double>& v, double floor) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1]) && !(v[i] <= floor && v[i - 1] <= floor)) return false;
  return true;
}

}  // namespace

Report run_lengthcurve(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const double alpha_small = p.at("alpha_small"), limit_tol = p.at("limit_tol");
  const double oracle_tol = p.at("oracle_tol"), energy_tol = p.at("energy_tol");
  const auto n = p.at("n").get<std::size_t>();
  const auto n_oracle = p.at("oracle_points").get<std::size_t>();
  const auto refinements = p.at("refinements").get<int>();
  rep.tolerances = {{"limit", limit_tol}, {"oracle", oracle_tol}, {"energy", energy_tol}};
  json rows = json::array();
  std::size_t idx = 0;
  for (const json& rj : p.at("reactions")) {
    const Reaction r = Reaction::from_json(rj);
    const std::string tag = std::to_string(idx++) + "_" + to_string(r.family());
    const LengthCurve curve = length_curve(r, n);
    rep.tables["lengthcurve_" + tag + ".csv"] = to_csv(curve);
    json row = {{"reaction", r.describe()}, {"alpha_star", curve.alpha_star},
                {"sign_changes", curve.sign_changes.size()}};

    // Small-amplitude limit pi m^{-1/2}.
    const double L_small = shoot(r, alpha_small * std::sqrt(r.m())).length;
    const double L_lin = std::numbers::pi / std::sqrt(r.m());
    row["L_small"] = L_small;
    if (r.family() != Family::double_hump)
      rep.check("limit length " + r.describe(), std::abs(L_small - L_lin) <= limit_tol,
                fmt("|L - pi m^-1/2| = %.3e", std::abs(L_small - L_lin)));

    // Shooting against quadrature.
    double worst = 0.0, worst_energy = 0.0;
    for (std::size_t k = 0; k < n_oracle; ++k) {
      const double a = curve.alpha_star * (0.02 + 0.96 * static_cast<double>(k) /
                                                      static_cast<double>(n_oracle - 1));
      const ShootRecord rec = shoot(r, a);
      worst = std::max(worst, std::abs(rec.length - length_by_quadrature(r, a)));
      worst_energy = std::max(worst_energy, rec.energy_residual);
    }
    row["oracle_max_error"] = worst;
    row["energy_max_residual"] = worst_energy;
    rep.check("shooting vs quadrature " + r.describe(), worst <= oracle_tol,
              fmt("max |L_shoot - L_quad| = %.3e", worst));
    rep.check("energy invariant " + r.describe(), worst_energy <= energy_tol,
              fmt("max residual %.3e", worst_energy));

    // Energy drift against step size, at a mid-range alpha and large steps.
    const double a_mid = 0.5 * curve.alpha_star;
    double step = 0.08 / std::sqrt(r.m());
    std::vector<double> drift;
    for (int i = 0; i <= refinements; ++i, step *= 0.5) {
      ShootOptions o;
      o.step = step;
      drift.push_back(shoot(r, a_mid, o).energy_residual);
    }
    double worst_order = INFINITY;
    for (std::size_t i = 1; i < drift.size(); ++i)
      worst_order = std::min(worst_order, std::log2(drift[i - 1] / drift[i]));
    row["energy_drift_by_step"] = drift;
    row["energy_order"] = worst_order;
    rep.check("RK4 order " + r.describe(), worst_order >= 3.5,
              fmt("observed order %.2f", worst_order));
    rows.push_back(row);
  }
  rep.results["reactions"] = rows;
  return rep;
}

Report run_dilate(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const bool one_d = cfg.experiment == Experiment::dilate1d;
  const Reaction r = hump_reaction(p, rep);
  const double h = p.at("h");
  const auto kappas = doubles(p.at("kappas"));
  const double merge_tol = p.at("merge_tol"), floor = p.at("monotone_floor");
  MaskFamily family;
  if (one_d) {
    family = [h](double k) { return build_mask(shape::Interval{k}, h); };
  } else {
    const double size = p.at("size");
    const std::string shp = p.at("shape");
    if (shp == "disk")
      family = [h, size](double k) { return build_mask(shape::Disk{0.5 * k * size}, h); };
    else if (shp == "square")
      family = [h, size](double k) { return build_mask(shape::Rectangle{k * size, k * size}, h); };
    else
      fail(ErrorKind::config, "dilate2d shape must be 'disk' or 'square'");
  }
  const BranchResult br = dilation_branch(family, r, kappas);
  rep.tables["branch.csv"] = branch_csv(br);
  rep.tolerances = {{"merge", merge_tol}, {"monotone_floor", floor}};
  json pts = json::array();
  std::vector<double> dist;
  for (const auto& pt : br.points) {
    pts.push_back({{"kappa", pt.kappa},
                   {"gap", pt.gap},
                   {"sup_umin", pt.sup_umin},
                   {"sup_umax", pt.sup_umax},
                   {"dist_phi", std::max(pt.dist_phi_min, pt.dist_phi_max)},
                   {"dist_grid_phi", std::max(pt.dist_grid_min, pt.dist_grid_max)},
                   {"lambda_phi", pt.lambda_phi},
                   {"converged", pt.converged}});
    dist.push_back(std::max(pt.dist_grid_min, pt.dist_grid_max));
  }
  rep.results["points"] = pts;
  rep.results["kappa_merge"] = br.kappa_merge ? json(*br.kappa_merge) : json();
  rep.results["kappa_half_cross"] = br.kappa_half_cross ? json(*br.kappa_half_cross) : json();

  bool converged = true;
  for (const auto& pt : br.points) converged = converged && pt.converged;
  rep.check("relaxations converged", converged);
  rep.check("branch merges", br.kappa_merge.has_value(),
            br.kappa_merge ? fmt("kappa_merge = %g", *br.kappa_merge) : "no kappa with gap < tol");
  if (br.kappa_merge) {
    const auto it = std::find_if(br.points.begin(), br.points.end(),
                                 [&](const BranchPoint& b) { return b.kappa == *br.kappa_merge; });
    rep.check("gap at kappa_merge", it->gap <= merge_tol, fmt("gap %.3e", it->gap));
  }
  rep.check("distance to Phi_kappa decreasing", strictly_decreasing(dist, floor));

  if (one_d) {
    const double gap_min = p.at("gap_min"), tol = p.at("halfline_tol");
    const double X = p.at("halfline_length");
    rep.tolerances["gap_min"] = gap_min;
    rep.tolerances["halfline"] = tol;
    rep.check("gap at first kappa", br.points.front().gap >= gap_min,
              fmt("gap %.4f", br.points.front().gap));
    if (br.kappa_merge && br.kappa_half_cross)
      rep.check("u_min crosses 1/2 no later than the merge",
                *br.kappa_half_cross <= *br.kappa_merge);
    // Half-line eigenvalue on the same grid, same profile as Phi_kappa.
    const HalfLineProfile hp = halfline_profile(r, X + 1.0);
    const auto nodes = static_cast<std::size_t>(std::lround(X / h));
    std::vector<double> q(nodes - 1);
    for (std::size_t i = 1; i < nodes; ++i) q[i - 1] = r.df(hp.value(static_cast<double>(i) * h));
    const double lam_half = eigen1d(q, static_cast<double>(nodes) * h, 1).lambda1_grid;
    const double lam_last = br.points.back().lambda_phi;
    rep.results["lambda_halfline"] = lam_half;
    rep.check("linearization at largest kappa vs half-line", std::abs(lam_last - lam_half) <= tol,
              fmt("%.6f vs %.6f", lam_last, lam_half));
    rep.check("half-line eigenvalue in (0, |f'(1)|]",
              lam_half > 0.0 && lam_half <= std::abs(r.df(1.0)) + 1e-9,
              fmt("%.4f, |f'(1)| = %.4f", lam_half, std::abs(r.df(1.0))));
  }
  return rep;
}

Report run_pocket(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const Reaction r = hump_reaction(p, rep);
  const double h = p.at("h"), L = p.at("half_length"), B = p.at("base_size");
  const double alpha = p.at("alpha"), gap_min = p.at("gap_min"), rate_tol = p.at("rate_tol");
  const double margin_min = p.at("rate_margin");
  rep.tolerances = {{"gap_min", gap_min}, {"rate", rate_tol}};

  // (i) Two interval solutions straddling 1/2 on (0, 1).
  const auto heights = heights_of_length(r, 1.0);
  rep.results["interval_heights"] = heights;
  rep.check("interval solutions straddle 1/2",
            heights.size() >= 2 && heights.front() < 0.5 && heights.back() > 0.5);

  // Pocket size: square with the widest straddle.
  std::string scan = "P,sup_umin,sup_umax\n";
  double best_margin = -INFINITY, P = 0.0;
  for (double size : doubles(p.at("pocket_sizes"))) {
    const MinMaxPair mm = min_max_solutions(build_mask(shape::Rectangle{size, size}, h), r);
    const double lo = mm.u_min.sup(), hi = mm.u_max.sup();
    scan += csv_row({size, lo, hi});
    const double margin = std::min(0.5 - lo, hi - 0.5);
    if (margin > best_margin) {
      best_margin = margin;
      P = size;
    }
  }
  rep.tables["pocket_scan.csv"] = scan;
  rep.results["pocket_size"] = P;
  rep.check("pocket square has two solutions straddling 1/2", best_margin > 0.0,
            fmt("margin %.4f at P = %g", best_margin, P));

  const double mu = growth_bound(r);
  rep.results["mu"] = mu;
  rep.results["lipschitz"] = r.lipschitz();
  const long nB = std::lround(B / h), nL = std::lround(2.0 * L / h);
  const double yc = static_cast<double>(nB / 2) * h;
  const double x_mid = static_cast<double>(nB + nL / 2) * h;
  auto pocket_sups = [&](const MinMaxPair& mm) {
    auto in_pocket = [&](double x, double) { return x > B + 2.0 * L + 0.5 * h; };
    return std::pair{mm.u_min.sup_where(in_pocket), mm.u_max.sup_where(in_pocket)};
  };

  // (ii) Narrow the bridge until the midpoint bound holds.
  std::string sweep = "delta,midpoint_ratio,rate,rate_predicted,gap\n";
  std::optional<double> delta;
  MinMaxPair chosen;
  double rate = 0.0, predicted = 0.0;
  for (double d : doubles(p.at("deltas"))) {
    const MaskPtr mask = build_mask(shape::Pocket{P, L, d, B}, h);
    MinMaxPair mm = min_max_solutions(mask, r);
    const long nd = std::lround(d / h);
    double ratio = 0.0;
    for (long jj = -nd + 1; jj < nd; ++jj) {
      const auto k = mask->locate(x_mid, yc + static_cast<double>(jj) * h);
      if (!k) fail(ErrorKind::invalid_argument, "bridge cross-section outside the mask");
      const double phi = std::sin(std::numbers::pi * static_cast<double>(jj + nd) /
                                  (2.0 * static_cast<double>(nd)));
      ratio = std::max(ratio, mm.u_max[*k] / (0.25 * phi));
    }
    // Exponential decay of u_max along the bridge centreline, base side.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (double x = B + 0.2; x <= B + L - 0.2 + 1e-12; x += h) {
      const auto k = mask->locate(x, yc);
      if (!k || mm.u_max[*k] <= 0.0) continue;
      const double y = std::log(mm.u_max[*k]);
      sx += x, sy += y, sxx += x * x, sxy += x * y, cnt += 1;
    }
    const double fit = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    const double arg = alpha / (d * d) - mu;
    const double pred = arg > 0.0 ? std::sqrt(arg) : NAN;
    sweep += csv_row({d, ratio, fit, pred, mm.gap});
    if (ratio <= 1.0 && arg > margin_min * alpha / (d * d) && !delta) {
      delta = d;
      rate = fit;
      predicted = pred;
      chosen = std::move(mm);
      break;
    }
  }
  rep.tables["bridge_sweep.csv"] = sweep;
  if (!delta) fail(ErrorKind::sweep_exhausted, "no bridge width passed the midpoint test");
  rep.results["delta"] = *delta;
  rep.results["rate"] = rate;
  rep.results["rate_predicted"] = predicted;
  const double lip_arg = alpha / (*delta * *delta) - r.lipschitz();
  rep.results["rate_predicted_lipschitz"] = lip_arg > 0.0 ? json(std::sqrt(lip_arg)) : json();

  // (iii) Composite min/max.
  const auto [pmin, pmax] = pocket_sups(chosen);
  rep.results["gap"] = chosen.gap;
  rep.results["pocket_sup_umin"] = pmin;
  rep.results["pocket_sup_umax"] = pmax;
  rep.check("composite gap", chosen.gap >= gap_min, fmt("gap %.4f", chosen.gap));
  rep.check("pocket sups straddle 1/2", pmin < 0.5 && 0.5 < pmax,
            fmt("u_min %.4f, u_max %.4f", pmin, pmax));
  rep.check("bridge decay rate", std::abs(rate - predicted) <= rate_tol * predicted,
            fmt("fit %.4f vs %.4f", rate, predicted));

  // Wider bridge: report only.
  const double wide = *delta * p.at("widen_factor").get<double>();
  try {
    const MinMaxPair mm = min_max_solutions(build_mask(shape::Pocket{P, L, wide, B}, h), r);
    const auto [wmin, wmax] = pocket_sups(mm);
    rep.results["widened"] = {{"delta", wide}, {"gap", mm.gap}, {"pocket_sup_umin", wmin},
                              {"pocket_sup_umax", wmax}};
  } catch (const Error& e) {
    rep.results["widened"] = {{"delta", wide}, {"error", e.what()}};
  }
  return rep;
}

Report run_marginal(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const Reaction f1 = hump_reaction(p, rep);
  const Reaction f0 = Reaction::logistic(f1.m());
  const double width = p.at("width"), tol = p.at("lambda_tol"), off = p.at("offset");
  rep.tolerances = {{"width", width}, {"lambda", tol}};
  const MarginalResult mr = find_marginal(f0, f1, width);
  rep.results["tau_star"] = mr.tau_star;
  rep.results["tau_bracket"] = {mr.tau_lo, mr.tau_hi};
  rep.results["bisections"] = mr.bisections;
  rep.results["critical"] = {{"s", mr.critical.s},
                             {"alpha", mr.critical.alpha},
                             {"length", mr.critical.length},
                             {"dL_dalpha", mr.critical.dL_dalpha}};
  rep.results["lambda1"] = mr.lambda1;
  rep.results["lambda1_grid"] = mr.lambda1_grid;
  rep.check("tau* located", mr.tau_hi - mr.tau_lo <= width && mr.tau_lo <= mr.tau_star &&
                                mr.tau_star <= mr.tau_hi,
            fmt("bracket width %.2e", mr.tau_hi - mr.tau_lo));
  rep.check("marginal eigenvalue", std::abs(mr.lambda1) <= tol, fmt("lambda1 = %.3e", mr.lambda1));

  const SlopeMinimum below = min_length_slope(Reaction::interpolated(mr.tau_star - off, f0, f1));
  const Reaction above_r = Reaction::interpolated(mr.tau_star + off, f0, f1);
  const SlopeMinimum above = min_length_slope(above_r);
  const double lam_above = profile_lambda1(above_r, above.alpha);
  rep.results["below"] = {{"tau", mr.tau_star - off}, {"min_dL_dalpha", below.dL_dalpha}};
  rep.results["above"] = {{"tau", mr.tau_star + off}, {"min_dL_dalpha", above.dL_dalpha},
                          {"lambda1", lam_above}};
  rep.check("length map injective below tau*", below.dL_dalpha > 0.0,
            fmt("min dL/dalpha = %.4f", below.dL_dalpha));
  rep.check("dip above tau* is unstable", above.dL_dalpha < 0.0 && lam_above < 0.0,
            fmt("min dL/dalpha = %.4f, lambda1 = %.4f", above.dL_dalpha, lam_above));

  std::string scan = "tau,min_dL_dalpha\n";
  for (int i = -4; i <= 4; ++i) {
    const double tau = std::clamp(mr.tau_star + 0.025 * i, 0.0, 1.0);
    scan += csv_row({tau, min_length_slope(Reaction::interpolated(tau, f0, f1)).dL_dalpha});
  }
  rep.tables["tau_scan.csv"] = scan;
  return rep;
}

Report run_striporbit(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const Reaction r = Reaction::from_json(p.at("reaction"));
  const double amp_min = p.at("amplitude_min"), res_tol = p.at("residual_tol");
  const double period_tol = p.at("period_tol"), energy_tol = p.at("energy_tol");
  rep.tolerances = {{"amplitude_min", amp_min}, {"residual", res_tol}, {"period", period_tol},
                    {"energy", energy_tol}};
  const CrossSection cs =
      cross_section(r, p.at("n").get<std::size_t>(), p.at("scan").get<std::size_t>());
  const auto spec = spatial_spectrum(cs);
  rep.results["cross_section"] = {{"alpha", cs.alpha},         {"length", cs.L},
                                  {"dL_dalpha", cs.dlength},   {"lambda1", cs.lambda1},
                                  {"lambda2", cs.lambda2},     {"lambda1_grid", cs.lambda1_grid},
                                  {"lambda2_grid", cs.lambda2_grid},
                                  {"spatial_mu0", {spec[0].real(), spec[0].imag()}}};
  rep.check("cross-section has one negative eigenvalue", cs.lambda1 < -1e-3 && cs.lambda2 > 1e-3,
            fmt("lambda1 %.4f, lambda2 %.4f", cs.lambda1, cs.lambda2));
  OrbitOptions o;
  o.n_tau = p.at("n_tau").get<std::size_t>();
  o.tol = p.at("tol");
  std::string table = "epsilon,period,linear_period,lambda1,amplitude,residual,energy_drift,unfolding\n";
  json rows = json::array();
  std::optional<PeriodicOrbit> prev;
  std::size_t idx = 0;
  for (double eps : doubles(p.at("epsilons"))) {
    const PeriodicOrbit orb = orbit_search(cs, eps, o, prev ? &*prev : nullptr);
    const double drift = energy_drift(spatial_energy(orb, r));
    const double lin = 2.0 * std::numbers::pi / std::sqrt(std::abs(cs.lambda1));
    table += csv_row({eps, orb.period, lin, cs.lambda1, orb.amplitude, orb.residual, drift,
                      orb.unfolding});
    rows.push_back({{"epsilon", eps}, {"period", orb.period}, {"amplitude", orb.amplitude},
                    {"residual", orb.residual}, {"energy_drift", drift},
                    {"unfolding", orb.unfolding}, {"iterations", orb.iterations}});
    const std::string tag = fmt(" eps=%g", eps);
    rep.check("orbit amplitude" + tag, orb.amplitude >= amp_min, fmt("%.3e", orb.amplitude));
    rep.check("orbit residual" + tag, orb.residual <= res_tol, fmt("%.3e", orb.residual));
    rep.check("orbit period" + tag, std::abs(orb.period - lin) <= period_tol * lin,
              fmt("T = %.4f vs %.4f", orb.period, lin));
    rep.check("spatial energy conserved" + tag, drift <= energy_tol, fmt("%.3e", drift));
    rep.tables["orbit_" + std::to_string(idx++) + ".csv"] = orbit_csv(orb);
    prev = orb;
  }
  rep.tables["orbits.csv"] = table;
  rep.results["orbits"] = rows;
  return rep;
}

Report run_wells(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const Reaction f1 = hump_reaction(p, rep);
  const Reaction f0 = Reaction::logistic(f1.m());
  const double band = p.at("band"), cross_tol = p.at("cross_check_tol");
  rep.tolerances = {{"band", band}, {"cross_check", cross_tol}};
  const MarginalResult mr = find_marginal(f0, f1);
  const DiscreteMarginal dm =
      find_discrete_marginal(f0, f1, p.at("n_cells").get<std::size_t>(), mr.tau_star);
  const double L = dm.width, h = dm.h;
  rep.results["marginal"] = {{"tau_star", mr.tau_star},    {"tau_star_grid", dm.tau_star},
                             {"s", dm.s},                  {"width", L},
                             {"h", h},                     {"lambda1_interval", dm.lambda1_grid}};

  const auto depths = doubles(p.at("depths"));
  auto ladder = depths;
  for (double d : doubles(p.at("extra_depths"))) ladder.push_back(d);
  if (!std::is_sorted(ladder.begin(), ladder.end()) || ladder.size() < 3)
    fail(ErrorKind::config, "well depths must increase, at least three in total");
  const double bw = p.at("base_width").get<double>() * L, bh = p.at("base_height").get<double>() * L;

  std::string table = "depth,lambda,newton_iterations,residual\n";
  std::vector<double> lam;
  MaskPtr prev_mask;
  Field2D prev_u;
  double prev_depth = 0.0, mid_error = 0.0;
  for (std::size_t w = 0; w < ladder.size(); ++w) {
    const double D = ladder[w] * L;
    const MaskPtr mask = build_mask(shape::Wells{L, {D}, bw, bh}, h);
    Field2D guess(mask);
    if (!prev_mask) {
      RelaxOptions o;
      o.rate_tol = 1e-4;
      o.relative_tol = 1.0;
      guess = relax(mask, dm.reaction, Field2D(mask, 1.0), Direction::down, o).u;
    } else {
      // Stretch the shallower solution along the well.
      for (std::size_t j = 0; j < mask->ny(); ++j)
        for (std::size_t i = 0; i < mask->nx(); ++i) {
          if (!mask->inside(i, j)) continue;
          const double y = mask->y(j);
          const double yp = y < 0.0 ? y * prev_depth / D : y;
          const long jp = std::clamp(std::lround((yp - prev_mask->y(0)) / h), 0L,
                                     static_cast<long>(prev_mask->ny()) - 1);
          guess[mask->index(i, j)] = prev_u[prev_mask->index(i, static_cast<std::size_t>(jp))];
        }
    }
    const PolishResult pol = newton_polish(guess, dm.reaction, 1e-10, 40);
    Field2D q(mask);
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) q[k] = dm.reaction.df(pol.u[k]);
    const double l = eigen2d(q, 1).lambda1_grid;
    lam.push_back(l);
    table += csv_row({D, l, static_cast<double>(pol.iterations), pol.residual});
    if (w + 1 == depths.size()) {
      // Mid-depth row of the deepest asserted well against the interval solution.
      const auto j = static_cast<std::size_t>(std::lround((-0.5 * D - mask->y(0)) / h));
      std::size_t c = 0;
      for (std::size_t i = 0; i < mask->nx(); ++i)
        if (mask->inside(i, j)) {
          if (c < dm.phi.size()) mid_error = std::max(mid_error, std::abs(pol.u[mask->index(i, j)] - dm.phi[c]));
          ++c;
        }
      if (c != dm.phi.size()) mid_error = INFINITY;
    }
    prev_mask = mask;
    prev_u = pol.u;
    prev_depth = D;
  }
  rep.tables["wells.csv"] = table;
  const std::vector<double> asserted(lam.begin(), lam.begin() + static_cast<long>(depths.size()));
  rep.results["lambda"] = asserted;
  rep.results["lambda_ladder"] = lam;
  rep.check("lambda decreasing in depth", strictly_decreasing(asserted, -INFINITY));

  // lambda ~ a + b D^-2 + c D^-3 through the three deepest wells.
  const std::size_t n = lam.size();
  Eigen::Matrix3d A;
  Eigen::Vector3d rhs;
  for (std::size_t i = 0; i < 3; ++i) {
    const double x = 1.0 / (ladder[n - 3 + i] * L);
    A.row(static_cast<long>(i)) << 1.0, x * x, x * x * x;
    rhs[static_cast<long>(i)] = lam[n - 3 + i];
  }
  const Eigen::Vector3d coef = A.fullPivLu().solve(rhs);
  rep.results["lambda_extrapolated"] = coef[0];
  rep.results["extrapolation_coefficients"] = {coef[0], coef[1], coef[2]};
  rep.check("extrapolated lambda in band", std::abs(coef[0]) <= band,
            fmt("%.3e", coef[0]));
  rep.results["mid_depth_error"] = mid_error;
  rep.check("mid-depth profile matches the interval solution", mid_error <= cross_tol,
            fmt("%.3e", mid_error));
  return rep;
}

Report run_exterior(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const Reaction r = Reaction::from_json(p.at("reaction"));
  const double R0 = p.at("R0"), span = p.at("span"), tol = p.at("ray_tol");
  rep.tolerances = {{"ray", tol}};
  std::optional<RadialProfile> planar;
  json rows = json::array();
  for (int d : p.at("dims").get<std::vector<int>>()) {
    const RadialProfile prof = radial_exterior(r, d, R0, R0 + span);
    std::size_t bad = 0, flat = 0;
    for (std::size_t i = 0; i < prof.samples.size(); ++i) {
      if (!(prof.samples[i].dphi > 0.0)) ++bad;
      if (i > 0 && !(prof.samples[i].phi > prof.samples[i - 1].phi)) ++flat;
    }
    rows.push_back({{"dim", d}, {"slope", prof.slope}, {"samples", prof.samples.size()},
                    {"nonpositive_derivative", bad}, {"non_increasing_steps", flat}});
    rep.check("radial profile strictly increasing d=" + std::to_string(d), bad == 0 && flat == 0,
              std::to_string(bad) + " samples with u' <= 0, " + std::to_string(flat) +
                  " non-increasing steps");
    std::string csv = "r,u,du\n";
    for (const auto& s : prof.samples) csv += csv_row({s.x, s.phi, s.dphi});
    rep.tables["radial_d" + std::to_string(d) + ".csv"] = csv;
    if (d == 2) planar = prof;
  }
  rep.results["radial"] = rows;
  if (!planar) return rep;

  // Annulus relaxation along the +x ray.
  const double h = p.at("annulus_h"), R1 = R0 + p.at("outer_offset").get<double>();
  const MaskPtr ann = build_mask(shape::Annulus{R0, R1}, h);
  RelaxOptions o;
  o.boundary_fit = true;
  const RelaxResult rr = relax(ann, r, Field2D(ann, 1.0), Direction::down, o);
  std::string ray = "r,u_grid,u_radial\n";
  double worst = 0.0;
  const double ray_len = p.at("ray_length");
  const std::size_t jc = (ann->ny() - 1) / 2;
  for (std::size_t i = 0; i < ann->nx(); ++i) {
    const double x = ann->x(i);
    if (x <= R0 || x > R0 + ray_len || !ann->inside(i, jc)) continue;
    const double ug = rr.u[ann->index(i, jc)], ur = planar->value(x);
    worst = std::max(worst, std::abs(ug - ur));
    ray += csv_row({x, ug, ur});
  }
  double far = 0.0;
  for (std::size_t i = ann->nx(); i-- > 0;)
    if (ann->inside(i, jc)) {
      far = rr.u[ann->index(i, jc)];
      break;
    }
  rep.tables["annulus_ray.csv"] = ray;
  rep.results["annulus"] = {{"h", h},           {"R1", R1},          {"steps", rr.steps},
                            {"converged", rr.converged}, {"residual", rr.residual},
                            {"ray_max_error", worst},    {"u_next_to_R1", far},
                            {"sup", rr.u.sup()}};
  rep.check("annulus relaxation converged", rr.converged);
  rep.check("annulus matches radial profile", worst <= tol, fmt("max error %.3e", worst));

  // Deep maximum principle on a coarser annulus.
  double theta = 1.0;
  const double thr = p.at("deep_mp_threshold").get<double>() * r.df(1.0);
  for (int i = 1; i <= 10000; ++i)
    if (r.df(i / 10000.0) <= thr) {
      theta = i / 10000.0;
      break;
    }
  const double R = radius_of_positivity(r, theta, 2);
  const MaskPtr coarse = build_mask(shape::Annulus{R0, R1}, p.at("deep_mp_h").get<double>());
  const DeepMpReport dmp = deep_mp_check(coarse, r, R, p.at("deep_mp_trials").get<std::size_t>(),
                                         *cfg.seed);
  rep.results["deep_mp"] = {{"theta", theta},          {"R", R},
                            {"trials", dmp.trials},    {"violations", dmp.violations},
                            {"eroded_cells", dmp.eroded_cells},
                            {"worst_excess", dmp.worst_excess}, {"seed", dmp.seed}};
  rep.check("deep maximum principle", dmp.violations == 0,
            std::to_string(dmp.violations) + " violations");
  return rep;
}

namespace {

Field2D lieb_instance(const std::string& name, double h, MaskPtr* out_mask) {
  MaskPtr mask;
  std::function<double(double, double, double)> V;  // (x, y, Phi)
  std::optional<Reaction> r;
  if (name == "square") {
    mask = build_mask(shape::Rectangle{1.0, 1.0}, h);
  } else if (name == "rectangle") {
    mask = build_mask(shape::Rectangle{4.0, 1.0}, h);
  } else if (name == "annulus") {
    mask = build_mask(shape::Annulus{0.5, 1.5}, h);
    r = Reaction::logistic(16.0);
  } else if (name == "disk") {
    mask = build_mask(shape::Disk{1.0}, h);
    r = Reaction::cubic(16.0, 2.0);
  } else if (name == "l_shape") {
    const std::size_t n = static_cast<std::size_t>(std::lround(2.0 / h)) + 1;
    std::vector<std::uint8_t> in(n * n, 0);
    for (std::size_t j = 1; j + 1 < n; ++j)
      for (std::size_t i = 1; i + 1 < n; ++i) in[j * n + i] = !(2 * i > n && 2 * j > n);
    mask = mask_from_bitmap(n, n, h, in);
    V = [](double x, double y, double) { return 3.0 * std::sin(3.0 * x) * std::cos(2.0 * y); };
  } else {
    fail(ErrorKind::config, "unknown Lieb instance '" + name + "'");
  }
  Field2D out(mask);
  if (r) {
    const Field2D phi = phi_kappa(mask, *r);
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) out[k] = -r->df(phi[k]);
  } else if (V) {
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) out[k] = V(mask->x(k % mask->nx()), mask->y(k / mask->nx()), 0.0);
  }
  *out_mask = mask;
  return out;
}

}  // namespace

Report run_lieb(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const double h = p.at("h"), R = p.at("R"), box = p.at("random_box");
  const auto n_centers = p.at("n_centers").get<std::size_t>();
  const std::uint64_t seed = *cfg.seed;
  std::string table = "instance,lhs,rhs,slack,tol_disc,centers_evaluated,centers_skipped\n";
  json rows = json::array();
  std::size_t violations = 0, idx = 0;
  auto record = [&](const std::string& name, const LiebReport& lr) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%zu,%zu\n", name.c_str(), lr.lhs,
                  lr.rhs, lr.slack, lr.tol_disc, lr.centers_evaluated, lr.centers_skipped);
    table += buf;
    rows.push_back({{"instance", name}, {"lhs", lr.lhs}, {"rhs", lr.rhs}, {"slack", lr.slack},
                    {"centers_evaluated", lr.centers_evaluated}, {"seed", lr.seed}});
    if (!lr.holds()) ++violations;
  };
  for (const auto& name : p.at("instances").get<std::vector<std::string>>()) {
    MaskPtr mask;
    const Field2D V = lieb_instance(name, h, &mask);
    const LiebReport lr = lieb_check(V, R, n_centers, seed + idx++);
    record(name, lr);
    rep.check("Lieb inequality on " + name, lr.holds(), fmt("slack %.4f", lr.slack));
  }

  std::mt19937_64 rng(seed);
  const std::size_t n = static_cast<std::size_t>(std::lround(box / h)) + 1;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(2, 5);
  const auto n_random = p.at("random_masks").get<std::size_t>();
  std::size_t random_violations = 0;
  for (std::size_t t = 0; t < n_random; ++t) {
    // Union of rectangles through the box centre, so the mask is connected.
    std::vector<std::uint8_t> in(n * n, 0);
    const int rects = count(rng);
    for (int k = 0; k < rects; ++k) {
      const double cx = 0.5 * box, cy = 0.5 * box;
      const double x0 = cx - (0.1 + 0.35 * unit(rng)) * box, x1 = cx + (0.1 + 0.35 * unit(rng)) * box;
      const double y0 = cy - (0.1 + 0.35 * unit(rng)) * box, y1 = cy + (0.1 + 0.35 * unit(rng)) * box;
      for (std::size_t j = 1; j + 1 < n; ++j)
        for (std::size_t i = 1; i + 1 < n; ++i) {
          const double x = static_cast<double>(i) * h, y = static_cast<double>(j) * h;
          if (x > x0 && x < x1 && y > y0 && y < y1) in[j * n + i] = 1;
        }
    }
    const MaskPtr mask = mask_from_bitmap(n, n, h, in);
    const double amp = 5.0 * unit(rng), kx = 1.0 + 4.0 * unit(rng), ky = 1.0 + 4.0 * unit(rng);
    const double ph = 2.0 * std::numbers::pi * unit(rng);
    Field2D V(mask);
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k))
        V[k] = amp * std::sin(kx * mask->x(k % mask->nx()) + ph) * std::cos(ky * mask->y(k / mask->nx()));
    const LiebReport lr = lieb_check(V, R, n_centers, seed + 1000 + t);
    record("random_" + std::to_string(t), lr);
    if (!lr.holds()) ++random_violations;
  }
  rep.tables["lieb.csv"] = table;
  rep.results["instances"] = rows;
  rep.results["violations"] = violations;
  rep.check("Lieb inequality on random masks", random_violations == 0,
            std::to_string(random_violations) + " of " + std::to_string(n_random) + " violated");
  return rep;
}

Report run_stargeom(const ExperimentConfig& cfg) {
  Report rep = start(cfg);
  const json& p = cfg.params;
  const auto grid = p.at("kernel_grid").get<std::size_t>();
  const auto kappas = doubles(p.at("kappas"));
  const double tol = p.at("separation_tol"), R = p.at("hexagon_circumradius");
  rep.tolerances = {{"separation", tol}, {"transversality", kTransversalityThreshold}};
  std::vector<std::pair<std::string, Polygon>> polys;
  for (const auto& name : p.at("polygons").get<std::vector<std::string>>()) {
    if (name == "hourglass") polys.emplace_back(name, Polygon::hourglass());
    else if (name == "l_shape") polys.emplace_back(name, Polygon::l_shape());
    else if (name == "square") polys.emplace_back(name, Polygon::square(2.0));
    else if (name == "hexagon") polys.emplace_back(name, Polygon::regular(6, R));
    else fail(ErrorKind::config, "unknown polygon '" + name + "'");
  }
  std::size_t c = 0;
  for (const auto& pj : p.at("custom")) polys.emplace_back("custom_" + std::to_string(c++), Polygon::from_json(pj));

  std::string ktable = "polygon,centers,area_ratio,strongly_star_shaped,transversality\n";
  std::string stable = "polygon,kappa,separation\n";
  json rows = json::array();
  for (const auto& [name, poly] : polys) {
    const KernelEstimate k = star_center_set(poly, grid);
    double trans = NAN;
    if (k.strongly_star_shaped) trans = min_transversality_angle(poly, k.disk_center);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%d,%.17g\n", name.c_str(), k.centers.size(),
                  k.area_ratio, k.strongly_star_shaped ? 1 : 0, trans);
    ktable += buf;
    json row = {{"polygon", name}, {"centers", k.centers.size()}, {"area_ratio", k.area_ratio},
                {"strongly_star_shaped", k.strongly_star_shaped}};
    if (k.strongly_star_shaped) {
      row["disk_center"] = {k.disk_center.x, k.disk_center.y};
      row["transversality"] = trans;
      // Dilate about an interior kernel point.
      std::vector<Point> shifted;
      for (const Point& v : poly.vertices()) shifted.push_back({v.x - k.disk_center.x, v.y - k.disk_center.y});
      const Polygon centred(shifted);
      std::vector<double> sep;
      for (double kap : kappas) {
        sep.push_back(dilation_separation(centred, kap));
        stable += name + "," + csv_row({kap, sep.back()});
      }
      row["separation"] = sep;
      bool inc = true;
      for (std::size_t i = 1; i < sep.size(); ++i) inc = inc && sep[i] > sep[i - 1];
      rep.check("separation increasing in kappa: " + name, inc);
    }
    if (name == "hourglass")
      rep.check("hourglass is not strongly star-shaped", !k.strongly_star_shaped,
                std::to_string(k.centers.size()) + " centre nodes");
    if (name == "hexagon") {
      const double apothem = R * std::cos(std::numbers::pi / 6.0);
      double worst = 0.0;
      for (double kap : kappas)
        worst = std::max(worst, std::abs(dilation_separation(poly, kap) - (kap - 1.0) * apothem));
      row["apothem_error"] = worst;
      rep.check("hexagon separation equals (kappa-1) apothem", worst <= tol, fmt("%.3e", worst));
    }
    rows.push_back(row);
  }
  rep.tables["kernels.csv"] = ktable;
  rep.tables["separation.csv"] = stable;
  rep.results["polygons"] = rows;
  return rep;
}

Report run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  switch (cfg.experiment) {
    case Experiment::length_curve: rep = run_lengthcurve(cfg); break;
    case Experiment::dilate1d:
    case Experiment::dilate2d: rep = run_dilate(cfg); break;
    case Experiment::pocket: rep = run_pocket(cfg); break;
    case Experiment::marginal: rep = run_marginal(cfg); break;
    case Experiment::strip_orbit: rep = run_striporbit(cfg); break;
    case Experiment::wells_lambda: rep = run_wells(cfg); break;
    case Experiment::exterior_radial: rep = run_exterior(cfg); break;
    case Experiment::lieb_suite: rep = run_lieb(cfg); break;
    case Experiment::star_geom: rep = run_stargeom(cfg); break;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace monostab
