#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "monostab/reaction.hpp"

namespace monostab {

// ---- reaction tuning ----

struct HumpTuneOptions {
  double length = 1.0;        // interval on which two solutions must straddle 1/2
  double merge_length = 2.0;  // uniqueness must be restored on (0, merge_length)
  double theta_lo = 0.3, theta_hi = 0.5;
  double eps_lo = 1e-4, eps_hi = 1e-2;
  double m_lo = 0.0, m_hi = 0.0;  // 0: pi^2 and 4 pi^2
  std::size_t grid = 9;           // per parameter
  std::size_t refine = 24;        // pattern-search halvings
  std::size_t s_samples = 400;
};

struct HumpTuning {
  double m = 0.0, theta = 0.0, epsilon = 0.0;
  double L_zero = 0.0;    // pi m^{-1/2}
  double L_peak = 0.0;    // first local max of L(s)
  double L_valley = 0.0;  // following local min
  double s_peak = 0.0, s_valley = 0.0;
  double s_lo = 0.0, s_hi = 0.0;  // smallest and largest s with L(s) = length
  double objective = 0.0;
  std::size_t evaluations = 0;

  Reaction reaction() const { return Reaction::double_hump(m, theta, epsilon); }
};

// Bounded derivative-free search maximizing the margin by which `length` sits
// inside the non-injective window while the window closes before merge_length:
// min(log(length/L_zero), log(length/L_valley), log(L_peak/length),
// log(merge_length/L_peak)). Candidates must be weak-KPP.
HumpTuning tune_double_hump(const HumpTuneOptions& opts = {});

struct LengthExtrema {
  std::optional<double> s_peak, s_valley;
  double L_peak = 0.0, L_valley = 0.0;
};
LengthExtrema length_extrema(const Reaction& r, std::size_t samples = 400);

// All s in (0,1) with L(s) = length, ascending.
std::vector<double> heights_of_length(const Reaction& r, double length, std::size_t samples = 400);

struct SlopeMinimum {
  double s = 0.0;
  double alpha = 0.0;
  double length = 0.0;
  double dL_ds = 0.0;
  double dL_dalpha = 0.0;
};
// Minimum over s of dL/ds, refined by Brent from a sampled start.
SlopeMinimum min_length_slope(const Reaction& r, std::size_t samples = 400);

struct MarginalResult {
  double tau_star = 0.0, tau_lo = 0.0, tau_hi = 0.0;
  std::size_t bisections = 0;
  SlopeMinimum critical;
  double lambda1 = 0.0;       // extrapolated
  double lambda1_grid = 0.0;
  Reaction reaction = Reaction::logistic(1.0);
};

// Bisection of tau on "min dL/dalpha < 0" for (1-tau) f0 + tau f1.
MarginalResult find_marginal(const Reaction& f0, const Reaction& f1, double width = 1e-3);

// Discrete counterpart on a grid with n interior nodes (n odd): the symmetric
// solution of -D_h^2 u = f(u) with centre value s exists for exactly one
// spacing h(s) (first zero of the outward recurrence); W(s) = (n + 1) h(s).
double discrete_spacing(const Reaction& r, std::size_t n, double s);
std::vector<double> discrete_profile(const Reaction& r, std::size_t n, double s, double h);

struct DiscreteMarginal {
  double tau_star = 0.0;
  double s = 0.0;
  double h = 0.0;
  double width = 0.0;
  double dW_ds = 0.0;
  double lambda1_grid = 0.0;  // of -D_h^2 - f'(phi) on the n nodes
  std::vector<double> phi;    // interior nodes
  Reaction reaction = Reaction::logistic(1.0);
};

// Root of min_s dW/ds in tau near tau_guess: the grid analogue of tau*.
DiscreteMarginal find_discrete_marginal(const Reaction& f0, const Reaction& f1, std::size_t n,
                                        double tau_guess, double window = 0.05);

// ---- experiments ----

enum class Experiment {
  length_curve,
  dilate1d,
  dilate2d,
  pocket,
  marginal,
  strip_orbit,
  wells_lambda,
  exterior_radial,
  lieb_suite,
  star_geom,
};

std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(std::string_view name);
const std::vector<Experiment>& all_experiments();
bool needs_seed(Experiment e);

// Defaults double as the schema: a config may only carry keys that appear in
// the defaults, with the same JSON types.
nlohmann::json default_config(Experiment e);

struct ExperimentConfig {
  Experiment experiment = Experiment::length_curve;
  nlohmann::json params;  // defaults merged with the user's values
  std::optional<std::uint64_t> seed;
};

// Throws config errors for unknown keys, type mismatches and missing seeds.
ExperimentConfig parse_config(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = {});

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  Experiment experiment = Experiment::length_curve;
  nlohmann::json config;
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json tolerances = nlohmann::json::object();
  std::vector<Assertion> assertions;
  std::map<std::string, std::string> tables;  // file name -> CSV text
  double seconds = 0.0;

  void check(std::string name, bool passed, std::string detail = {});
  bool passed() const;
  nlohmann::json to_json() const;
};

Report run_experiment(const ExperimentConfig& cfg);

Report run_lengthcurve(const ExperimentConfig& cfg);
Report run_dilate(const ExperimentConfig& cfg);
Report run_pocket(const ExperimentConfig& cfg);
Report run_marginal(const ExperimentConfig& cfg);
Report run_striporbit(const ExperimentConfig& cfg);
Report run_wells(const ExperimentConfig& cfg);
Report run_exterior(const ExperimentConfig& cfg);
Report run_lieb(const ExperimentConfig& cfg);
Report run_stargeom(const ExperimentConfig& cfg);

// Writes report.json and every table into dir (created if missing).
void write_report(const Report& report, const std::string& dir);

std::string version_string();

}  // namespace monostab
