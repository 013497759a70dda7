#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "monostab/reaction.hpp"

namespace monostab {

struct ProfileSample {
  double x = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  double ddphi = 0.0;
};

// Quintic Hermite interpolation through (phi, phi', phi'') at the samples.
// Clamps to the first/last sample outside the sampled range.
double hermite_value(const std::vector<ProfileSample>& samples, double x);

struct ShootRecord {
  double alpha = 0.0;
  double s_max = 0.0;
  double x_at_max = 0.0;
  double length = 0.0;
  double energy_residual = 0.0;
  double step = 0.0;
  std::vector<ProfileSample> profile;

  double phi_at(double x) const { return hermite_value(profile, x); }
};

struct ShootOptions {
  double step = 0.0;   // 0: 1e-3 m^{-1/2}
  double x_cap = 0.0;  // 0: 200 m^{-1/2}
};

struct LengthCurve {
  std::vector<double> alphas;
  std::vector<double> lengths;
  std::vector<double> dlengths;
  std::vector<double> s_max;
  double alpha_star = 0.0;
  // i such that dlengths[i] and dlengths[i+1] differ in sign.
  std::vector<std::size_t> sign_changes;
};

struct HalfLineProfile {
  double alpha_star = 0.0;
  double decay_rate = 0.0;  // sqrt|f'(1)|
  double x_max = 0.0;
  std::vector<ProfileSample> samples;

  // Exponential tail beyond x_max; 0 for x <= 0.
  double value(double x) const;
};

struct RadialProfile {
  int dim = 2;
  double R0 = 0.0;
  double r_max = 0.0;
  double slope = 0.0;  // u'(R0)
  std::vector<ProfileSample> samples;  // x holds the radius

  double value(double rho) const;
};

// sqrt(2 F(1)).
double alpha_star(const Reaction& r);

ShootRecord shoot(const Reaction& r, double alpha, const ShootOptions& opts = {});

// s_alpha with 2F(s_alpha) = alpha^2, by root-finding on F.
double height_of_slope(const Reaction& r, double alpha);
double slope_of_height(const Reaction& r, double s);

double length_by_quadrature(const Reaction& r, double alpha);
// L as a function of the maximum height s in (0, 1).
double length_of_height(const Reaction& r, double s);
// Centered difference with step 1e-4 alpha*.
double length_derivative(const Reaction& r, double alpha);

LengthCurve length_curve(const Reaction& r, std::size_t n);
std::string to_csv(const LengthCurve& curve);

HalfLineProfile halfline_profile(const Reaction& r, double x_max, double step = 0.0);

// u'' + (d-1)/rho u' + f(u) = 0 on (R0, r_max), u(R0) = 0, slope by bisection.
RadialProfile radial_exterior(const Reaction& r, int dim, double R0, double r_max);

}  // namespace monostab
