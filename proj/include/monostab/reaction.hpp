#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace monostab {

enum class Family { logistic, cubic, double_hump, interpolated };

std::string to_string(Family family);

// Closed-form reaction f on [0, 1.5]. Every family is a polynomial, so f, its
// derivatives and F are stored as power-basis coefficients.
class Reaction {
 public:
  static Reaction logistic(double m);
  static Reaction cubic(double m, double c);
  static Reaction double_hump(double m, double theta, double epsilon);
  static Reaction interpolated(double tau, const Reaction& base0, const Reaction& base1);

  Family family() const noexcept { return family_; }
  // Logistic: {m}; Cubic: {m, c}; DoubleHump: {m, theta, epsilon}; Interpolated: {tau}.
  const std::vector<double>& params() const noexcept { return params_; }
  const Reaction& base0() const;
  const Reaction& base1() const;

  // Checked evaluation: s in [0, 1.5], order in {0, 1, 2}.
  double eval(double s, int order = 0) const;
  // Checked antiderivative: s in [0, 1].
  double antiderivative(double s) const;

  // Unchecked closed forms for inner loops.
  double f(double s) const noexcept;
  double df(double s) const noexcept;
  double d2f(double s) const noexcept;
  double F(double s) const noexcept;
  // (F(s) - F(s - z)) / z, evaluated without cancellation; equals f(s) at z = 0.
  double F_slope(double s, double z) const noexcept;

  // f'(0).
  double m() const noexcept { return poly_.size() > 1 ? poly_[1] : 0.0; }
  // sup |f'| on [0, 1].
  double lipschitz() const;

  std::span<const double> coefficients() const noexcept { return poly_; }
  std::span<const double> derivative_coefficients() const noexcept { return dpoly_; }

  nlohmann::json to_json() const;
  static Reaction from_json(const nlohmann::json& j);

  std::string describe() const;

 private:
  Reaction(Family family, std::vector<double> params, std::vector<double> poly);
  void finish();

  Family family_;
  std::vector<double> params_;
  std::shared_ptr<const Reaction> base0_;
  std::shared_ptr<const Reaction> base1_;
  std::vector<double> quotient_;  // f = s(1-s) q(s), so f(0) = f(1) = 0 exactly
  std::vector<double> poly_, dpoly_, d2poly_, antideriv_;
};

enum class Verdict { no, yes, indeterminate };

std::string to_string(Verdict v);

struct KppClass {
  Verdict positive = Verdict::indeterminate;
  Verdict weak_kpp = Verdict::indeterminate;
  Verdict strong_kpp = Verdict::indeterminate;
  double lipschitz = 0.0;

  bool is_positive() const { return positive == Verdict::yes; }
  bool is_weak_kpp() const { return weak_kpp == Verdict::yes; }
  bool is_strong_kpp() const { return strong_kpp == Verdict::yes; }
};

// Closed form for Logistic and Cubic, 1e4-point grid check otherwise.
KppClass classify(const Reaction& r);
// Grid check regardless of family.
KppClass classify_on_grid(const Reaction& r, int points = 10000, double tol = 1e-12);

}  // namespace monostab
