#include "monostab/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "monostab/error.hpp"

namespace monostab {

namespace {

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

std::vector<double> differentiate(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

std::vector<double> integrate(const std::vector<double>& c) {
  std::vector<double> a(c.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) a[k + 1] = c[k] / static_cast<double>(k + 1);
  return a;
}

// s(1 - s) g(s) in the power basis.
std::vector<double> expand(const std::vector<double>& g) {
  std::vector<double> p(g.size() + 2, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    p[k + 1] += g[k];
    p[k + 2] -= g[k];
  }
  return p;
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::invalid_reaction, what);
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::logistic: return "Logistic";
    case Family::cubic: return "Cubic";
    case Family::double_hump: return "DoubleHump";
    case Family::interpolated: return "Interpolated";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::no: return "no";
    case Verdict::yes: return "yes";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

// poly here holds the quotient g with f = s(1-s) g; finish() expands it.
Reaction::Reaction(Family family, std::vector<double> params, std::vector<double> poly)
    : family_(family), params_(std::move(params)), poly_(std::move(poly)) {}

void Reaction::finish() {
  // poly_ currently holds g.
  std::vector<double> g = std::move(poly_);
  poly_ = expand(g);
  dpoly_ = differentiate(poly_);
  d2poly_ = differentiate(dpoly_);
  antideriv_ = integrate(poly_);
  quotient_ = std::move(g);
}

Reaction Reaction::logistic(double m) {
  require(std::isfinite(m) && m > 0.0, "Logistic requires m > 0");
  Reaction r(Family::logistic, {m}, {m});
  r.finish();
  return r;
}

Reaction Reaction::cubic(double m, double c) {
  require(std::isfinite(m) && m > 0.0, "Cubic requires m > 0");
  require(std::isfinite(c) && c > -1.0, "Cubic requires c > -1");
  Reaction r(Family::cubic, {m, c}, {m, m * c});
  r.finish();
  return r;
}

Reaction Reaction::double_hump(double m, double theta, double epsilon) {
  require(std::isfinite(m) && m > 0.0, "DoubleHump requires m > 0");
  require(std::isfinite(theta) && theta > 0.0 && theta < 1.0, "DoubleHump requires 0 < theta < 1");
  require(std::isfinite(epsilon) && epsilon > 0.0, "DoubleHump requires epsilon > 0");
  const double k = theta * theta + epsilon;
  const double a = m / k;
  Reaction r(Family::double_hump, {m, theta, epsilon}, {a * k, -2.0 * a * theta, a});
  r.finish();
  return r;
}

Reaction Reaction::interpolated(double tau, const Reaction& base0, const Reaction& base1) {
  require(std::isfinite(tau) && tau >= 0.0 && tau <= 1.0, "Interpolated requires tau in [0, 1]");
  const auto& g0 = base0.quotient_;
  const auto& g1 = base1.quotient_;
  std::vector<double> g(std::max(g0.size(), g1.size()), 0.0);
  for (std::size_t k = 0; k < g0.size(); ++k) g[k] += (1.0 - tau) * g0[k];
  for (std::size_t k = 0; k < g1.size(); ++k) g[k] += tau * g1[k];
  Reaction r(Family::interpolated, {tau}, std::move(g));
  r.base0_ = std::make_shared<const Reaction>(base0);
  r.base1_ = std::make_shared<const Reaction>(base1);
  r.finish();
  return r;
}

const Reaction& Reaction::base0() const {
  if (!base0_) fail(ErrorKind::invalid_argument, "reaction is not Interpolated");
  return *base0_;
}

const Reaction& Reaction::base1() const {
  if (!base1_) fail(ErrorKind::invalid_argument, "reaction is not Interpolated");
  return *base1_;
}

double Reaction::eval(double s, int order) const {
  if (!(s >= 0.0 && s <= 1.5)) fail(ErrorKind::domain, "reaction argument outside [0, 1.5]");
  switch (order) {
    case 0: return f(s);
    case 1: return df(s);
    case 2: return d2f(s);
    default: fail(ErrorKind::domain, "derivative order must be 0, 1 or 2");
  }
}

double Reaction::antiderivative(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) fail(ErrorKind::domain, "antiderivative argument outside [0, 1]");
  return F(s);
}

double Reaction::f(double s) const noexcept { return s * (1.0 - s) * horner(quotient_, s); }
double Reaction::df(double s) const noexcept { return horner(dpoly_, s); }
double Reaction::d2f(double s) const noexcept { return horner(d2poly_, s); }
double Reaction::F(double s) const noexcept { return horner(antideriv_, s); }

double Reaction::F_slope(double s, double z) const noexcept {
  const double t = s - z;
  double sum = 0.0;
  double sk = 0.0;    // sum_{j<k} s^j t^(k-1-j)
  double tpow = 1.0;  // t^(k-1)
  for (std::size_t k = 1; k < antideriv_.size(); ++k) {
    sk = s * sk + tpow;
    tpow *= t;
    sum += antideriv_[k] * sk;
  }
  return sum;
}

double Reaction::lipschitz() const {
  // |f'| on [0,1] peaks at an endpoint or at a root of f''.
  std::vector<double> cand{0.0, 1.0};
  const double c0 = d2poly_.size() > 0 ? d2poly_[0] : 0.0;
  const double c1 = d2poly_.size() > 1 ? d2poly_[1] : 0.0;
  const double c2 = d2poly_.size() > 2 ? d2poly_[2] : 0.0;
  if (c2 != 0.0) {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      cand.push_back((-c1 + sq) / (2.0 * c2));
      cand.push_back((-c1 - sq) / (2.0 * c2));
    }
  } else if (c1 != 0.0) {
    cand.push_back(-c0 / c1);
  }
  double best = 0.0;
  for (double s : cand)
    if (s >= 0.0 && s <= 1.0) best = std::max(best, std::abs(df(s)));
  return best;
}

nlohmann::json Reaction::to_json() const {
  nlohmann::json p;
  switch (family_) {
    case Family::logistic: p = {{"m", params_[0]}}; break;
    case Family::cubic: p = {{"m", params_[0]}, {"c", params_[1]}}; break;
    case Family::double_hump:
      p = {{"m", params_[0]}, {"theta", params_[1]}, {"epsilon", params_[2]}};
      break;
    case Family::interpolated:
      p = {{"tau", params_[0]}, {"base0", base0_->to_json()}, {"base1", base1_->to_json()}};
      break;
  }
  return {{"family", to_string(family_)}, {"params", p}};
}

Reaction Reaction::from_json(const nlohmann::json& j) {
  try {
    const std::string fam = j.at("family").get<std::string>();
    const auto& p = j.at("params");
    if (fam == "Logistic") return logistic(p.at("m").get<double>());
    if (fam == "Cubic") return cubic(p.at("m").get<double>(), p.at("c").get<double>());
    if (fam == "DoubleHump")
      return double_hump(p.at("m").get<double>(), p.at("theta").get<double>(),
                         p.at("epsilon").get<double>());
    if (fam == "Interpolated")
      return interpolated(p.at("tau").get<double>(), from_json(p.at("base0")),
                          from_json(p.at("base1")));
    fail(ErrorKind::invalid_reaction, "unknown family '" + fam + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_reaction, std::string("malformed reaction JSON: ") + e.what());
  }
}

std::string Reaction::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(family_) << "(";
  if (family_ == Family::interpolated) {
    os << params_[0] << ", " << base0_->describe() << ", " << base1_->describe();
  } else {
    for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? ", " : "") << params_[i];
  }
  os << ")";
  return os.str();
}

KppClass classify_on_grid(const Reaction& r, int points, double tol) {
  KppClass k;
  k.lipschitz = r.lipschitz();
  const double m = r.m();
  double min_f = INFINITY, max_excess = -INFINITY, max_rise = -INFINITY;
  double prev_ratio = NAN;
  for (int i = 1; i < points; ++i) {
    const double s = static_cast<double>(i) / points;
    const double fs = r.f(s);
    min_f = std::min(min_f, fs);
    max_excess = std::max(max_excess, fs - m * s);
    const double ratio = fs / s;
    if (i > 1) max_rise = std::max(max_rise, ratio - prev_ratio);
    prev_ratio = ratio;
  }
  const double d0 = r.df(0.0), d1 = r.df(1.0);
  if (min_f < -tol || d0 < -tol || d1 > tol)
    k.positive = Verdict::no;
  else if (min_f > tol && d0 > tol && d1 < -tol)
    k.positive = Verdict::yes;
  else
    k.positive = Verdict::indeterminate;

  if (max_excess > tol)
    k.weak_kpp = Verdict::no;
  else if (max_excess <= 0.0)
    k.weak_kpp = Verdict::yes;
  else
    k.weak_kpp = Verdict::indeterminate;

  if (max_rise > tol)
    k.strong_kpp = Verdict::no;
  else if (max_rise < -tol)
    k.strong_kpp = Verdict::yes;
  else
    k.strong_kpp = Verdict::indeterminate;

  // The flags are nested; a positive verdict upstream gates the next one.
  if (k.positive != Verdict::yes) {
    if (k.weak_kpp == Verdict::yes) k.weak_kpp = k.positive;
    if (k.strong_kpp == Verdict::yes) k.strong_kpp = k.positive;
  }
  if (k.weak_kpp != Verdict::yes && k.strong_kpp == Verdict::yes) k.strong_kpp = k.weak_kpp;
  return k;
}

KppClass classify(const Reaction& r) {
  switch (r.family()) {
    case Family::logistic: {
      KppClass k;
      k.positive = k.weak_kpp = k.strong_kpp = Verdict::yes;
      k.lipschitz = r.lipschitz();
      return k;
    }
    case Family::cubic: {
      // (f/s)' = m(c - 1 - 2cs): strictly negative on (0,1) iff c <= 1, and
      // f(s) <= ms reduces to c(1-s) <= 1, which is the same condition.
      KppClass k;
      const double c = r.params()[1];
      k.positive = Verdict::yes;
      k.weak_kpp = k.strong_kpp = c <= 1.0 ? Verdict::yes : Verdict::no;
      k.lipschitz = r.lipschitz();
      return k;
    }
    default: return classify_on_grid(r);
  }
}

}  // namespace monostab
