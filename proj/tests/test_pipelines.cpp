#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "monostab/error.hpp"
#include "monostab/pipelines.hpp"
#include "monostab/shoot1d.hpp"

using namespace monostab;
using nlohmann::json;
using std::numbers::pi;

namespace {

ErrorKind kind_of(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;  // sentinel: nothing thrown
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("experiment names round trip") {
  for (Experiment e : all_experiments()) {
    CHECK(experiment_from_string(to_string(e)) == e);
    // Every default config is accepted as is.
    json j = default_config(e);
    j["experiment"] = to_string(e);
    if (needs_seed(e)) j["seed"] = 1;
    CHECK_NOTHROW(parse_config(j));
  }
  CHECK_FALSE(experiment_from_string("nope"));
  CHECK(needs_seed(Experiment::lieb_suite));
  CHECK(needs_seed(Experiment::exterior_radial));
  CHECK_FALSE(needs_seed(Experiment::pocket));
}

TEST_CASE("config validation") {
  CHECK(kind_of(json::array()) == ErrorKind::config);
  CHECK(kind_of({{"h", 0.1}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "nope"}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "dilate1d"}, {"hh", 0.1}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "dilate1d"}, {"h", "small"}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "dilate1d"}, {"kappas", {1.0, "two"}}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "dilate1d"}, {"tuning", {{"theta", 0.3}}}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "lieb"}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "lieb"}, {"seed", -3}}) == ErrorKind::config);
  CHECK(kind_of({{"experiment", "marginal"},
                 {"reaction", {{"family", "Cubic"}, {"params", {{"m", 1.0}, {"c", -2.0}}}}}}) ==
        ErrorKind::config);
  CHECK(kind_of({{"experiment", "marginal"}, {"reaction", {{"family", "Quartic"}, {"params", {}}}}}) ==
        ErrorKind::config);
}

TEST_CASE("config merge and seed override") {
  const ExperimentConfig c =
      parse_config({{"experiment", "dilate1d"}, {"h", 0.02}, {"tuning", {{"eps_hi", 5e-3}}}});
  CHECK(c.experiment == Experiment::dilate1d);
  CHECK(c.params.at("h").get<double>() == 0.02);
  CHECK(c.params.at("tuning").at("eps_hi").get<double>() == 5e-3);
  CHECK(c.params.at("tuning").at("theta_lo").get<double>() == 0.3);  // kept from the defaults
  CHECK(c.params.at("kappas").size() == 4);
  CHECK_FALSE(c.seed);

  const ExperimentConfig s = parse_config({{"experiment", "lieb"}, {"seed", 5}}, 9);
  REQUIRE(s.seed);
  CHECK(*s.seed == 9);
  // A reaction object is replaced whole, not merged key by key.
  const ExperimentConfig r = parse_config(
      {{"experiment", "striporbit"}, {"reaction", Reaction::logistic(2.0).to_json()}});
  CHECK(Reaction::from_json(r.params.at("reaction")).family() == Family::logistic);
}

TEST_CASE("discrete spacing and profile") {
  const Reaction r = Reaction::double_hump(4.0 * pi * pi, 0.3, 0.01);
  const std::size_t n = 49;
  for (double s : {0.2, 0.5, 0.8}) {
    const double h = discrete_spacing(r, n, s);
    const auto u = discrete_profile(r, n, s, h);
    REQUIRE(u.size() == n);
    CHECK(u[n / 2] == doctest::Approx(s).epsilon(1e-12));
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double l = j ? u[j - 1] : 0.0, rr = j + 1 < n ? u[j + 1] : 0.0;
      worst = std::max(worst, std::abs((l - 2 * u[j] + rr) / (h * h) + r.f(u[j])));
      CHECK(u[j] > 0.0);
    }
    CHECK(worst <= 1e-6 * r.lipschitz());
    // The grid width approaches the continuous length.
    CHECK((n + 1) * h == doctest::Approx(length_of_height(r, s)).epsilon(0.01));
  }
}

TEST_CASE("tuned reaction straddles 1/2 on the unit interval") {
  const Reaction r = Reaction::double_hump(4.0 * pi * pi, 0.3, 0.01);
  const auto hs = heights_of_length(r, 1.0);
  REQUIRE(hs.size() >= 2);
  CHECK(hs.front() < 0.5);
  CHECK(hs.back() > 0.5);
  for (double s : hs) CHECK(length_of_height(r, s) == doctest::Approx(1.0).epsilon(1e-8));
  const LengthExtrema ex = length_extrema(r);
  REQUIRE(ex.s_peak);
  REQUIRE(ex.s_valley);
  CHECK(ex.L_peak > 1.0);
  CHECK(ex.L_valley < 1.0);
}

TEST_CASE("reports and determinism") {
  json j = {{"experiment", "lieb"},
            {"seed", 3},
            {"instances", {"square"}},
            {"random_masks", 2},
            {"n_centers", 4},
            {"h", 1.0 / 16.0}};
  const ExperimentConfig cfg = parse_config(j);
  const Report a = run_experiment(cfg), b = run_experiment(cfg);
  CHECK(a.passed());
  REQUIRE_FALSE(a.tables.empty());
  CHECK(a.tables == b.tables);
  CHECK(a.results == b.results);

  const json rep = a.to_json();
  for (const char* key : {"experiment", "version", "isa", "config", "results", "tolerances",
                          "assertions", "passed", "tables", "seconds"})
    CHECK(rep.contains(key));
  CHECK(rep.at("config").at("seed") == 3);

  const auto dir = std::filesystem::temp_directory_path() / "monostab_report_test";
  std::filesystem::remove_all(dir);
  write_report(a, dir.string());
  CHECK(json::parse(slurp(dir / "report.json")).at("passed") == true);
  for (const auto& [name, text] : a.tables) CHECK(slurp(dir / name) == text);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a failing assertion fails the report") {
  Report r;
  r.check("fine", true);
  CHECK(r.passed());
  r.check("broken", false, "detail");
  CHECK_FALSE(r.passed());
  CHECK(r.to_json().at("assertions").size() == 2);
}

TEST_CASE("stargeom experiment with a custom polygon") {
  json j = {{"experiment", "stargeom"},
            {"polygons", {"square"}},
            {"custom", json::array({{{"vertices", {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}}}})}};
  Report r;
  try {
    r = run_experiment(parse_config(j));
  } catch (const Error& e) {
    FAIL(e.what());
  }
  CHECK(r.passed());
  CHECK(r.tables.at("kernels.csv").find("custom_0") != std::string::npos);
  j["custom"] = json::array({{{"vertices", {{0.0, 0.0}, {1.0, 0.0}}}}});
  CHECK_THROWS_AS(run_experiment(parse_config(j)), Error);
  CHECK(version_string().rfind("monostab ", 0) == 0);
}
