#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "monostab/error.hpp"
#include "monostab/kernels.hpp"
#include "monostab/pipelines.hpp"

namespace monostab {

using nlohmann::json;

namespace {

struct Entry {
  Experiment e;
  const char* name;
  bool seeded;
};

constexpr Entry kEntries[] = {
    {Experiment::length_curve, "lengthcurve", false}, {Experiment::dilate1d, "dilate1d", false},
    {Experiment::dilate2d, "dilate2d", false},        {Experiment::pocket, "pocket", false},
    {Experiment::marginal, "marginal", false},        {Experiment::strip_orbit, "striporbit", false},
    {Experiment::wells_lambda, "wells", false},       {Experiment::exterior_radial, "exterior", true},
    {Experiment::lieb_suite, "lieb", true},           {Experiment::star_geom, "stargeom", false},
};

json reaction_json(const Reaction& r) { return r.to_json(); }

// Keys whose values are reactions, checked by Reaction::from_json instead of
// by shape.
bool is_reaction_key(const std::string& key) {
  return key == "reaction" || key == "reactions" || key == "f0";
}

std::string type_name(const json& v) {
  if (v.is_number()) return "number";
  return v.type_name();
}

void validate(const json& given, const json& schema, const std::string& path) {
  if (!given.is_object()) fail(ErrorKind::config, path + ": expected an object");
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string where = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) fail(ErrorKind::config, "unknown key '" + where + "'");
    const json& def = schema.at(it.key());
    const json& val = it.value();
    if (type_name(def) != type_name(val))
      fail(ErrorKind::config,
           "'" + where + "' should be " + type_name(def) + ", got " + type_name(val));
    if (is_reaction_key(it.key())) {
      try {
        if (val.is_array())
          for (const auto& r : val) (void)Reaction::from_json(r);
        else
          (void)Reaction::from_json(val);
      } catch (const Error& e) {
        fail(ErrorKind::config, "'" + where + "': " + e.what());
      }
      continue;
    }
    if (def.is_object() && !def.empty()) validate(val, def, where);
    if (def.is_array() && !def.empty() && !def.front().is_object())
      for (const auto& x : val)
        if (type_name(x) != type_name(def.front()))
          fail(ErrorKind::config, "'" + where + "' elements should be " + type_name(def.front()));
  }
}

void merge(json& into, const json& from) {
  for (auto it = from.begin(); it != from.end(); ++it) {
    if (into.contains(it.key()) && into[it.key()].is_object() && it.value().is_object() &&
        !is_reaction_key(it.key()) && !into[it.key()].empty())
      merge(into[it.key()], it.value());
    else
      into[it.key()] = it.value();
  }
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& x : kEntries)
    if (x.e == e) return x.name;
  return "unknown";
}

std::optional<Experiment> experiment_from_string(std::string_view name) {
  for (const auto& x : kEntries)
    if (name == x.name) return x.e;
  return std::nullopt;
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (const auto& x : kEntries) v.push_back(x.e);
    return v;
  }();
  return all;
}

bool needs_seed(Experiment e) {
  for (const auto& x : kEntries)
    if (x.e == e) return x.seeded;
  return false;
}

json default_config(Experiment e) {
  const double pi = std::numbers::pi;
  const json tuned = reaction_json(Reaction::double_hump(4.0 * pi * pi, 0.3, 0.01));
  const json tune = {{"theta_lo", 0.3}, {"theta_hi", 0.5}, {"eps_lo", 1e-4}, {"eps_hi", 1e-2},
                     {"m_lo", pi * pi}, {"m_hi", 4.0 * pi * pi}, {"length", 1.0},
                     {"merge_length", 2.0}};
  switch (e) {
    case Experiment::length_curve:
      return {{"reactions", json::array({reaction_json(Reaction::logistic(1.0)),
                                         reaction_json(Reaction::cubic(1.0, 2.0)), tuned})},
              {"n", 200},
              {"alpha_small", 1e-3},
              {"limit_tol", 2e-3},
              {"oracle_points", 50},
              {"oracle_tol", 1e-6},
              {"energy_tol", 1e-8},
              {"refinements", 2}};
    case Experiment::dilate1d:
      return {{"tune", true}, {"tuning", tune}, {"reaction", tuned}, {"h", 1.0 / 64.0},
              {"kappas", {1.0, 2.0, 4.0, 8.0}}, {"gap_min", 0.2}, {"merge_tol", 1e-4},
              {"halfline_tol", 0.05}, {"halfline_length", 4.0}, {"monotone_floor", 1e-15}};
    case Experiment::dilate2d:
      return {{"tune", true}, {"tuning", tune}, {"reaction", tuned}, {"h", 1.0 / 32.0},
              {"shape", "disk"}, {"size", 1.0}, {"kappas", {1.0, 2.0, 4.0, 8.0}}, {"merge_tol", 1e-4},
              {"monotone_floor", 1e-15}};
    case Experiment::pocket:
      return {{"tune", true}, {"tuning", tune}, {"reaction", tuned}, {"h", 0.0125},
              {"pocket_sizes", {1.0, 1.25, 1.5, 1.75, 2.0}}, {"half_length", 1.0},
              {"base_size", 3.0}, {"deltas", {0.2, 0.1, 0.05}}, {"alpha", pi * pi / 4.0},
              {"gap_min", 0.2}, {"rate_tol", 0.2}, {"rate_margin", 0.2}, {"widen_factor", 4.0}};
    case Experiment::marginal:
      return {{"tune", true}, {"tuning", tune}, {"reaction", tuned}, {"width", 1e-3},
              {"lambda_tol", 1e-2}, {"offset", 0.05}};
    case Experiment::strip_orbit:
      return {{"reaction", reaction_json(Reaction::cubic(1.0, 2.0))}, {"n", 127}, {"scan", 64},
              {"epsilons", {1e-3, 1e-2, 5e-2}}, {"n_tau", 64}, {"tol", 1e-8},
              {"amplitude_min", 5e-4}, {"residual_tol", 1e-8}, {"period_tol", 0.1},
              {"energy_tol", 1e-5}};
    case Experiment::wells_lambda:
      return {{"tune", true}, {"tuning", tune}, {"reaction", tuned}, {"n_cells", 49},
              {"depths", {2.0, 4.0, 8.0}}, {"extra_depths", {16.0, 32.0}}, {"base_width", 3.0},
              {"base_height", 2.0}, {"band", 0.02}, {"cross_check_tol", 0.05}};
    case Experiment::exterior_radial:
      return {{"reaction", reaction_json(Reaction::logistic(1.0))}, {"dims", {2, 3}},
              {"R0", 1.0}, {"span", 27.0}, {"annulus_h", 0.125}, {"outer_offset", 30.0},
              {"ray_tol", 0.02}, {"ray_length", 10.0}, {"deep_mp_h", 0.25},
              {"deep_mp_trials", 10}, {"deep_mp_threshold", 0.5}};
    case Experiment::lieb_suite:
      return {{"h", 1.0 / 32.0},
              {"R", 0.5},
              {"n_centers", 12},
              {"instances", {"square", "rectangle", "annulus", "disk", "l_shape"}},
              {"random_masks", 20},
              {"random_box", 1.5}};
    case Experiment::star_geom:
      return {{"polygons", {"hourglass", "l_shape", "square", "hexagon"}},
              {"custom", json::array()},
              {"kernel_grid", 64},
              {"kappas", {1.01, 2.0, 4.0, 8.0}},
              {"separation_tol", 1e-3},
              {"hexagon_circumradius", 1.0}};
  }
  return json::object();
}

ExperimentConfig parse_config(const json& j, std::optional<std::uint64_t> seed_override) {
  if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
  if (!j.contains("experiment") || !j.at("experiment").is_string())
    fail(ErrorKind::config, "config needs a string 'experiment'");
  const std::string name = j.at("experiment").get<std::string>();
  const auto e = experiment_from_string(name);
  if (!e) fail(ErrorKind::config, "unknown experiment '" + name + "'");
  ExperimentConfig cfg;
  cfg.experiment = *e;
  json params = j;
  params.erase("experiment");
  if (params.contains("seed")) {
    const json& s = params.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      fail(ErrorKind::config, "'seed' must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
    params.erase("seed");
  }
  if (seed_override) cfg.seed = seed_override;
  const json schema = default_config(*e);
  validate(params, schema, "");
  cfg.params = schema;
  merge(cfg.params, params);
  if (needs_seed(*e) && !cfg.seed)
    fail(ErrorKind::config, "experiment '" + name + "' is randomized and needs a seed");
  return cfg;
}

void Report::check(std::string name, bool passed_, std::string detail) {
  assertions.push_back({std::move(name), passed_, std::move(detail)});
}

bool Report::passed() const {
  for (const auto& a : assertions)
    if (!a.passed) return false;
  return true;
}

json Report::to_json() const {
  json a = json::array();
  for (const auto& x : assertions)
    a.push_back({{"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
  json t = json::array();
  for (const auto& [name, _] : tables) t.push_back(name);
  return {{"experiment", to_string(experiment)},
          {"version", version_string()},
          {"isa", std::string(kernels::to_string(kernels::active_isa()))},
          {"config", config},
          {"results", results},
          {"tolerances", tolerances},
          {"assertions", a},
          {"passed", passed()},
          {"tables", t},
          {"seconds", seconds}};
}

void write_report(const Report& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + (fs::path(dir) / name).string());
    out << text;
  };
  put("report.json", report.to_json().dump(2) + "\n");
  for (const auto& [name, text] : report.tables) put(name, text);
}

std::string version_string() { return "monostab 1.0.0"; }

}  // namespace monostab
