#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "monostab/error.hpp"
#include "monostab/kernels.hpp"
#include "monostab/pipelines.hpp"

using namespace monostab;

int main(int argc, char** argv) {
  CLI::App app{"Steady states of -Lap u = f(u): numerical experiments"};
  app.set_version_flag("--version", version_string());
  std::string experiment, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool list = false, print_defaults = false, scalar = false;
  app.add_option("experiment", experiment, "experiment name (see --list)");
  app.add_option("--config", config_path, "JSON config; defaults are used for missing keys");
  app.add_option("--out", out_dir, "output directory for report.json and CSV tables");
  app.add_option("--seed", seed, "seed for randomized experiments (overrides the config)");
  app.add_flag("--list", list, "list experiments and exit");
  app.add_flag("--defaults", print_defaults, "print the default config of the experiment");
  app.add_flag("--scalar", scalar, "use the scalar grid kernels");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (Experiment e : all_experiments())
      std::printf("%-12s%s\n", to_string(e).c_str(), needs_seed(e) ? "  (needs --seed)" : "");
    return 0;
  }
  if (experiment.empty()) {
    std::cerr << "an experiment name is required (see --list)\n";
    return 2;
  }
  if (scalar) kernels::set_isa(kernels::Isa::scalar);
  try {
    const auto e = experiment_from_string(experiment);
    if (!e) fail(ErrorKind::config, "unknown experiment '" + experiment + "'");
    if (print_defaults) {
      std::cout << default_config(*e).dump(2) << "\n";
      return 0;
    }
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) fail(ErrorKind::io, "cannot read " + config_path);
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::config, config_path + ": " + ex.what());
      }
    }
    if (j.contains("experiment") && j.at("experiment") != experiment)
      fail(ErrorKind::config, "config is for '" + j.at("experiment").dump() + "'");
    j["experiment"] = experiment;
    const ExperimentConfig cfg = parse_config(j, seed);
    const Report rep = run_experiment(cfg);
    if (!out_dir.empty()) write_report(rep, out_dir);
    for (const auto& a : rep.assertions)
      std::printf("%s  %s%s%s\n", a.passed ? "PASS" : "FAIL", a.name.c_str(),
                  a.detail.empty() ? "" : ": ", a.detail.c_str());
    std::printf("%s in %.1f s\n", rep.passed() ? "passed" : "FAILED", rep.seconds);
    return rep.passed() ? 0 : 1;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
}
