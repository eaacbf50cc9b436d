// Command-line front end: one subcommand per run mode.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "zeropi/config.hpp"
#include "zeropi/run.hpp"
#include "zeropi/version.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"0-pi circuit spectra, sweeps and dispersive shifts"};
  app.set_version_flag("--version", std::string(zeropi::kVersion));
  app.require_subcommand(1);

  Args args;
  const struct {
    zeropi::RunMode mode;
    const char* help;
  } modes[] = {
      {zeropi::RunMode::spectrum, "lowest-k spectrum and D"},
      {zeropi::RunMode::flux_sweep, "spectrum and D against external flux"},
      {zeropi::RunMode::dmax_grid, "optimal E_J and D_max over an (E_L, E_CSigma) grid"},
      {zeropi::RunMode::ej_optimize, "maximize D over E_J"},
      {zeropi::RunMode::disorder_sweep, "D against junction or junction-capacitance disorder"},
      {zeropi::RunMode::dispersive, "couplings to the chi mode, Stark and Lamb shifts"},
      {zeropi::RunMode::wavefunction_export, "wavefunction grids of selected levels"},
  };
  for (const auto& m : modes) {
    auto* sub = app.add_subcommand(zeropi::to_string(m.mode), m.help);
    sub->add_option("--config", args.config, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory (overrides run.out)");
    sub->add_option("--workers", args.workers, "worker threads (overrides run.workers)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "solver seed (overrides run.seed)");
  }

  CLI11_PARSE(app, argc, argv);

  const auto* sub = app.get_subcommands().front();
  const auto mode = *zeropi::parse_mode(sub->get_name());
  try {
    zeropi::RunConfig cfg = zeropi::load_config(args.config);
    if (cfg.mode_set && cfg.mode != mode)
      throw zeropi::ConfigError("run.mode = " + zeropi::to_string(cfg.mode) + " conflicts with subcommand " +
                                sub->get_name());
    cfg.mode = mode;
    if (!args.out.empty()) cfg.out_dir = args.out;
    if (args.workers) cfg.workers = *args.workers;
    if (args.seed) cfg.solver.seed = *args.seed;
    cfg.validate();
    return zeropi::run(cfg, cfg.out_dir, std::cerr).exit_code;
  } catch (const zeropi::ConfigError& ex) {
    std::cerr << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  }
}
