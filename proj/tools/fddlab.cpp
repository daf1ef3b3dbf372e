#include <iostream>

#include "CLI11.hpp"
#include "fdd/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fddlab: pupil-division imaging simulation and estimation"};
  app.require_subcommand(1);

  std::string config_path;
  fdd::CommandOptions options;
  int trials = 0;
  std::uint64_t seed = 0;

  const char* commands[][2] = {
      {"otf", "full and region OTFs, PSF, axis profiles"},
      {"fisher", "QFI, DI, raw and hybrid FDD Fisher information and CRBs along k_x"},
      {"budget", "minimum photon budgets and achievable resolution"},
      {"simulate", "noisy six-frame acquisitions plus a full-budget DI reference"},
      {"reconstruct", "Wiener fusion, DI deconvolution and Fourier-parameter estimates"},
      {"snr", "per-frame and combined SNR at the analysis frequencies"},
      {"validate", "1D numerical vs analytic Fisher matrix comparison"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON); defaults apply when omitted")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", options.out, "output directory")->default_val("out");
    sub->add_option("--trials", trials, "Monte Carlo trials (overrides acquisition.trials)");
    sub->add_option("--seed", seed, "base seed (overrides acquisition.seed and validation.seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommand(name);
  if (sub->count("--trials")) options.trials = trials;
  if (sub->count("--seed")) options.seed = seed;

  try {
    const fdd::ExperimentConfig cfg =
        config_path.empty() ? fdd::ExperimentConfig{} : fdd::load_config(config_path);
    const fdd::CommandResult result = fdd::run_command(name, cfg, options);
    std::cout << name << ": wrote " << result.artifacts.size() << " artifacts and manifest.json to "
              << options.out.string() << "\n";
    for (const auto& f : result.failures) std::cerr << "error: " << f << "\n";
    return fdd::exit_code_for(result);
  } catch (const fdd::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fdd::NumericalError& e) {
    std::cerr << "numerical invariant failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
