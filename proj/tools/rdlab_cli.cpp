#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "rdlab/config.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/experiments.hpp"

int main(int argc, char** argv) {
  using namespace rdlab;
  CLI::App app{"rdlab: reaction-diffusion SPDE simulation and verification lab"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "JSON configuration file");
    sub->add_option("--seed", seed, "master seed (overrides RDLAB_SEED and the config)");
    sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
    sub->add_option("--out,-o", out_dir, "output directory");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (const char* env = std::getenv("RDLAB_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw ConfigError("RDLAB_SEED is not an unsigned integer: " + std::string(env));
      }
    }
    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (sub->count("--threads") > 0) {
      if (threads == 0) throw ConfigError("--threads must be positive");
      cfg.threads = threads;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    return run_subcommand(name, cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const HypothesisViolation& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return exit_hypothesis;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition not met: " << e.what() << "\n";
    return exit_hypothesis;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return exit_failed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failed;
  }
}
