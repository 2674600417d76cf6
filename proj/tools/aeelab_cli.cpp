#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "aeelab/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  cmd->add_option("--preset", flags.preset, "preset when no config file is given (sine|linear|zero)");
  cmd->add_option("--seed", flags.seed, "master seed override")->each([&](const std::string&) {
    flags.seed_set = true;
  });
  cmd->add_option("--threads", flags.threads, "worker count (0: AEELAB_THREADS or hardware)");
  cmd->add_option("--out", flags.out_dir, "output directory override");
}

aeelab::ExperimentConfig resolve_config(const CommonFlags& flags) {
  aeelab::ExperimentConfig cfg = flags.config_path.empty()
                                     ? aeelab::config_from_preset(flags.preset.empty() ? "sine" : flags.preset)
                                     : aeelab::load_config_file(flags.config_path);
  if (!flags.config_path.empty() && !flags.preset.empty()) {
    throw aeelab::ConfigError("--preset and --config are mutually exclusive");
  }
  if (flags.seed_set) cfg.master_seed = flags.seed;
  if (flags.threads > 0) cfg.threads = flags.threads;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aeelab: spectral SPDE error-distribution experiments"};
  app.require_subcommand(1);

  CommonFlags order_flags, dist_flags, sode_flags;
  CLI::App* order = app.add_subcommand("order", "mean-square convergence order fit");
  add_common(order, order_flags);
  CLI::App* dist = app.add_subcommand("distribution", "normalized-error vs limit distribution tests");
  add_common(dist, dist_flags);
  CLI::App* sode = app.add_subcommand("sode", "finite-dimensional (SODE) error distribution tests");
  add_common(sode, sode_flags);

  std::string golden_path;
  CLI::App* selftest = app.add_subcommand("selftest", "deterministic invariant suite");
  selftest->add_option("--golden", golden_path, "noise-table dump to verify against its header");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : aeelab::kExitConfig;
  }

  try {
    if (order->parsed()) return aeelab::cmd_order(resolve_config(order_flags));
    if (dist->parsed()) return aeelab::cmd_distribution(resolve_config(dist_flags));
    if (sode->parsed()) return aeelab::cmd_sode(resolve_config(sode_flags));
    if (selftest->parsed()) return aeelab::cmd_selftest(golden_path);
  } catch (const aeelab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return aeelab::kExitConfig;
  }
  return aeelab::kExitConfig;
}
