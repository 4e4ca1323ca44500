#include "hardylab/cli_ops.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>

int main(int argc, char** argv) {
  CLI::App app{"hardylab: two-weight Hardy inequalities and the weighted "
               "p-Laplacian evolution, as reproducible CSV experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0x9d2c5680u;

  using Cmd = std::function<int(const hardylab::RunConfig&,
                                const std::string&, std::uint64_t)>;
  Cmd cmd;
  auto add = [&](const char* name, const char* desc, Cmd fn) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory for CSV files");
    sub->add_option("--seed", seed, "random seed");
    sub->callback([&cmd, fn] { cmd = fn; });
  };
  add("check-weights", "audit a weight pair's admissibility conditions",
      hardylab::cmd_check_weights);
  add("hardy", "estimate the best Hardy constant over a refinement ladder",
      hardylab::cmd_hardy);
  add("solve", "integrate the parabolic problem and record the energy ledger",
      hardylab::cmd_solve);
  add("sweep-lambda", "sweep lambda and locate the stability threshold",
      hardylab::cmd_sweep_lambda);

  CLI11_PARSE(app, argc, argv);

  try {
    const hardylab::RunConfig cfg = hardylab::load_config(config_path);
    return cmd(cfg, out_dir, seed);
  } catch (const hardylab::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
