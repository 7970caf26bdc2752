// Scenario runner: one positional JSON config, a handful of overrides.
#include <string>

#include <CLI11.hpp>

#include "vp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"vpconvex scenario runner"};

  std::string config_path;
  std::string mode_override;
  std::string out_dir_override;
  int workers_override = 0;
  long seed_override = -1;

  app.add_option("config", config_path, "path to the JSON run configuration")->required();
  app.add_option("--mode-override", mode_override,
                 "run a different mode than the config names "
                 "(poisson-test|trajectory|velocity-lemma|decay-scan|picard|run)");
  app.add_option("--out-dir", out_dir_override, "output directory override");
  app.add_option("--workers", workers_override, "worker thread count override");
  app.add_option("--seed", seed_override, "sampling seed override");

  CLI11_PARSE(app, argc, argv);

  return vp::run_config_file(config_path, mode_override, out_dir_override, workers_override,
                             seed_override);
}
