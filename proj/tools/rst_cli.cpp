#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rst/cli.hpp"
#include "rst/parallel.hpp"
#include "rst/types.hpp"

int main(int argc, char **argv) {
  using namespace rst::cli;
  CLI::App app{"Runs one verification or reconstruction scenario from a key = value config file."};
  std::string config_path, out_dir = "out";
  long seed = -1;
  int threads = 1;
  app.add_option("--config", config_path, "Scenario configuration file")->required();
  app.add_option("--out", out_dir, "Output directory for reports and the manifest");
  app.add_option("--seed", seed, "Overrides the seed of the config")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }
  try {
    ScenarioConfig cfg = parse_config_file(config_path);
    if (seed >= 0) set_value(cfg, "seed", std::to_string(seed));
    rst::thread_count() = threads;
    return run(cfg, out_dir, std::cout).exit_code;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const rst::PreconditionError &e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kExitInvariantFailure;
  }
}
