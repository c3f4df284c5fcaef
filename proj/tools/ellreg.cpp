// Command-line driver: binds flat key = value experiment configs to the
// laboratory and exports CSV data.
//
//   ellreg run   --config exp.cfg [--out DIR] [--threads N] [--seed N] [--quiet]
//   ellreg sweep --config exp.cfg --param grid.m --values 32,64,128 [...]
//
// Exit codes: 0 success, 1 validation error (bad config, bad flags),
// 2 numerical failure (solver breakdown, bracketing failure).

#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ellreg/ellreg.hpp"

namespace {

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    // trim spaces
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ellreg: a numerical laboratory for divergence-form elliptic "
      "equations with rough coefficients"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param, values_csv;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  unsigned long long seed = 12345;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")
        ->required();
    cmd->add_option("--out", out_dir,
                    "output directory (default: config `out`, then "
                    "$ELLREG_OUT, then ./ellreg-out)");
    cmd->add_option("--threads", threads,
                    "worker pool size (results are independent of it)");
    cmd->add_option("--seed", seed, "seed for Monte Carlo ellipticity checks");
    cmd->add_flag("--quiet", quiet, "suppress progress output");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_common(run);

  CLI::App* sweep =
      app.add_subcommand("sweep", "run an experiment once per parameter value");
  add_common(sweep);
  sweep->add_option("--param", param, "config field to sweep (e.g. grid.m)")
      ->required();
  sweep
      ->add_option("--values", values_csv,
                   "comma-separated values for the swept field")
      ->required();

  CLI11_PARSE(app, argc, argv);

  ellreg::RunOptions opt;
  opt.out_dir = out_dir;
  opt.threads = threads;
  opt.seed = seed;
  opt.quiet = quiet;

  try {
    if (run->parsed()) {
      ellreg::run_file(config_path, opt);
    } else {
      ellreg::run_sweep(config_path, param, split_values(values_csv), opt);
    }
  } catch (const ellreg::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ellreg::numeric_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
