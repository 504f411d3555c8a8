// adp-lab: command line harness for the solver library.
//
//   adp-lab run <config.json>
//   adp-lab figure1|grid|initvals --preset <id> --out <dir> [--seed S]
//   adp-lab selftest

#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "adp/experiments.hpp"

namespace {

void report(const adp::RunRecord& rec) {
  std::cout << "wrote " << rec.entries.size() << " method outputs to " << rec.config.out_dir
            << "\n";
  for (const std::string& line : rec.log_lines) std::cout << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analytic-deep-prior solver lab"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run an experiment described by a config file");
  run->add_option("config", config_path, "JSON config file")->required();

  struct SubArgs {
    std::string preset = "default";
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
  };
  auto add_experiment = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    auto args = std::make_shared<SubArgs>();
    cmd->add_option("--preset", args->preset, "built-in preset id");
    cmd->add_option("--out", args->out, "output directory");
    cmd->add_option("--seed", args->seed, "override the preset seed")
        ->each([args](const std::string&) { args->seed_set = true; });
    cmd->callback([name, args] {
      adp::ExperimentConfig cfg = adp::preset_config(name, args->preset);
      cfg.out_dir = args->out;
      if (args->seed_set) cfg.seed = args->seed;
      report(adp::run_from_config(cfg));
    });
    return cmd;
  };
  add_experiment("figure1", "start / early-stopped / limit vs direct solutions");
  add_experiment("grid", "3 ground truths x 4 methods for one forward operator");
  add_experiment("initvals", "gradient methods from different initial operators");

  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in property checks");

  try {
    app.parse(argc, argv);
    if (run->parsed()) report(adp::run_from_config(adp::load_config(config_path)));
    if (selftest->parsed()) return adp::selftest(std::cout) == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
