#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stereosnn/cli/commands.hpp"

namespace fs = std::filesystem;
using namespace stereosnn::cli;

int main(int argc, char** argv) {
  CLI::App app{"Event-based stereo matching with a spiking coincidence network"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::vector<fs::path> run_configs;
  auto* run = app.add_subcommand("run", "Run the full pipeline for one or more configs");
  run->add_option("configs", run_configs, "Run config JSON files")->required();
  run->add_option("--set", run_opts.overrides, "Override a config key: section.key=value");
  run->add_option("-j,--jobs", run_opts.jobs, "Configs to run concurrently")
      ->check(CLI::PositiveNumber);
  run->add_flag("--hardware-budget", run_opts.hardware_budget,
                "Use the largest d_max that fits the hardware limits");
  run->add_flag("--auto-crop", run_opts.auto_crop,
                "Centre the crop window on early event activity");

  fs::path synth_config;
  std::vector<std::string> synth_sets;
  auto* synth = app.add_subcommand("synth", "Write synthetic stereo fixtures");
  synth->add_option("config", synth_config, "Config with an input.synthetic section")
      ->required();
  synth->add_option("--set", synth_sets, "Override a config key: section.key=value");

  TopologyOptions topo_opts;
  std::string topo_config;
  auto* topo = app.add_subcommand("topology", "Build the network and check hardware limits");
  topo->add_option("config", topo_config, "Config with a topology section");
  topo->add_option("--set", topo_opts.overrides, "Override a config key: section.key=value");
  topo->add_flag("--unlimited", topo_opts.unlimited, "Check against unlimited resources");
  topo->add_flag("--hardware-budget", topo_opts.hardware_budget,
                 "Use the largest d_max that fits the hardware limits");
  topo->add_option("-o,--output", topo_opts.output_dir, "Output directory");

  EvalOptions eval_opts;
  std::string eval_events, eval_out;
  auto* eval = app.add_subcommand("eval", "Compute metrics from existing spike and trace files");
  eval->add_option("config", eval_opts.config, "Run config JSON")->required();
  eval->add_option("--spikes", eval_opts.spikes, "Spike CSV")->required();
  eval->add_option("--trace", eval_opts.trace, "Ground-truth trace CSV")->required();
  eval->add_option("--events", eval_events, "Input event CSV, for the energy estimate");
  eval->add_option("-o,--output", eval_out, "Output directory (default: config's)");
  eval->add_option("--set", eval_opts.overrides, "Override a config key: section.key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(run_configs, run_opts, std::cout, std::cerr);
  if (*synth) return cmd_synth(synth_config, synth_sets, std::cout, std::cerr);
  if (*topo) {
    if (!topo_config.empty()) topo_opts.config = topo_config;
    return cmd_topology(topo_opts, std::cout, std::cerr);
  }
  if (!eval_events.empty()) eval_opts.events = eval_events;
  if (!eval_out.empty()) eval_opts.output_dir = eval_out;
  return cmd_eval(eval_opts, std::cout, std::cerr);
}
