#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stereosnn::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
  std::vector<std::string> overrides;  // section.key=value
  bool hardware_budget = false;
  bool auto_crop = false;
  // Independent configs run concurrently on up to this many threads.
  unsigned jobs = 1;
};

// Full pipeline per config. Artifacts land in the config's output directory;
// progress and the headline table go to `out`, diagnostics to `err`.
int cmd_run(std::span<const std::filesystem::path> configs, const RunOptions& options,
            std::ostream& out, std::ostream& err);

// Synthetic fixture generation: left_events.csv, right_events.csv, trace.csv.
int cmd_synth(const std::filesystem::path& config,
              std::span<const std::string> overrides, std::ostream& out,
              std::ostream& err);

struct TopologyOptions {
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;
  bool unlimited = false;
  bool hardware_budget = false;
  std::filesystem::path output_dir = ".";
};

// Builds the network, writes topology.json and constraints.json, and prints
// one pass/fail line per constraint.
int cmd_topology(const TopologyOptions& options, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::filesystem::path spikes;
  std::filesystem::path trace;
  std::optional<std::filesystem::path> events;  // for the input-event energy term
  std::optional<std::filesystem::path> output_dir;
};

// Metrics only, over an existing spike CSV and ground-truth trace.
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

}  // namespace stereosnn::cli
