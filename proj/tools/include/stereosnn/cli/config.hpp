#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "stereosnn/metrics.hpp"
#include "stereosnn/preprocess.hpp"
#include "stereosnn/simulator.hpp"
#include "stereosnn/synth.hpp"
#include "stereosnn/topology.hpp"

namespace stereosnn::cli {

struct SyntheticInput {
  DisparityProfile profile;
  Timestamp duration_us = 2'000'000;
};

struct InputConfig {
  // Either separate per-side files (no side column needed), one combined file,
  // or a synthetic profile.
  std::optional<std::filesystem::path> left_events;
  std::optional<std::filesystem::path> right_events;
  std::optional<std::filesystem::path> events;
  std::optional<SyntheticInput> synthetic;
  CameraGeometry geometry;
  bool normalize_time = true;

  // Ground truth: a precomputed trace CSV, or markers plus calibration.
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> markers;
  std::optional<std::filesystem::path> calibration;

  std::string sample_label;
};

struct AnalysisConfig {
  Timestamp window_us = 50'000;
  double epsilon_d = 1.0;
  PcdMode pcd_mode = PcdMode::Global;
  EnergyCoefficients energy;
};

struct RunConfig {
  InputConfig input;
  PreprocessConfig preprocess;
  TopologyParams topology;
  HardwareLimits limits;
  // Replace d_max by the largest value that fits `limits`.
  bool hardware_budget = false;
  LifParams lif = LifParams::defaults();
  MismatchOptions mismatch;
  AnalysisConfig analysis;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  // Nested validation plus existence of every referenced file. Without
  // `check_input` the input section is not checked (metrics-only use).
  void validate(bool check_input = true) const;
};

// Applies `section.key=value` overrides to the JSON text, then parses it.
// Relative paths resolve against `base_dir`. Unknown keys are errors.
RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir,
                           std::span<const std::string> overrides = {},
                           bool check_input = true);
RunConfig load_run_config(const std::filesystem::path& path,
                          std::span<const std::string> overrides = {},
                          bool check_input = true);

// Only the topology section (other sections are ignored); no file needed.
struct TopologyConfig {
  TopologyParams topology;
  HardwareLimits limits;
  bool hardware_budget = false;
};
TopologyConfig load_topology_config(const std::optional<std::filesystem::path>& path,
                                    std::span<const std::string> overrides = {});

// Fully resolved configuration (every default explicit, absolute paths) as
// compact JSON. Parsing it back yields an identical RunConfig.
std::string run_config_to_json(const RunConfig& config);

}  // namespace stereosnn::cli
