#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereosnn/groundtruth.hpp"
#include "stereosnn/simulator.hpp"
#include "stereosnn/topology.hpp"

namespace stereosnn {

// Firing-rate-weighted mean disparity of a population per window; nullopt when
// the population is silent in that window.
struct ComTrace {
  Population population = Population::Disparity;
  Timestamp window = 0;
  std::vector<std::optional<double>> com;
};

// `disparities[n]` is the encoded disparity of the n-th neuron of the matrix.
ComTrace center_of_mass(const RateMatrix& rates, std::span<const int> disparities);
ComTrace center_of_mass(const RateMatrix& rates, const Topology& topology);

// Root mean square of com - d_mean over windows where both are defined.
// Throws ConfigError when no window is jointly defined.
double rmse(const ComTrace& com, const DisparityTrace& gt);
// Same over two plain series (nullopt entries are skipped).
double rmse(std::span<const std::optional<double>> a,
            std::span<const std::optional<double>> b);

struct WindowLabels {
  std::size_t td = 0;
  std::size_t fd = 0;
};

struct SpikeLabelCounts {
  Population population = Population::Disparity;
  double epsilon_d = 1.0;
  std::vector<WindowLabels> windows;

  std::size_t total_td() const noexcept;
  std::size_t total_fd() const noexcept;
};

// A spike in window i is a true disparity (TD) iff its neuron's d lies in
// [d_min[i] - eps, d_max[i] + eps]. Spikes in undefined ground-truth windows or
// past the trace are not counted.
SpikeLabelCounts label_spikes(const SpikeRecord& record, const Topology& topology,
                              const DisparityTrace& gt, double epsilon_d,
                              Population population);

enum class PcdMode { Global, PerWindowMean };
std::string_view to_string(PcdMode mode);
PcdMode pcd_mode_from_string(std::string_view name);

// Global: sum TD / sum (TD + FD). PerWindowMean: mean of TD/(TD+FD) over windows
// with at least one labelled spike. Throws ConfigError with no labelled spike.
double pcd(const SpikeLabelCounts& counts, PcdMode mode = PcdMode::Global);

// Joules per event. Defaults are placeholders of plausible magnitude, not
// measured chip constants.
struct EnergyCoefficients {
  double input_event_j = 50e-12;
  double spike_j = 880e-12;
  double synaptic_event_j = 320e-12;
};

struct EnergyCounts {
  std::size_t input_events = 0;
  std::size_t spikes = 0;
  std::size_t synaptic_deliveries = 0;
};

// Average power in microwatts over `duration` us. Throws ConfigError when the
// duration is not positive.
double estimate_energy_uw(const EnergyCounts& counts,
                          const EnergyCoefficients& coefficients,
                          Timestamp duration);
double estimate_energy_uw(const SpikeRecord& record, std::size_t input_events,
                          const EnergyCoefficients& coefficients);

struct PopulationMetrics {
  Population population = Population::Disparity;
  ComTrace com;
  SpikeLabelCounts labels;
  std::optional<double> rmse;
  std::optional<double> pcd;
  std::size_t spikes = 0;
};

struct MetricsReport {
  std::string sample_label;
  Timestamp window = 0;
  double epsilon_d = 1.0;
  PcdMode pcd_mode = PcdMode::Global;
  // Headline population first.
  PopulationMetrics disparity;
  PopulationMetrics coincidence;
  EnergyCounts energy_counts;
  EnergyCoefficients energy_coefficients;
  double energy_uw = 0.0;
  Timestamp duration = 0;
  // The resolved run configuration, as JSON text (empty when not supplied).
  std::string config_json;

  friend bool operator==(const MetricsReport&, const MetricsReport&);
};

struct ReportInputs {
  const SpikeRecord* record = nullptr;
  const Topology* topology = nullptr;
  const DisparityTrace* ground_truth = nullptr;
  Timestamp window = 50'000;
  double epsilon_d = 1.0;
  PcdMode pcd_mode = PcdMode::Global;
  EnergyCoefficients energy;
  std::string sample_label;
  std::string config_json;
};

// Throws ConfigError when the ground-truth window differs from `window`.
MetricsReport build_report(const ReportInputs& inputs);

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& json_text);

// `window_i,t_center_us,com_c,com_d,d_mean,d_min,d_max`.
void write_com_csv(std::ostream& out, const MetricsReport& report,
                   const DisparityTrace& gt);

}  // namespace stereosnn
