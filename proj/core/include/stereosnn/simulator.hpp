#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "stereosnn/events.hpp"
#include "stereosnn/topology.hpp"

namespace stereosnn {

struct NeuronParams {
  double tau_m_us = 10'000.0;
  double tau_s_us = 5'000.0;
  double threshold = 1.0;
  double reset = 0.0;
  Timestamp refractory_us = 1'000;
  // Membrane floor applied at every state update (bounded analog range).
  double v_min = -1.0;

  void validate() const;
  friend bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

// Shared neuron parameters with optional per-population replacements.
// Retina neurons are relays: each input event becomes a retina spike unless
// the pixel is still refractory, so only `refractory_us` applies to them.
struct LifParams {
  NeuronParams base;
  std::map<Population, NeuronParams> overrides;

  const NeuronParams& of(Population p) const {
    const auto it = overrides.find(p);
    return it == overrides.end() ? base : it->second;
  }
  void validate() const;

  // Library defaults: base parameters above, a 25 ms retina dead time that
  // keeps any monocular train below coincidence threshold, and slower
  // integration in the disparity population.
  static LifParams defaults();
};

// Optional device-mismatch model. Disabled when both sigmas are zero.
struct MismatchOptions {
  double weight_jitter = 0.0;  // relative sigma of per-synapse weights
  double threshold_mismatch = 0.0;  // relative sigma of per-neuron thresholds
  std::uint64_t seed = 0;
};

struct Spike {
  Timestamp t = 0;
  NeuronId neuron = 0;
  Population population = Population::Disparity;

  friend bool operator==(const Spike&, const Spike&) = default;
};

struct SpikeRecord {
  // Non-retina spikes sorted by (t, neuron).
  std::vector<Spike> spikes;
  std::array<std::size_t, kPopulationCount> population_counts{};
  std::size_t input_events = 0;
  std::size_t retina_spikes = 0;
  std::size_t synaptic_deliveries = 0;
  Timestamp duration = 0;

  std::size_t count(Population p) const noexcept {
    return population_counts[static_cast<std::size_t>(p)];
  }
};

// Event-driven exact simulation of the network. Spikes fire at the first
// integer microsecond at which the membrane reaches threshold; zero-delay
// deliveries at one timestamp are processed in ascending neuron id until the
// network is quiescent. Identical inputs give bit-identical records.
SpikeRecord simulate(const Topology& topology, const StereoEventStream& stream,
                     const LifParams& params, const MismatchOptions& mismatch = {});

// Number of analysis windows covering [0, duration].
std::size_t window_count_for(Timestamp duration, Timestamp window);

// Windowed instantaneous firing rates of one population.
class RateMatrix {
 public:
  RateMatrix(Population population, IdRange neurons, Timestamp window,
             std::size_t windows);

  Population population() const noexcept { return population_; }
  IdRange neurons() const noexcept { return neurons_; }
  Timestamp window() const noexcept { return window_; }
  std::size_t window_count() const noexcept { return windows_; }
  std::size_t neuron_count() const noexcept { return neurons_.count; }

  // `local` indexes neurons within the population.
  std::uint32_t count(std::size_t local, std::size_t window) const {
    return counts_[local * windows_ + window];
  }
  double rate_hz(std::size_t local, std::size_t window) const {
    return static_cast<double>(count(local, window)) * 1e6 /
           static_cast<double>(window_);
  }
  void add_spike(std::size_t local, std::size_t window) {
    ++counts_[local * windows_ + window];
  }

 private:
  Population population_;
  IdRange neurons_;
  Timestamp window_;
  std::size_t windows_;
  std::vector<std::uint32_t> counts_;
};

// Spikes after the last window are ignored.
RateMatrix instantaneous_rates(const SpikeRecord& record, const Topology& topology,
                               Timestamp window, Population population,
                               std::size_t windows);

// Spike counts indexed by neuron id.
std::vector<std::size_t> per_neuron_counts(const SpikeRecord& record,
                                           std::size_t neuron_count);

void write_spikes(std::ostream& out, std::span<const Spike> spikes);
void write_spike_file(std::span<const Spike> spikes,
                      const std::filesystem::path& path);
std::vector<Spike> read_spike_file(const std::filesystem::path& path);
std::vector<Spike> read_spikes(std::istream& in);

// Sparse tidy export: one row per nonzero (window, neuron).
void write_rates(std::ostream& out, const RateMatrix& rates, bool header = true);

}  // namespace stereosnn
