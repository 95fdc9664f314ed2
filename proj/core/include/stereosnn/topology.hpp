#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereosnn/events.hpp"

namespace stereosnn {

enum class Population : std::uint8_t {
  RetinaLeft = 0,
  RetinaRight = 1,
  CoincExc = 2,
  CoincInh = 3,
  Disparity = 4,
};
inline constexpr std::size_t kPopulationCount = 5;
inline constexpr std::array<Population, kPopulationCount> kAllPopulations{
    Population::RetinaLeft, Population::RetinaRight, Population::CoincExc,
    Population::CoincInh, Population::Disparity};

// RETINA_L, RETINA_R, COINC_EXC, COINC_INH, DISPARITY.
std::string_view to_string(Population p);
// Throws ConfigError on an unknown name.
Population population_from_string(std::string_view name);

inline bool is_retina(Population p) noexcept {
  return p == Population::RetinaLeft || p == Population::RetinaRight;
}

// Binocular coordinate of a coincidence or disparity neuron. x_cyc = x_R + x_L,
// d = x_R - x_L, and y is shared by both views (rectified rows).
struct NeuronCoord {
  int x_cyc = 0;
  int y = 0;
  int d = 0;

  static constexpr NeuronCoord from_pair(int x_left, int x_right, int y) noexcept {
    return NeuronCoord{x_right + x_left, y, x_right - x_left};
  }
  constexpr int x_left() const noexcept { return (x_cyc - d) / 2; }
  constexpr int x_right() const noexcept { return (x_cyc + d) / 2; }
  // Parity and bounds check against a retina of the given size.
  constexpr bool valid_for(int retina_width, int retina_height) const noexcept {
    if (((x_cyc + d) & 1) != 0) return false;
    const int xl = x_left(), xr = x_right();
    return xl >= 0 && xr >= 0 && xl < retina_width && xr < retina_width &&
           y >= 0 && y < retina_height;
  }

  friend bool operator==(const NeuronCoord&, const NeuronCoord&) = default;
};

struct RetinaPixel {
  int x = 0;
  int y = 0;
  Side side = Side::Left;
  // 0 when polarities are merged; otherwise 0 = OFF, 1 = ON.
  int channel = 0;
  friend bool operator==(const RetinaPixel&, const RetinaPixel&) = default;
};

using NeuronId = std::uint32_t;

enum class SynapseSign : std::uint8_t { Excitatory, Inhibitory };
enum class SynapseKind : std::uint8_t { Feedforward, Recurrent };

// Weights are peak post-synaptic potential amplitudes in membrane units, so a
// retina weight of 0.6 with threshold 1.0 makes one EPSP sub-threshold and two
// coincident EPSPs supra-threshold.
struct Synapse {
  NeuronId pre = 0;
  NeuronId post = 0;
  double weight = 0.0;
  SynapseSign sign = SynapseSign::Excitatory;
  SynapseKind kind = SynapseKind::Feedforward;

  friend bool operator==(const Synapse&, const Synapse&) = default;
};

struct TopologyWeights {
  double retina_to_coinc = 0.6;  // R1
  double coinc_to_disp_exc = 0.5;  // R3
  double coinc_to_disp_inh = 0.25;  // R2
  double disp_recurrent = 0.4;  // R4
};

struct TopologyParams {
  int retina_width = 16;
  int retina_height = 16;
  int d_max = 7;
  TopologyWeights weights;
  // Limits R3 to coincidence neurons whose left column lies within this many
  // pixels of the target's. Unset means the whole row.
  std::optional<int> continuity_radius;
  // Separate ON and OFF retina channels instead of one merged channel.
  bool polarity_channels = false;

  void validate() const;
};

struct IdRange {
  NeuronId first = 0;
  std::size_t count = 0;
  bool contains(NeuronId id) const noexcept {
    return id >= first && id - first < count;
  }
};

// The stereo network: two retinas, twin coincidence populations and a
// disparity population, with the synapse table of rules R1-R4:
//   R1 retina pixel -> every C neuron viewing it (x_L or x_R), same row.
//   R2 C_inh (x_cyc, y, .) -| every D at the same cyclopean position.
//   R3 C_exc (., y, d) -> every D of the same disparity in the row.
//   R4 D -| every other D sharing a line of sight (x_L or x_R), same row.
// Coincidence and disparity ids are ordered by (d, y, x_cyc).
class Topology {
 public:
  static Topology build(const TopologyParams& params);

  const TopologyParams& params() const noexcept { return params_; }
  int retina_width() const noexcept { return params_.retina_width; }
  int retina_height() const noexcept { return params_.retina_height; }
  int d_max() const noexcept { return params_.d_max; }
  int retina_channels() const noexcept { return params_.polarity_channels ? 2 : 1; }
  CameraGeometry retina_geometry() const noexcept {
    return {params_.retina_width, params_.retina_height};
  }

  std::size_t neuron_count() const noexcept { return neuron_count_; }
  // Number of valid (x_cyc, y, d) coordinates in the band.
  std::size_t triplet_count() const noexcept { return triplets_.size(); }
  // Coordinates in id order within the C and D populations.
  std::span<const NeuronCoord> triplets() const noexcept { return triplets_; }

  IdRange range(Population p) const noexcept {
    return ranges_[static_cast<std::size_t>(p)];
  }
  Population population_of(NeuronId id) const;

  // Throws ConfigError for retina ids or unknown ids.
  NeuronCoord coord_of(NeuronId id) const;
  // Throws ConfigError for non-retina ids.
  RetinaPixel retina_pixel_of(NeuronId id) const;
  // Throws ConfigError when `coord` is not part of the band.
  NeuronId id_of(Population p, const NeuronCoord& coord) const;
  std::optional<NeuronId> find(Population p, const NeuronCoord& coord) const;
  NeuronId retina_id(const RetinaPixel& pixel) const;
  // Retina neuron an input event drives.
  NeuronId retina_id_for(const DvsEvent& e) const;

  // Synapses sorted by (pre, post).
  std::span<const Synapse> synapses() const noexcept { return synapses_; }
  std::span<const Synapse> efferents(NeuronId id) const;
  std::vector<std::size_t> fan_in_counts() const;

 private:
  std::optional<std::size_t> triplet_index(const NeuronCoord& c) const;

  TopologyParams params_;
  std::size_t neuron_count_ = 0;
  std::array<IdRange, kPopulationCount> ranges_{};
  std::vector<NeuronCoord> triplets_;
  // Start of each disparity block in triplets_, indexed by d + d_max.
  std::vector<std::size_t> block_start_;
  std::vector<Synapse> synapses_;
  std::vector<std::size_t> offsets_;  // CSR by pre
};

struct HardwareLimits {
  static constexpr std::uint64_t kUnlimited =
      std::numeric_limits<std::uint64_t>::max();

  std::uint64_t max_fan_in = 64;
  std::uint64_t neurons_per_core = 256;
  std::uint64_t cores_per_chip = 4;
  std::uint64_t chips = 3;

  std::uint64_t neuron_budget() const noexcept;
  static HardwareLimits unlimited() noexcept {
    return {kUnlimited, kUnlimited, kUnlimited, kUnlimited};
  }
};

// Counting-only check of on-chip resources. Retina neurons are off-chip inputs
// and do not count toward the neuron budget.
struct ConstraintReport {
  HardwareLimits limits;
  std::size_t max_fan_in_observed = 0;
  std::vector<NeuronId> fan_in_violations;
  std::uint64_t neurons_required = 0;
  std::uint64_t neurons_available = 0;

  bool fan_in_ok() const noexcept { return fan_in_violations.empty(); }
  bool budget_ok() const noexcept { return neurons_required <= neurons_available; }
  bool passed() const noexcept { return fan_in_ok() && budget_ok(); }
};

ConstraintReport check_hardware_constraints(const Topology& topology,
                                            const HardwareLimits& limits);

// Largest d_max in [0, retina_width - 1] whose build passes the limits.
std::optional<int> largest_d_max_within(TopologyParams params,
                                        const HardwareLimits& limits);

std::string topology_to_json(const Topology& topology);
std::string constraint_report_to_json(const ConstraintReport& report);

}  // namespace stereosnn
