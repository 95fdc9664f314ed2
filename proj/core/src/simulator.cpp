#include "stereosnn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <string>

#include "stereosnn/error.hpp"
#include "stereosnn/io.hpp"
#include "stereosnn/lif_kernel.hpp"

namespace stereosnn {

void NeuronParams::validate() const {
  for (double v : {tau_m_us, tau_s_us, threshold, reset, v_min}) {
    if (!std::isfinite(v)) throw ConfigError("non-finite neuron parameter");
  }
  if (!(tau_m_us > 0.0) || !(tau_s_us > 0.0)) {
    throw ConfigError("time constants must be positive");
  }
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (!(threshold > reset)) throw ConfigError("threshold must exceed reset");
  if (refractory_us < 0) throw ConfigError("refractory period must be >= 0");
  if (v_min > reset) throw ConfigError("v_min must not exceed reset");
}

void LifParams::validate() const {
  base.validate();
  for (const auto& [pop, p] : overrides) p.validate();
}

LifParams LifParams::defaults() {
  LifParams p;
  NeuronParams retina = p.base;
  retina.refractory_us = 25'000;
  p.overrides[Population::RetinaLeft] = retina;
  p.overrides[Population::RetinaRight] = retina;
  NeuronParams disparity = p.base;
  disparity.tau_m_us = 40'000.0;
  disparity.tau_s_us = 10'000.0;
  disparity.refractory_us = 2'000;
  p.overrides[Population::Disparity] = disparity;
  return p;
}

namespace {

struct Pending {
  Timestamp t;
  NeuronId id;
  std::uint32_t version;
  // Min-heap on (t, id).
  bool operator>(const Pending& o) const noexcept {
    return t != o.t ? t > o.t : id > o.id;
  }
};

class Engine {
 public:
  Engine(const Topology& topology, const LifParams& params,
         const MismatchOptions& mismatch)
      : topo_(topology) {
    const std::size_t n = topology.neuron_count();
    v_.assign(n, 0.0);
    i_.assign(n, 0.0);
    t_last_.assign(n, 0);
    refractory_until_.assign(n, std::numeric_limits<Timestamp>::min());
    version_.assign(n, 0);
    param_index_.resize(n);
    threshold_.resize(n);

    for (auto pop : kAllPopulations) {
      const auto& np = params.of(pop);
      pop_params_[static_cast<std::size_t>(pop)] = np;
      current_scale_[static_cast<std::size_t>(pop)] =
          1.0 / lif::unit_psp_peak(np.tau_m_us, np.tau_s_us);
      const auto r = topology.range(pop);
      for (std::size_t k = 0; k < r.count; ++k) {
        param_index_[r.first + k] = static_cast<std::uint8_t>(pop);
        threshold_[r.first + k] = np.threshold;
      }
    }

    std::mt19937_64 rng(mismatch.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    if (mismatch.threshold_mismatch > 0.0) {
      for (std::size_t id = 0; id < n; ++id) {
        const auto& np = pop_params_[param_index_[id]];
        const double th =
            np.threshold * (1.0 + mismatch.threshold_mismatch * normal(rng));
        threshold_[id] = std::max(th, np.reset + 1e-9);
      }
    }
    const auto syn = topology.synapses();
    weights_.resize(syn.size());
    for (std::size_t k = 0; k < syn.size(); ++k) {
      double w = syn[k].weight;
      if (mismatch.weight_jitter > 0.0) {
        w = std::max(0.0, w * (1.0 + mismatch.weight_jitter * normal(rng)));
      }
      weights_[k] = syn[k].sign == SynapseSign::Excitatory ? w : -w;
    }
  }

  SpikeRecord run(const StereoEventStream& stream) {
    SpikeRecord rec;
    rec.duration = stream.duration();
    rec.input_events = stream.size();
    const auto events = stream.events();
    const auto syn_base = topo_.synapses().data();
    std::size_t next_input = 0;

    while (true) {
      while (!queue_.empty() && queue_.top().version != version_[queue_.top().id]) {
        queue_.pop();
      }
      const bool have_input = next_input < events.size();
      if (!have_input && queue_.empty()) break;

      if (have_input &&
          (queue_.empty() || events[next_input].t <= queue_.top().t)) {
        const auto& e = events[next_input++];
        const NeuronId rid = topo_.retina_id_for(e);
        if (e.t >= refractory_until_[rid]) {
          const auto& np = pop_params_[param_index_[rid]];
          refractory_until_[rid] = e.t + np.refractory_us;
          ++rec.retina_spikes;
          ++rec.population_counts[param_index_[rid]];
          deliver(rid, e.t, syn_base, rec);
        }
        continue;
      }

      const Pending top = queue_.top();
      queue_.pop();
      fire(top.id, top.t, rec);
      deliver(top.id, top.t, syn_base, rec);
    }

    std::stable_sort(rec.spikes.begin(), rec.spikes.end(),
                     [](const Spike& a, const Spike& b) {
                       return a.t != b.t ? a.t < b.t : a.neuron < b.neuron;
                     });
    return rec;
  }

 private:
  // Brings neuron `id` to time t without new input.
  void advance(NeuronId id, Timestamp t) {
    if (t <= t_last_[id]) return;
    const auto& np = pop_params_[param_index_[id]];
    if (refractory_until_[id] > t_last_[id]) {
      if (t <= refractory_until_[id]) {
        i_[id] = lif::current_at(i_[id], static_cast<double>(t - t_last_[id]),
                                 np.tau_s_us);
        v_[id] = np.reset;
        t_last_[id] = t;
        return;
      }
      i_[id] = lif::current_at(
          i_[id], static_cast<double>(refractory_until_[id] - t_last_[id]),
          np.tau_s_us);
      v_[id] = np.reset;
      t_last_[id] = refractory_until_[id];
    }
    const double s = static_cast<double>(t - t_last_[id]);
    const double v = lif::membrane_at(v_[id], i_[id], s, np.tau_m_us, np.tau_s_us);
    i_[id] = lif::current_at(i_[id], s, np.tau_s_us);
    v_[id] = std::max(v, np.v_min);
    t_last_[id] = t;
  }

  // Schedules the next threshold crossing of `id` given its state at t_last.
  void predict(NeuronId id) {
    ++version_[id];
    const auto& np = pop_params_[param_index_[id]];
    Timestamp base = t_last_[id];
    double v = v_[id];
    double i = i_[id];
    if (refractory_until_[id] > base) {
      i = lif::current_at(i, static_cast<double>(refractory_until_[id] - base),
                          np.tau_s_us);
      v = np.reset;
      base = refractory_until_[id];
    }
    const double th = threshold_[id];
    if (v < th) {
      // The current can lift V by at most i * peak(unit PSP).
      const double bound = std::max(v, 0.0) +
                           std::max(i, 0.0) / current_scale_[param_index_[id]];
      if (bound < th) return;
    }
    const auto off = lif::first_crossing(v, i, th, np.tau_m_us, np.tau_s_us);
    if (!off) return;
    queue_.push(Pending{base + *off, id, version_[id]});
  }

  void fire(NeuronId id, Timestamp t, SpikeRecord& rec) {
    advance(id, t);
    const auto pop_index = param_index_[id];
    const auto& np = pop_params_[pop_index];
    v_[id] = np.reset;
    refractory_until_[id] = t + np.refractory_us;
    rec.spikes.push_back(Spike{t, id, static_cast<Population>(pop_index)});
    ++rec.population_counts[pop_index];
    // Residual synaptic current may drive another spike after refractory.
    predict(id);
  }

  void deliver(NeuronId pre, Timestamp t, const Synapse* syn_base,
               SpikeRecord& rec) {
    const auto eff = topo_.efferents(pre);
    rec.synaptic_deliveries += eff.size();
    for (const auto& s : eff) {
      const auto k = static_cast<std::size_t>(&s - syn_base);
      const NeuronId post = s.post;
      advance(post, t);
      i_[post] += weights_[k] * current_scale_[param_index_[post]];
      predict(post);
    }
  }

  const Topology& topo_;
  std::array<NeuronParams, kPopulationCount> pop_params_{};
  std::array<double, kPopulationCount> current_scale_{};
  std::vector<std::uint8_t> param_index_;
  std::vector<double> threshold_;
  std::vector<double> weights_;
  std::vector<double> v_;
  std::vector<double> i_;
  std::vector<Timestamp> t_last_;
  std::vector<Timestamp> refractory_until_;
  std::vector<std::uint32_t> version_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
};

}  // namespace

SpikeRecord simulate(const Topology& topology, const StereoEventStream& stream,
                     const LifParams& params, const MismatchOptions& mismatch) {
  params.validate();
  if (!(stream.geometry() == topology.retina_geometry())) {
    throw ConfigError(
        "stream geometry " + std::to_string(stream.geometry().width) + "x" +
        std::to_string(stream.geometry().height) + " does not match retina " +
        std::to_string(topology.retina_width()) + "x" +
        std::to_string(topology.retina_height()));
  }
  if (!std::isfinite(mismatch.weight_jitter) ||
      !std::isfinite(mismatch.threshold_mismatch) || mismatch.weight_jitter < 0 ||
      mismatch.threshold_mismatch < 0) {
    throw ConfigError("mismatch sigmas must be finite and non-negative");
  }
  Engine engine(topology, params, mismatch);
  return engine.run(stream);
}

std::size_t window_count_for(Timestamp duration, Timestamp window) {
  if (window <= 0) throw ConfigError("analysis window must be positive");
  return static_cast<std::size_t>(std::max<Timestamp>(duration, 0) / window) + 1;
}

RateMatrix::RateMatrix(Population population, IdRange neurons, Timestamp window,
                       std::size_t windows)
    : population_(population),
      neurons_(neurons),
      window_(window),
      windows_(windows),
      counts_(neurons.count * windows, 0) {
  if (window <= 0) throw ConfigError("analysis window must be positive");
}

RateMatrix instantaneous_rates(const SpikeRecord& record, const Topology& topology,
                               Timestamp window, Population population,
                               std::size_t windows) {
  const auto range = topology.range(population);
  RateMatrix rates(population, range, window, windows);
  for (const auto& s : record.spikes) {
    if (!range.contains(s.neuron) || s.t < 0) continue;
    const auto w = static_cast<std::size_t>(s.t / window);
    if (w >= windows) continue;
    rates.add_spike(s.neuron - range.first, w);
  }
  return rates;
}

std::vector<std::size_t> per_neuron_counts(const SpikeRecord& record,
                                           std::size_t neuron_count) {
  std::vector<std::size_t> counts(neuron_count, 0);
  for (const auto& s : record.spikes) {
    if (s.neuron < neuron_count) ++counts[s.neuron];
  }
  return counts;
}

void write_spikes(std::ostream& out, std::span<const Spike> spikes) {
  out << "t_us,neuron_id,population\n";
  for (const auto& s : spikes) {
    out << s.t << ',' << s.neuron << ',' << to_string(s.population) << '\n';
  }
}

void write_spike_file(std::span<const Spike> spikes,
                      const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) { write_spikes(out, spikes); });
}

std::vector<Spike> read_spikes(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_us,neuron_id,population") {
    throw ParseError("expected header t_us,neuron_id,population", line_no);
  }
  std::vector<Spike> spikes;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    long long t = 0, id = 0;
    if (f.size() != 3 || !parse_int(f[0], t) || !parse_int(f[1], id) || t < 0 ||
        id < 0) {
      throw ParseError("malformed spike row", line_no);
    }
    Population pop;
    try {
      pop = population_from_string(f[2]);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
    spikes.push_back(Spike{t, static_cast<NeuronId>(id), pop});
  }
  return spikes;
}

std::vector<Spike> read_spike_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open spike file " + path.string());
  try {
    return read_spikes(in);
  } catch (const ParseError& e) {
    throw e.with_prefix(path.string() + ": ");
  }
}

void write_rates(std::ostream& out, const RateMatrix& rates, bool header) {
  if (header) out << "window_i,t_start_us,neuron_id,population,rate_hz\n";
  const auto pop = to_string(rates.population());
  for (std::size_t w = 0; w < rates.window_count(); ++w) {
    for (std::size_t n = 0; n < rates.neuron_count(); ++n) {
      if (rates.count(n, w) == 0) continue;
      out << w << ',' << static_cast<Timestamp>(w) * rates.window() << ','
          << rates.neurons().first + n << ',' << pop << ','
          << format_real(rates.rate_hz(n, w)) << '\n';
    }
  }
}

}  // namespace stereosnn
