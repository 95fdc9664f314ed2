#include "stereosnn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "json.hpp"
#include "stereosnn/error.hpp"

namespace stereosnn {

std::string_view to_string(Population p) {
  switch (p) {
    case Population::RetinaLeft: return "RETINA_L";
    case Population::RetinaRight: return "RETINA_R";
    case Population::CoincExc: return "COINC_EXC";
    case Population::CoincInh: return "COINC_INH";
    case Population::Disparity: return "DISPARITY";
  }
  return "UNKNOWN";
}

Population population_from_string(std::string_view name) {
  for (auto p : kAllPopulations) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown population '" + std::string(name) + "'");
}

void TopologyParams::validate() const {
  if (retina_width < 1 || retina_height < 1) {
    throw ConfigError("retina must be at least 1x1, got " +
                      std::to_string(retina_width) + "x" +
                      std::to_string(retina_height));
  }
  if (d_max < 0 || d_max > retina_width - 1) {
    throw ConfigError("d_max " + std::to_string(d_max) + " outside [0, " +
                      std::to_string(retina_width - 1) + "]");
  }
  const auto& w = weights;
  for (double v : {w.retina_to_coinc, w.coinc_to_disp_exc, w.coinc_to_disp_inh,
                   w.disp_recurrent}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("synaptic weights must be positive and finite");
    }
  }
  if (continuity_radius && *continuity_radius < 0) {
    throw ConfigError("continuity_radius must be non-negative");
  }
}

Topology Topology::build(const TopologyParams& params) {
  params.validate();
  Topology t;
  t.params_ = params;
  const int w = params.retina_width;
  const int h = params.retina_height;
  const int dm = params.d_max;

  t.block_start_.resize(static_cast<std::size_t>(2 * dm + 2));
  for (int d = -dm; d <= dm; ++d) {
    t.block_start_[static_cast<std::size_t>(d + dm)] = t.triplets_.size();
    const int xl_begin = std::max(0, -d);
    const int xl_end = std::min(w, w - d);
    for (int y = 0; y < h; ++y) {
      for (int xl = xl_begin; xl < xl_end; ++xl) {
        t.triplets_.push_back(NeuronCoord::from_pair(xl, xl + d, y));
      }
    }
  }
  t.block_start_.back() = t.triplets_.size();

  const std::size_t retina = static_cast<std::size_t>(w) *
                             static_cast<std::size_t>(h) *
                             static_cast<std::size_t>(t.retina_channels());
  const std::size_t n = t.triplets_.size();
  const std::array<std::size_t, kPopulationCount> sizes{retina, retina, n, n, n};
  NeuronId next = 0;
  for (std::size_t i = 0; i < kPopulationCount; ++i) {
    t.ranges_[i] = IdRange{next, sizes[i]};
    next += static_cast<NeuronId>(sizes[i]);
  }
  t.neuron_count_ = next;

  const auto& wt = params.weights;
  const auto c_exc = t.range(Population::CoincExc);
  const auto c_inh = t.range(Population::CoincInh);
  const auto disp = t.range(Population::Disparity);
  auto& syn = t.synapses_;
  t.offsets_.assign(t.neuron_count_ + 1, 0);

  // Index triplets per row for the line-of-sight and cyclopean lookups.
  // by_left[y][x] / by_right[y][x] / by_cyc[y][x_cyc] / by_disp[y][d] hold
  // triplet indices in ascending order.
  const auto W = static_cast<std::size_t>(w);
  const auto H = static_cast<std::size_t>(h);
  std::vector<std::vector<std::size_t>> by_left(H * W), by_right(H * W),
      by_cyc(H * (2 * W)), by_disp(H * static_cast<std::size_t>(2 * dm + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = t.triplets_[i];
    const auto y = static_cast<std::size_t>(c.y);
    by_left[y * W + static_cast<std::size_t>(c.x_left())].push_back(i);
    by_right[y * W + static_cast<std::size_t>(c.x_right())].push_back(i);
    by_cyc[y * 2 * W + static_cast<std::size_t>(c.x_cyc)].push_back(i);
    by_disp[y * static_cast<std::size_t>(2 * dm + 1) +
            static_cast<std::size_t>(c.d + dm)]
        .push_back(i);
  }

  auto close = [&](NeuronId pre) { t.offsets_[pre + 1] = syn.size(); };

  // R1: retina -> coincidence twins. Posts ascend: all C_exc before C_inh.
  for (auto side_pop : {Population::RetinaLeft, Population::RetinaRight}) {
    const auto r = t.range(side_pop);
    for (std::size_t k = 0; k < r.count; ++k) {
      const NeuronId pre = r.first + static_cast<NeuronId>(k);
      const auto px = t.retina_pixel_of(pre);
      const auto& targets =
          (px.side == Side::Left ? by_left : by_right)[static_cast<std::size_t>(px.y) * W +
                                                       static_cast<std::size_t>(px.x)];
      for (auto base : {c_exc.first, c_inh.first}) {
        for (auto i : targets) {
          syn.push_back(Synapse{pre, base + static_cast<NeuronId>(i),
                                wt.retina_to_coinc, SynapseSign::Excitatory,
                                SynapseKind::Feedforward});
        }
      }
      close(pre);
    }
  }

  // R3: C_exc (., y, d) -> D (., y, d).
  for (std::size_t i = 0; i < n; ++i) {
    const NeuronId pre = c_exc.first + static_cast<NeuronId>(i);
    const auto& c = t.triplets_[i];
    const auto& row = by_disp[static_cast<std::size_t>(c.y) *
                                  static_cast<std::size_t>(2 * dm + 1) +
                              static_cast<std::size_t>(c.d + dm)];
    for (auto j : row) {
      if (params.continuity_radius &&
          std::abs(t.triplets_[j].x_left() - c.x_left()) > *params.continuity_radius) {
        continue;
      }
      syn.push_back(Synapse{pre, disp.first + static_cast<NeuronId>(j),
                            wt.coinc_to_disp_exc, SynapseSign::Excitatory,
                            SynapseKind::Feedforward});
    }
    close(pre);
  }

  // R2: C_inh (x_cyc, y, .) -| D (x_cyc, y, .).
  for (std::size_t i = 0; i < n; ++i) {
    const NeuronId pre = c_inh.first + static_cast<NeuronId>(i);
    const auto& c = t.triplets_[i];
    for (auto j : by_cyc[static_cast<std::size_t>(c.y) * 2 * W +
                         static_cast<std::size_t>(c.x_cyc)]) {
      syn.push_back(Synapse{pre, disp.first + static_cast<NeuronId>(j),
                            wt.coinc_to_disp_inh, SynapseSign::Inhibitory,
                            SynapseKind::Feedforward});
    }
    close(pre);
  }

  // R4: D -| D sharing x_L or x_R in the same row.
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < n; ++i) {
    const NeuronId pre = disp.first + static_cast<NeuronId>(i);
    const auto& c = t.triplets_[i];
    const auto y = static_cast<std::size_t>(c.y);
    const auto& a = by_left[y * W + static_cast<std::size_t>(c.x_left())];
    const auto& b = by_right[y * W + static_cast<std::size_t>(c.x_right())];
    targets.clear();
    std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                   std::back_inserter(targets));
    for (auto j : targets) {
      if (j == i) continue;
      syn.push_back(Synapse{pre, disp.first + static_cast<NeuronId>(j),
                            wt.disp_recurrent, SynapseSign::Inhibitory,
                            SynapseKind::Recurrent});
    }
    close(pre);
  }

  // Neurons without efferents inherit the previous offset.
  for (std::size_t i = 1; i < t.offsets_.size(); ++i) {
    t.offsets_[i] = std::max(t.offsets_[i], t.offsets_[i - 1]);
  }
  return t;
}

Population Topology::population_of(NeuronId id) const {
  for (std::size_t i = 0; i < kPopulationCount; ++i) {
    if (ranges_[i].contains(id)) return static_cast<Population>(i);
  }
  throw ConfigError("unknown neuron id " + std::to_string(id));
}

NeuronCoord Topology::coord_of(NeuronId id) const {
  const auto p = population_of(id);
  if (is_retina(p)) {
    throw ConfigError("neuron " + std::to_string(id) +
                      " is a retina neuron and has no binocular coordinate");
  }
  return triplets_[id - range(p).first];
}

RetinaPixel Topology::retina_pixel_of(NeuronId id) const {
  const auto p = population_of(id);
  if (!is_retina(p)) {
    throw ConfigError("neuron " + std::to_string(id) + " is not a retina neuron");
  }
  const std::size_t k = id - range(p).first;
  const auto ch = static_cast<std::size_t>(retina_channels());
  const std::size_t pixel = k / ch;
  const auto W = static_cast<std::size_t>(params_.retina_width);
  return RetinaPixel{static_cast<int>(pixel % W), static_cast<int>(pixel / W),
                     p == Population::RetinaLeft ? Side::Left : Side::Right,
                     static_cast<int>(k % ch)};
}

std::optional<std::size_t> Topology::triplet_index(const NeuronCoord& c) const {
  const int dm = params_.d_max;
  if (c.d < -dm || c.d > dm) return std::nullopt;
  if (!c.valid_for(params_.retina_width, params_.retina_height)) return std::nullopt;
  const int per_row = params_.retina_width - std::abs(c.d);
  const int xl_begin = std::max(0, -c.d);
  return block_start_[static_cast<std::size_t>(c.d + dm)] +
         static_cast<std::size_t>(c.y * per_row + (c.x_left() - xl_begin));
}

std::optional<NeuronId> Topology::find(Population p,
                                       const NeuronCoord& coord) const {
  if (is_retina(p)) return std::nullopt;
  const auto idx = triplet_index(coord);
  if (!idx) return std::nullopt;
  return range(p).first + static_cast<NeuronId>(*idx);
}

NeuronId Topology::id_of(Population p, const NeuronCoord& coord) const {
  const auto id = find(p, coord);
  if (!id) {
    throw ConfigError("coordinate (x_cyc=" + std::to_string(coord.x_cyc) +
                      ", y=" + std::to_string(coord.y) +
                      ", d=" + std::to_string(coord.d) + ") not in " +
                      std::string(to_string(p)));
  }
  return *id;
}

NeuronId Topology::retina_id(const RetinaPixel& px) const {
  if (px.x < 0 || px.y < 0 || px.x >= params_.retina_width ||
      px.y >= params_.retina_height || px.channel < 0 ||
      px.channel >= retina_channels()) {
    throw ConfigError("retina pixel (" + std::to_string(px.x) + "," +
                      std::to_string(px.y) + ") outside the retina");
  }
  const auto r = range(px.side == Side::Left ? Population::RetinaLeft
                                             : Population::RetinaRight);
  const auto k = (static_cast<std::size_t>(px.y) *
                      static_cast<std::size_t>(params_.retina_width) +
                  static_cast<std::size_t>(px.x)) *
                     static_cast<std::size_t>(retina_channels()) +
                 static_cast<std::size_t>(px.channel);
  return r.first + static_cast<NeuronId>(k);
}

NeuronId Topology::retina_id_for(const DvsEvent& e) const {
  const int channel =
      params_.polarity_channels ? (e.polarity == Polarity::On ? 1 : 0) : 0;
  return retina_id(RetinaPixel{e.x, e.y, e.side, channel});
}

std::span<const Synapse> Topology::efferents(NeuronId id) const {
  if (id >= neuron_count_) {
    throw ConfigError("unknown neuron id " + std::to_string(id));
  }
  return std::span<const Synapse>(synapses_).subspan(
      offsets_[id], offsets_[id + 1] - offsets_[id]);
}

std::vector<std::size_t> Topology::fan_in_counts() const {
  std::vector<std::size_t> fan_in(neuron_count_, 0);
  for (const auto& s : synapses_) ++fan_in[s.post];
  return fan_in;
}

std::uint64_t HardwareLimits::neuron_budget() const noexcept {
  std::uint64_t total = 1;
  for (auto f : {neurons_per_core, cores_per_chip, chips}) {
    if (f == kUnlimited || (f != 0 && total > kUnlimited / f)) return kUnlimited;
    total *= f;
  }
  return total;
}

ConstraintReport check_hardware_constraints(const Topology& topology,
                                            const HardwareLimits& limits) {
  ConstraintReport report;
  report.limits = limits;
  const auto fan_in = topology.fan_in_counts();
  for (NeuronId id = 0; id < fan_in.size(); ++id) {
    if (is_retina(topology.population_of(id))) continue;
    report.max_fan_in_observed = std::max(report.max_fan_in_observed, fan_in[id]);
    if (fan_in[id] > limits.max_fan_in) report.fan_in_violations.push_back(id);
  }
  report.neurons_required =
      topology.range(Population::CoincExc).count +
      topology.range(Population::CoincInh).count +
      topology.range(Population::Disparity).count;
  report.neurons_available = limits.neuron_budget();
  return report;
}

std::optional<int> largest_d_max_within(TopologyParams params,
                                        const HardwareLimits& limits) {
  for (int d = params.retina_width - 1; d >= 0; --d) {
    params.d_max = d;
    if (check_hardware_constraints(Topology::build(params), limits).passed()) {
      return d;
    }
  }
  return std::nullopt;
}

namespace {

nlohmann::json limit_json(std::uint64_t v) {
  if (v == HardwareLimits::kUnlimited) return nullptr;
  return v;
}

}  // namespace

std::string topology_to_json(const Topology& t) {
  using nlohmann::json;
  const auto& p = t.params();
  json j;
  j["retina"] = {{"width", p.retina_width},
                 {"height", p.retina_height},
                 {"channels", t.retina_channels()}};
  j["d_max"] = p.d_max;
  j["continuity_radius"] =
      p.continuity_radius ? json(*p.continuity_radius) : json(nullptr);
  j["weights"] = {{"w_rc", p.weights.retina_to_coinc},
                  {"w_ce", p.weights.coinc_to_disp_exc},
                  {"w_ci", p.weights.coinc_to_disp_inh},
                  {"w_dd", p.weights.disp_recurrent}};
  json populations = json::object();
  for (auto pop : kAllPopulations) {
    populations[std::string(to_string(pop))] = {{"first_id", t.range(pop).first},
                                                {"count", t.range(pop).count}};
  }
  j["populations"] = populations;
  json neurons = json::array();
  for (NeuronId id = 0; id < t.neuron_count(); ++id) {
    const auto pop = t.population_of(id);
    json n = {{"id", id}, {"population", std::string(to_string(pop))}};
    if (is_retina(pop)) {
      const auto px = t.retina_pixel_of(id);
      n["x"] = px.x;
      n["y"] = px.y;
      n["channel"] = px.channel;
    } else {
      const auto c = t.coord_of(id);
      n["x_cyc"] = c.x_cyc;
      n["y"] = c.y;
      n["d"] = c.d;
      n["x_left"] = c.x_left();
      n["x_right"] = c.x_right();
    }
    neurons.push_back(std::move(n));
  }
  j["neurons"] = std::move(neurons);
  // [pre, post, sign, weight, kind]
  json synapses = json::array();
  for (const auto& s : t.synapses()) {
    synapses.push_back({s.pre, s.post,
                        s.sign == SynapseSign::Excitatory ? "EXC" : "INH",
                        s.weight,
                        s.kind == SynapseKind::Feedforward ? "FEEDFORWARD"
                                                           : "RECURRENT"});
  }
  j["synapses"] = std::move(synapses);
  return j.dump();
}

std::string constraint_report_to_json(const ConstraintReport& r) {
  nlohmann::json j;
  j["limits"] = {{"max_fan_in", limit_json(r.limits.max_fan_in)},
                 {"neurons_per_core", limit_json(r.limits.neurons_per_core)},
                 {"cores_per_chip", limit_json(r.limits.cores_per_chip)},
                 {"chips", limit_json(r.limits.chips)}};
  j["max_fan_in_observed"] = r.max_fan_in_observed;
  j["fan_in_ok"] = r.fan_in_ok();
  j["fan_in_violations"] = r.fan_in_violations;
  j["neurons_required"] = r.neurons_required;
  j["neurons_available"] = limit_json(r.neurons_available);
  j["budget_ok"] = r.budget_ok();
  j["passed"] = r.passed();
  return j.dump(2);
}

}  // namespace stereosnn
