#include "stereosnn/metrics.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"
#include "stereosnn/error.hpp"
#include "stereosnn/io.hpp"

namespace stereosnn {

ComTrace center_of_mass(const RateMatrix& rates, std::span<const int> disparities) {
  if (disparities.size() != rates.neuron_count()) {
    throw ConfigError("disparity table size does not match the rate matrix");
  }
  ComTrace trace;
  trace.population = rates.population();
  trace.window = rates.window();
  trace.com.resize(rates.window_count());
  // Rates share one window length, so weighting by counts is exact.
  for (std::size_t w = 0; w < rates.window_count(); ++w) {
    long long num = 0, den = 0;
    for (std::size_t n = 0; n < rates.neuron_count(); ++n) {
      const long long c = rates.count(n, w);
      if (c == 0) continue;
      num += c * disparities[n];
      den += c;
    }
    if (den > 0) {
      trace.com[w] = static_cast<double>(num) / static_cast<double>(den);
    }
  }
  return trace;
}

ComTrace center_of_mass(const RateMatrix& rates, const Topology& topology) {
  const auto tri = topology.triplets();
  std::vector<int> d(rates.neuron_count());
  for (std::size_t n = 0; n < d.size(); ++n) d[n] = tri[n].d;
  return center_of_mass(rates, d);
}

double rmse(std::span<const std::optional<double>> a,
            std::span<const std::optional<double>> b) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (!a[i] || !b[i]) continue;
    const double e = *a[i] - *b[i];
    sum += e * e;
    ++n;
  }
  if (n == 0) throw ConfigError("no window where both series are defined");
  return std::sqrt(sum / static_cast<double>(n));
}

double rmse(const ComTrace& com, const DisparityTrace& gt) {
  if (com.window != gt.window) {
    throw ConfigError("CoM and ground-truth windows differ");
  }
  std::vector<std::optional<double>> d(gt.windows.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (gt.windows[i].defined()) d[i] = gt.windows[i].d_mean;
  }
  return rmse(com.com, d);
}

std::size_t SpikeLabelCounts::total_td() const noexcept {
  std::size_t s = 0;
  for (const auto& w : windows) s += w.td;
  return s;
}

std::size_t SpikeLabelCounts::total_fd() const noexcept {
  std::size_t s = 0;
  for (const auto& w : windows) s += w.fd;
  return s;
}

SpikeLabelCounts label_spikes(const SpikeRecord& record, const Topology& topology,
                              const DisparityTrace& gt, double epsilon_d,
                              Population population) {
  if (!(epsilon_d >= 0.0)) throw ConfigError("epsilon_d must be >= 0");
  if (gt.window <= 0) throw ConfigError("ground-truth window must be positive");
  if (is_retina(population)) {
    throw ConfigError("retina spikes carry no disparity");
  }
  SpikeLabelCounts counts;
  counts.population = population;
  counts.epsilon_d = epsilon_d;
  counts.windows.resize(gt.windows.size());
  const auto range = topology.range(population);
  const auto tri = topology.triplets();
  for (const auto& s : record.spikes) {
    if (!range.contains(s.neuron)) continue;
    const auto w = static_cast<std::size_t>(s.t / gt.window);
    if (w >= gt.windows.size() || !gt.windows[w].defined()) continue;
    const double d = tri[s.neuron - range.first].d;
    const auto& g = gt.windows[w];
    if (d >= g.d_min - epsilon_d && d <= g.d_max + epsilon_d) {
      ++counts.windows[w].td;
    } else {
      ++counts.windows[w].fd;
    }
  }
  return counts;
}

std::string_view to_string(PcdMode mode) {
  return mode == PcdMode::Global ? "global" : "per-window-mean";
}

PcdMode pcd_mode_from_string(std::string_view name) {
  if (name == "global") return PcdMode::Global;
  if (name == "per-window-mean") return PcdMode::PerWindowMean;
  throw ConfigError("unknown PCD mode '" + std::string(name) + "'");
}

double pcd(const SpikeLabelCounts& counts, PcdMode mode) {
  if (mode == PcdMode::Global) {
    const std::size_t td = counts.total_td();
    const std::size_t all = td + counts.total_fd();
    if (all == 0) throw ConfigError("PCD undefined: no labelled spikes");
    return static_cast<double>(td) / static_cast<double>(all);
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& w : counts.windows) {
    if (w.td + w.fd == 0) continue;
    sum += static_cast<double>(w.td) / static_cast<double>(w.td + w.fd);
    ++n;
  }
  if (n == 0) throw ConfigError("PCD undefined: no labelled spikes");
  return sum / static_cast<double>(n);
}

double estimate_energy_uw(const EnergyCounts& c, const EnergyCoefficients& k,
                          Timestamp duration) {
  if (duration <= 0) throw ConfigError("energy estimate needs a positive duration");
  const double joules = k.input_event_j * static_cast<double>(c.input_events) +
                        k.spike_j * static_cast<double>(c.spikes) +
                        k.synaptic_event_j * static_cast<double>(c.synaptic_deliveries);
  // J / us = 1e6 W = 1e12 uW.
  return joules / static_cast<double>(duration) * 1e12;
}

double estimate_energy_uw(const SpikeRecord& record, std::size_t input_events,
                          const EnergyCoefficients& coefficients) {
  return estimate_energy_uw(
      EnergyCounts{input_events, record.spikes.size(), record.synaptic_deliveries},
      coefficients, record.duration);
}

namespace {

PopulationMetrics population_metrics(const ReportInputs& in, Population pop,
                                     std::size_t windows) {
  PopulationMetrics m;
  m.population = pop;
  const auto rates =
      instantaneous_rates(*in.record, *in.topology, in.window, pop, windows);
  m.com = center_of_mass(rates, *in.topology);
  m.labels = label_spikes(*in.record, *in.topology, *in.ground_truth, in.epsilon_d, pop);
  m.spikes = in.record->count(pop);
  try {
    m.rmse = rmse(m.com, *in.ground_truth);
  } catch (const ConfigError&) {
    m.rmse.reset();
  }
  try {
    m.pcd = pcd(m.labels, in.pcd_mode);
  } catch (const ConfigError&) {
    m.pcd.reset();
  }
  return m;
}

bool same_com(const ComTrace& a, const ComTrace& b) {
  return a.population == b.population && a.window == b.window && a.com == b.com;
}

bool same_labels(const SpikeLabelCounts& a, const SpikeLabelCounts& b) {
  if (a.population != b.population || a.epsilon_d != b.epsilon_d ||
      a.windows.size() != b.windows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.windows.size(); ++i) {
    if (a.windows[i].td != b.windows[i].td || a.windows[i].fd != b.windows[i].fd) {
      return false;
    }
  }
  return true;
}

bool same_population(const PopulationMetrics& a, const PopulationMetrics& b) {
  return a.population == b.population && same_com(a.com, b.com) &&
         same_labels(a.labels, b.labels) && a.rmse == b.rmse && a.pcd == b.pcd &&
         a.spikes == b.spikes;
}

}  // namespace

bool operator==(const MetricsReport& a, const MetricsReport& b) {
  return a.sample_label == b.sample_label && a.window == b.window &&
         a.epsilon_d == b.epsilon_d && a.pcd_mode == b.pcd_mode &&
         same_population(a.disparity, b.disparity) &&
         same_population(a.coincidence, b.coincidence) &&
         a.energy_counts.input_events == b.energy_counts.input_events &&
         a.energy_counts.spikes == b.energy_counts.spikes &&
         a.energy_counts.synaptic_deliveries == b.energy_counts.synaptic_deliveries &&
         a.energy_coefficients.input_event_j == b.energy_coefficients.input_event_j &&
         a.energy_coefficients.spike_j == b.energy_coefficients.spike_j &&
         a.energy_coefficients.synaptic_event_j ==
             b.energy_coefficients.synaptic_event_j &&
         a.energy_uw == b.energy_uw && a.duration == b.duration &&
         a.config_json == b.config_json;
}

MetricsReport build_report(const ReportInputs& in) {
  if (!in.record || !in.topology || !in.ground_truth) {
    throw ConfigError("report inputs incomplete");
  }
  if (in.ground_truth->window != in.window) {
    throw ConfigError("ground-truth window " +
                      std::to_string(in.ground_truth->window) +
                      " us differs from analysis window " +
                      std::to_string(in.window) + " us");
  }
  const std::size_t windows = in.ground_truth->windows.size();
  MetricsReport r;
  r.sample_label = in.sample_label;
  r.window = in.window;
  r.epsilon_d = in.epsilon_d;
  r.pcd_mode = in.pcd_mode;
  r.disparity = population_metrics(in, Population::Disparity, windows);
  // Coincidence twins receive identical drive; the excitatory copy stands for C.
  r.coincidence = population_metrics(in, Population::CoincExc, windows);
  r.energy_counts = EnergyCounts{in.record->input_events, in.record->spikes.size(),
                                 in.record->synaptic_deliveries};
  r.energy_coefficients = in.energy;
  r.duration = std::max<Timestamp>(
      in.record->duration, static_cast<Timestamp>(windows) * in.window);
  r.energy_uw = estimate_energy_uw(r.energy_counts, r.energy_coefficients, r.duration);
  r.config_json = in.config_json;
  return r;
}

namespace {

using nlohmann::json;

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json population_json(const PopulationMetrics& m) {
  json com = json::array();
  for (const auto& c : m.com.com) com.push_back(optional_json(c));
  json labels = json::array();
  for (const auto& w : m.labels.windows) labels.push_back({w.td, w.fd});
  return json{{"population", std::string(to_string(m.population))},
              {"rmse", optional_json(m.rmse)},
              {"pcd", optional_json(m.pcd)},
              {"spikes", m.spikes},
              {"td", m.labels.total_td()},
              {"fd", m.labels.total_fd()},
              {"com", std::move(com)},
              {"labels", std::move(labels)}};
}

PopulationMetrics population_from(const json& j, Timestamp window, double eps) {
  PopulationMetrics m;
  m.population = population_from_string(j.at("population").get<std::string>());
  m.rmse = optional_from(j.at("rmse"));
  m.pcd = optional_from(j.at("pcd"));
  m.spikes = j.at("spikes").get<std::size_t>();
  m.com.population = m.population;
  m.com.window = window;
  for (const auto& c : j.at("com")) m.com.com.push_back(optional_from(c));
  m.labels.population = m.population;
  m.labels.epsilon_d = eps;
  for (const auto& w : j.at("labels")) {
    m.labels.windows.push_back(
        WindowLabels{w.at(0).get<std::size_t>(), w.at(1).get<std::size_t>()});
  }
  return m;
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
  json j;
  j["sample_label"] = r.sample_label;
  j["window_us"] = r.window;
  j["epsilon_d"] = r.epsilon_d;
  j["pcd_mode"] = std::string(to_string(r.pcd_mode));
  j["duration_us"] = r.duration;
  j["headline"] = {{"population", "DISPARITY"},
                   {"pcd", optional_json(r.disparity.pcd)},
                   {"rmse", optional_json(r.disparity.rmse)},
                   {"energy_uw", r.energy_uw}};
  j["disparity"] = population_json(r.disparity);
  j["coincidence"] = population_json(r.coincidence);
  j["energy"] = {{"estimate_uw", r.energy_uw},
                 {"input_events", r.energy_counts.input_events},
                 {"spikes", r.energy_counts.spikes},
                 {"synaptic_deliveries", r.energy_counts.synaptic_deliveries},
                 {"coefficients_j",
                  {{"input_event", r.energy_coefficients.input_event_j},
                   {"spike", r.energy_coefficients.spike_j},
                   {"synaptic_event", r.energy_coefficients.synaptic_event_j}}}};
  j["config"] = r.config_json.empty() ? json(nullptr) : json::parse(r.config_json);
  return j.dump(2);
}

MetricsReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
  try {
    MetricsReport r;
    r.sample_label = j.at("sample_label").get<std::string>();
    r.window = j.at("window_us").get<Timestamp>();
    r.epsilon_d = j.at("epsilon_d").get<double>();
    r.pcd_mode = pcd_mode_from_string(j.at("pcd_mode").get<std::string>());
    r.duration = j.at("duration_us").get<Timestamp>();
    r.disparity = population_from(j.at("disparity"), r.window, r.epsilon_d);
    r.coincidence = population_from(j.at("coincidence"), r.window, r.epsilon_d);
    const auto& e = j.at("energy");
    r.energy_uw = e.at("estimate_uw").get<double>();
    r.energy_counts = EnergyCounts{e.at("input_events").get<std::size_t>(),
                                   e.at("spikes").get<std::size_t>(),
                                   e.at("synaptic_deliveries").get<std::size_t>()};
    const auto& k = e.at("coefficients_j");
    r.energy_coefficients =
        EnergyCoefficients{k.at("input_event").get<double>(),
                           k.at("spike").get<double>(),
                           k.at("synaptic_event").get<double>()};
    const auto& cfg = j.at("config");
    r.config_json = cfg.is_null() ? std::string() : cfg.dump();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
}

void write_com_csv(std::ostream& out, const MetricsReport& r,
                   const DisparityTrace& gt) {
  out << "window_i,t_center_us,com_c,com_d,d_mean,d_min,d_max\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
  };
  for (std::size_t i = 0; i < gt.windows.size(); ++i) {
    const auto& g = gt.windows[i];
    out << i << ',' << g.t_center << ',';
    out << (i < r.coincidence.com.com.size() ? opt(r.coincidence.com.com[i]) : "")
        << ',';
    out << (i < r.disparity.com.com.size() ? opt(r.disparity.com.com[i]) : "")
        << ',';
    if (g.defined()) {
      out << format_real(g.d_mean) << ',' << format_real(g.d_min) << ','
          << format_real(g.d_max) << '\n';
    } else {
      out << ",,\n";
    }
  }
}

}  // namespace stereosnn
