#include "stereosnn/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string_view>

#include "json.hpp"
#include "stereosnn/error.hpp"
#include "stereosnn/io.hpp"

namespace stereosnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

template <class T>
T as(const json& v, const std::string& name) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(name + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(name + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(name + ": expected a number");
    } else {
      if (!v.is_string()) throw ConfigError(name + ": expected a string");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

template <class T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (const auto it = obj.find(key); it != obj.end()) out = as<T>(*it, join(where, key));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return fs::absolute(path.is_absolute() ? path : base / path).lexically_normal();
}

void read_path(const json& obj, const std::string& where, const char* key,
               const fs::path& base, std::optional<fs::path>& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  out = resolve(base, as<std::string>(*it, join(where, key)));
}

std::uint64_t read_limit(const json& v, const std::string& name) {
  if (v.is_null() || (v.is_string() && v.get<std::string>() == "inf")) {
    return HardwareLimits::kUnlimited;
  }
  const auto n = as<long long>(v, name);
  if (n < 0) throw ConfigError(name + ": must be >= 0");
  return static_cast<std::uint64_t>(n);
}

json write_limit(std::uint64_t v) {
  return v == HardwareLimits::kUnlimited ? json("inf") : json(v);
}

// --- sections ---------------------------------------------------------------

void parse_neuron(const json& j, const std::string& where, NeuronParams& n) {
  check_keys(j, where,
             {"tau_m_us", "tau_s_us", "threshold", "reset", "refractory_us", "v_min"});
  read(j, where, "tau_m_us", n.tau_m_us);
  read(j, where, "tau_s_us", n.tau_s_us);
  read(j, where, "threshold", n.threshold);
  read(j, where, "reset", n.reset);
  read(j, where, "refractory_us", n.refractory_us);
  read(j, where, "v_min", n.v_min);
}

json neuron_json(const NeuronParams& n) {
  return {{"tau_m_us", n.tau_m_us}, {"tau_s_us", n.tau_s_us},
          {"threshold", n.threshold}, {"reset", n.reset},
          {"refractory_us", n.refractory_us}, {"v_min", n.v_min}};
}

// Fields in which `over` differs from `base`, so a built-in population
// override follows a user-supplied base for everything it does not change.
json neuron_delta(const NeuronParams& base, const NeuronParams& over) {
  json d = json::object();
  const json b = neuron_json(base), o = neuron_json(over);
  for (const auto& [k, v] : o.items()) {
    if (b[k] != v) d[k] = v;
  }
  return d;
}

void parse_lif(const json& j, LifParams& lif) {
  check_keys(j, "lif", {"base", "overrides"});
  const LifParams builtin = LifParams::defaults();
  lif.base = builtin.base;
  if (const auto it = j.find("base"); it != j.end()) {
    parse_neuron(*it, "lif.base", lif.base);
  }
  lif.overrides.clear();
  for (const auto& [pop, params] : builtin.overrides) {
    NeuronParams n = lif.base;
    parse_neuron(neuron_delta(builtin.base, params), "lif", n);
    lif.overrides[pop] = n;
  }
  const auto it = j.find("overrides");
  if (it == j.end()) return;
  if (!it->is_object()) throw ConfigError("lif.overrides: expected an object");
  auto apply = [&](Population p, const json& v, const std::string& where) {
    auto [slot, inserted] = lif.overrides.try_emplace(p, lif.base);
    (void)inserted;
    parse_neuron(v, where, slot->second);
  };
  // The RETINA alias first so a specific side can refine it.
  if (const auto r = it->find("RETINA"); r != it->end()) {
    apply(Population::RetinaLeft, *r, "lif.overrides.RETINA");
    apply(Population::RetinaRight, *r, "lif.overrides.RETINA");
  }
  for (const auto& [name, v] : it->items()) {
    if (name == "RETINA") continue;
    Population p;
    try {
      p = population_from_string(name);
    } catch (const Error&) {
      throw ConfigError("lif.overrides: unknown population '" + name + "'");
    }
    apply(p, v, "lif.overrides." + name);
  }
}

json lif_json(const LifParams& lif) {
  json o = json::object();
  for (const auto& [p, n] : lif.overrides) o[std::string(to_string(p))] = neuron_json(n);
  return {{"base", neuron_json(lif.base)}, {"overrides", o}};
}

PixelCoord read_coord(const json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(name + ": expected [x, y]");
  return {as<int>(v[0], name), as<int>(v[1], name)};
}

void parse_preprocess(const json& j, PreprocessConfig& p) {
  const std::string w = "preprocess";
  check_keys(j, w,
             {"mask_regions", "hot_pixel_filter", "hot_pixel_rate_factor",
              "background_filter", "background_window_us", "background_radius",
              "background_include_same_pixel", "downscale_factor", "crop_origin",
              "crop_size", "auto_crop"});
  if (const auto it = j.find("mask_regions"); it != j.end()) {
    if (!it->is_array()) throw ConfigError(w + ".mask_regions: expected an array");
    p.mask_regions.clear();
    for (const auto& r : *it) {
      const std::string rw = w + ".mask_regions[]";
      check_keys(r, rw, {"x", "y", "width", "height", "side"});
      PixelRect rect;
      read(r, rw, "x", rect.x);
      read(r, rw, "y", rect.y);
      read(r, rw, "width", rect.width);
      read(r, rw, "height", rect.height);
      if (const auto s = r.find("side"); s != r.end() && !s->is_null()) {
        const auto name = as<std::string>(*s, rw + ".side");
        if (name == "L") rect.side = Side::Left;
        else if (name == "R") rect.side = Side::Right;
        else throw ConfigError(rw + ".side: expected \"L\" or \"R\"");
      }
      p.mask_regions.push_back(rect);
    }
  }
  read(j, w, "hot_pixel_filter", p.hot_pixel_filter);
  read(j, w, "hot_pixel_rate_factor", p.hot_pixel_rate_factor);
  read(j, w, "background_filter", p.background_filter);
  read(j, w, "background_window_us", p.background_window);
  read(j, w, "background_radius", p.background_radius);
  read(j, w, "background_include_same_pixel", p.background_include_same_pixel);
  read(j, w, "downscale_factor", p.downscale_factor);
  if (const auto it = j.find("crop_origin"); it != j.end()) {
    if (it->is_null()) p.crop_origin.reset();
    else p.crop_origin = read_coord(*it, w + ".crop_origin");
  }
  if (const auto it = j.find("crop_size"); it != j.end()) {
    const auto c = read_coord(*it, w + ".crop_size");
    p.crop_size = {c.x, c.y};
  }
  read(j, w, "auto_crop", p.auto_crop);
}

json preprocess_json(const PreprocessConfig& p) {
  json masks = json::array();
  for (const auto& r : p.mask_regions) {
    masks.push_back({{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height},
                     {"side", r.side ? json(std::string(to_string(*r.side)))
                                     : json(nullptr)}});
  }
  return {{"mask_regions", masks},
          {"hot_pixel_filter", p.hot_pixel_filter},
          {"hot_pixel_rate_factor", p.hot_pixel_rate_factor},
          {"background_filter", p.background_filter},
          {"background_window_us", p.background_window},
          {"background_radius", p.background_radius},
          {"background_include_same_pixel", p.background_include_same_pixel},
          {"downscale_factor", p.downscale_factor},
          {"crop_origin", p.crop_origin
                              ? json::array({p.crop_origin->x, p.crop_origin->y})
                              : json(nullptr)},
          {"crop_size", json::array({p.crop_size.width, p.crop_size.height})},
          {"auto_crop", p.auto_crop}};
}

struct TopologyPresence {
  bool width = false;
  bool height = false;
};

TopologyPresence parse_topology(const json& j, RunConfig& c) {
  const std::string w = "topology";
  check_keys(j, w,
             {"retina_width", "retina_height", "d_max", "weights", "continuity_radius",
              "polarity_channels", "limits", "hardware_budget"});
  auto& t = c.topology;
  TopologyPresence seen{j.contains("retina_width"), j.contains("retina_height")};
  read(j, w, "retina_width", t.retina_width);
  read(j, w, "retina_height", t.retina_height);
  read(j, w, "d_max", t.d_max);
  if (const auto it = j.find("weights"); it != j.end()) {
    const std::string ww = w + ".weights";
    check_keys(*it, ww, {"w_rc", "w_ce", "w_ci", "w_dd"});
    read(*it, ww, "w_rc", t.weights.retina_to_coinc);
    read(*it, ww, "w_ce", t.weights.coinc_to_disp_exc);
    read(*it, ww, "w_ci", t.weights.coinc_to_disp_inh);
    read(*it, ww, "w_dd", t.weights.disp_recurrent);
  }
  if (const auto it = j.find("continuity_radius"); it != j.end()) {
    if (it->is_null()) t.continuity_radius.reset();
    else t.continuity_radius = as<int>(*it, w + ".continuity_radius");
  }
  read(j, w, "polarity_channels", t.polarity_channels);
  if (const auto it = j.find("limits"); it != j.end()) {
    const std::string lw = w + ".limits";
    if (it->is_string() && it->get<std::string>() == "inf") {
      c.limits = HardwareLimits::unlimited();
    } else {
      check_keys(*it, lw, {"max_fan_in", "neurons_per_core", "cores_per_chip", "chips"});
      auto lim = [&](const char* key, std::uint64_t& out) {
        if (const auto v = it->find(key); v != it->end()) out = read_limit(*v, join(lw, key));
      };
      lim("max_fan_in", c.limits.max_fan_in);
      lim("neurons_per_core", c.limits.neurons_per_core);
      lim("cores_per_chip", c.limits.cores_per_chip);
      lim("chips", c.limits.chips);
    }
  }
  read(j, w, "hardware_budget", c.hardware_budget);
  return seen;
}

json topology_json(const RunConfig& c) {
  const auto& t = c.topology;
  return {{"retina_width", t.retina_width},
          {"retina_height", t.retina_height},
          {"d_max", t.d_max},
          {"weights",
           {{"w_rc", t.weights.retina_to_coinc},
            {"w_ce", t.weights.coinc_to_disp_exc},
            {"w_ci", t.weights.coinc_to_disp_inh},
            {"w_dd", t.weights.disp_recurrent}}},
          {"continuity_radius",
           t.continuity_radius ? json(*t.continuity_radius) : json(nullptr)},
          {"polarity_channels", t.polarity_channels},
          {"limits",
           {{"max_fan_in", write_limit(c.limits.max_fan_in)},
            {"neurons_per_core", write_limit(c.limits.neurons_per_core)},
            {"cores_per_chip", write_limit(c.limits.cores_per_chip)},
            {"chips", write_limit(c.limits.chips)}}},
          {"hardware_budget", c.hardware_budget}};
}

SyntheticInput parse_synthetic(const json& j, std::uint64_t default_seed) {
  const std::string w = "input.synthetic";
  check_keys(j, w,
             {"shape", "knots", "anchor", "extent", "dots_per_row", "min_dot_spacing",
              "rate_hz", "jitter_us", "seed", "duration_us"});
  SyntheticInput s;
  auto& p = s.profile;
  p.seed = default_seed;
  if (const auto it = j.find("shape"); it != j.end()) {
    p.shape = shape_from_string(as<std::string>(*it, w + ".shape"));
  }
  if (const auto it = j.find("knots"); it != j.end()) {
    if (!it->is_array()) throw ConfigError(w + ".knots: expected [[t_us, d], ...]");
    p.knots.clear();
    for (const auto& k : *it) {
      if (!k.is_array() || k.size() != 2) {
        throw ConfigError(w + ".knots: expected [[t_us, d], ...]");
      }
      p.knots.push_back({as<Timestamp>(k[0], w + ".knots[].t"),
                         as<double>(k[1], w + ".knots[].d")});
    }
  }
  if (const auto it = j.find("anchor"); it != j.end()) {
    p.anchor = read_coord(*it, w + ".anchor");
  }
  read(j, w, "extent", p.extent);
  read(j, w, "dots_per_row", p.dots_per_row);
  read(j, w, "min_dot_spacing", p.min_dot_spacing);
  read(j, w, "rate_hz", p.rate_hz);
  read(j, w, "jitter_us", p.jitter_us);
  read(j, w, "seed", p.seed);
  read(j, w, "duration_us", s.duration_us);
  return s;
}

json synthetic_json(const SyntheticInput& s) {
  const auto& p = s.profile;
  json knots = json::array();
  for (const auto& k : p.knots) knots.push_back(json::array({k.t, k.d}));
  return {{"shape", std::string(to_string(p.shape))},
          {"knots", knots},
          {"anchor", json::array({p.anchor.x, p.anchor.y})},
          {"extent", p.extent},
          {"dots_per_row", p.dots_per_row},
          {"min_dot_spacing", p.min_dot_spacing},
          {"rate_hz", p.rate_hz},
          {"jitter_us", p.jitter_us},
          {"seed", p.seed},
          {"duration_us", s.duration_us}};
}

void parse_input(const json& j, const fs::path& base, std::uint64_t seed,
                 InputConfig& in) {
  const std::string w = "input";
  check_keys(j, w,
             {"left_events", "right_events", "events", "synthetic", "geometry",
              "normalize_time", "ground_truth", "markers", "calibration",
              "sample_label"});
  read_path(j, w, "left_events", base, in.left_events);
  read_path(j, w, "right_events", base, in.right_events);
  read_path(j, w, "events", base, in.events);
  if (const auto it = j.find("synthetic"); it != j.end() && !it->is_null()) {
    in.synthetic = parse_synthetic(*it, seed);
  }
  if (const auto it = j.find("geometry"); it != j.end()) {
    check_keys(*it, w + ".geometry", {"width", "height"});
    read(*it, w + ".geometry", "width", in.geometry.width);
    read(*it, w + ".geometry", "height", in.geometry.height);
  }
  read(j, w, "normalize_time", in.normalize_time);
  read_path(j, w, "ground_truth", base, in.ground_truth);
  read_path(j, w, "markers", base, in.markers);
  read_path(j, w, "calibration", base, in.calibration);
  read(j, w, "sample_label", in.sample_label);
}

json path_json(const std::optional<fs::path>& p) {
  return p ? json(p->string()) : json(nullptr);
}

json input_json(const InputConfig& in) {
  return {{"left_events", path_json(in.left_events)},
          {"right_events", path_json(in.right_events)},
          {"events", path_json(in.events)},
          {"synthetic", in.synthetic ? synthetic_json(*in.synthetic) : json(nullptr)},
          {"geometry", {{"width", in.geometry.width}, {"height", in.geometry.height}}},
          {"normalize_time", in.normalize_time},
          {"ground_truth", path_json(in.ground_truth)},
          {"markers", path_json(in.markers)},
          {"calibration", path_json(in.calibration)},
          {"sample_label", in.sample_label}};
}

void parse_analysis(const json& j, AnalysisConfig& a) {
  const std::string w = "analysis";
  check_keys(j, w, {"window_us", "epsilon_d", "pcd_mode", "energy"});
  read(j, w, "window_us", a.window_us);
  read(j, w, "epsilon_d", a.epsilon_d);
  if (const auto it = j.find("pcd_mode"); it != j.end()) {
    a.pcd_mode = pcd_mode_from_string(as<std::string>(*it, w + ".pcd_mode"));
  }
  if (const auto it = j.find("energy"); it != j.end()) {
    const std::string ew = w + ".energy";
    check_keys(*it, ew, {"input_event_j", "spike_j", "synaptic_event_j"});
    read(*it, ew, "input_event_j", a.energy.input_event_j);
    read(*it, ew, "spike_j", a.energy.spike_j);
    read(*it, ew, "synaptic_event_j", a.energy.synaptic_event_j);
  }
}

json analysis_json(const AnalysisConfig& a) {
  return {{"window_us", a.window_us},
          {"epsilon_d", a.epsilon_d},
          {"pcd_mode", std::string(to_string(a.pcd_mode))},
          {"energy",
           {{"input_event_j", a.energy.input_event_j},
            {"spike_j", a.energy.spike_j},
            {"synaptic_event_j", a.energy.synaptic_event_j}}}};
}

// `a.b.c=value`; the value is JSON when it parses as JSON, else a string.
void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("--set: empty key in '" + path + "'");
    if (!node->is_object()) throw ConfigError("--set: '" + path + "' crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

void require_file(const std::optional<fs::path>& p, const char* key) {
  if (p && !fs::is_regular_file(*p)) {
    throw ConfigError(std::string("input.") + key + ": file not found: " + p->string());
  }
}

}  // namespace

void RunConfig::validate(bool check_input) const {
  const auto& in = input;
  topology.validate();
  lif.validate();
  if (mismatch.weight_jitter < 0.0 || mismatch.threshold_mismatch < 0.0) {
    throw ConfigError("simulation.mismatch: sigmas must be >= 0");
  }
  if (analysis.window_us <= 0) throw ConfigError("analysis.window_us must be positive");
  if (!(analysis.epsilon_d >= 0.0)) throw ConfigError("analysis.epsilon_d must be >= 0");
  const auto& e = analysis.energy;
  if (!(e.input_event_j >= 0.0) || !(e.spike_j >= 0.0) || !(e.synaptic_event_j >= 0.0)) {
    throw ConfigError("analysis.energy: coefficients must be >= 0");
  }
  if (!check_input) return;
  const int sources = (in.synthetic ? 1 : 0) + (in.events ? 1 : 0) +
                      ((in.left_events || in.right_events) ? 1 : 0);
  if (sources != 1) {
    throw ConfigError(
        "input: give exactly one of synthetic, events, or left_events + right_events");
  }
  if ((in.left_events.has_value()) != (in.right_events.has_value())) {
    throw ConfigError("input: left_events and right_events go together");
  }
  if (in.markers.has_value() != in.calibration.has_value()) {
    throw ConfigError("input: markers and calibration go together");
  }
  if (in.ground_truth && in.markers) {
    throw ConfigError("input: give ground_truth or markers + calibration, not both");
  }
  if (!in.synthetic && !in.ground_truth && !in.markers) {
    throw ConfigError("input: recorded input needs ground_truth or markers + calibration");
  }
  require_file(in.left_events, "left_events");
  require_file(in.right_events, "right_events");
  require_file(in.events, "events");
  require_file(in.ground_truth, "ground_truth");
  require_file(in.markers, "markers");
  require_file(in.calibration, "calibration");

  if (in.synthetic) {
    in.synthetic->profile.validate();
    if (in.synthetic->duration_us <= 0) {
      throw ConfigError("input.synthetic.duration_us must be positive");
    }
    // The knots bound the piecewise-linear profile.
    if (!hardware_budget) {
      for (const auto& k : in.synthetic->profile.knots) {
        if (std::abs(k.d) > static_cast<double>(topology.d_max)) {
          throw ConfigError("input.synthetic: |d| at t=" + std::to_string(k.t) +
                            " us exceeds topology.d_max");
        }
      }
    }
  } else {
    in.geometry.validate();
    preprocess.validate(in.geometry);
    if (topology.retina_width != preprocess.crop_size.width ||
        topology.retina_height != preprocess.crop_size.height) {
      throw ConfigError("topology retina size must equal preprocess.crop_size");
    }
  }
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir,
                           std::span<const std::string> overrides,
                           bool check_input) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) apply_override(root, o);
  check_keys(root, "config",
             {"input", "preprocess", "topology", "lif", "simulation", "analysis",
              "output", "seed"});

  RunConfig c;
  read(root, "", "seed", c.seed);
  c.mismatch.seed = c.seed;
  const json empty = json::object();
  auto section = [&](const char* key) -> const json& {
    const auto it = root.find(key);
    return it == root.end() ? empty : *it;
  };
  parse_input(section("input"), base_dir, c.seed, c.input);
  parse_preprocess(section("preprocess"), c.preprocess);
  const auto seen = parse_topology(section("topology"), c);
  parse_lif(section("lif"), c.lif);
  {
    const auto& s = section("simulation");
    check_keys(s, "simulation", {"mismatch"});
    if (const auto it = s.find("mismatch"); it != s.end()) {
      const std::string w = "simulation.mismatch";
      check_keys(*it, w, {"weight_jitter", "threshold_mismatch", "seed"});
      read(*it, w, "weight_jitter", c.mismatch.weight_jitter);
      read(*it, w, "threshold_mismatch", c.mismatch.threshold_mismatch);
      read(*it, w, "seed", c.mismatch.seed);
    }
  }
  parse_analysis(section("analysis"), c.analysis);
  {
    const auto& o = section("output");
    check_keys(o, "output", {"directory"});
    std::string dir = c.output_dir.string();
    read(o, "output", "directory", dir);
    c.output_dir = resolve(base_dir, dir);
  }
  // Recorded input feeds the crop window straight into the retina.
  if (!c.input.synthetic) {
    if (!seen.width) c.topology.retina_width = c.preprocess.crop_size.width;
    if (!seen.height) c.topology.retina_height = c.preprocess.crop_size.height;
  }
  c.validate(check_input);
  return c;
}

RunConfig load_run_config(const fs::path& path, std::span<const std::string> overrides,
                          bool check_input) {
  if (!fs::is_regular_file(path)) {
    throw ConfigError("config file not found: " + path.string());
  }
  const auto base = fs::absolute(path).parent_path();
  return parse_run_config(read_text_file(path), base, overrides, check_input);
}

TopologyConfig load_topology_config(const std::optional<fs::path>& path,
                                    std::span<const std::string> overrides) {
  json root = json::object();
  if (path) {
    if (!fs::is_regular_file(*path)) {
      throw ConfigError("config file not found: " + path->string());
    }
    root = json::parse(read_text_file(*path), nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
      throw ConfigError("config is not a JSON object");
    }
  }
  for (const auto& o : overrides) apply_override(root, o);
  RunConfig c;
  if (const auto it = root.find("topology"); it != root.end()) parse_topology(*it, c);
  c.topology.validate();
  return {c.topology, c.limits, c.hardware_budget};
}

std::string run_config_to_json(const RunConfig& c) {
  const json root = {
      {"input", input_json(c.input)},
      {"preprocess", preprocess_json(c.preprocess)},
      {"topology", topology_json(c)},
      {"lif", lif_json(c.lif)},
      {"simulation",
       {{"mismatch",
         {{"weight_jitter", c.mismatch.weight_jitter},
          {"threshold_mismatch", c.mismatch.threshold_mismatch},
          {"seed", c.mismatch.seed}}}}},
      {"analysis", analysis_json(c.analysis)},
      {"output", {{"directory", c.output_dir.string()}}},
      {"seed", c.seed}};
  return root.dump();
}

}  // namespace stereosnn::cli
