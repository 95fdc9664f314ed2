#include "stereosnn/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "stereosnn/cli/config.hpp"
#include "stereosnn/error.hpp"
#include "stereosnn/events.hpp"
#include "stereosnn/groundtruth.hpp"
#include "stereosnn/io.hpp"
#include "stereosnn/metrics.hpp"
#include "stereosnn/preprocess.hpp"
#include "stereosnn/simulator.hpp"
#include "stereosnn/synth.hpp"
#include "stereosnn/topology.hpp"

namespace stereosnn::cli {

namespace fs = std::filesystem;

namespace {

// Maps the active exception to an exit code and prints `cmd: stage: message`.
int fail(const std::string& cmd, const std::string& stage, std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << cmd << ": " << stage << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << cmd << ": " << stage << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << cmd << ": " << stage << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, [&](std::ostream& os) { os << text; });
}

std::string fmt(const std::optional<double>& v, int precision) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

Topology build_topology(const RunConfig& cfg) {
  TopologyParams tp = cfg.topology;
  if (cfg.hardware_budget) {
    const auto d = largest_d_max_within(tp, cfg.limits);
    if (!d) throw ConfigError("no d_max fits the hardware limits");
    tp.d_max = *d;
  }
  return Topology::build(tp);
}

struct PreparedInput {
  StereoEventStream stream;
  DisparityTrace trace;
};

StereoEventStream load_recorded(const InputConfig& in, Timestamp& offset) {
  StereoEventStream s;
  if (in.events) {
    s = parse_event_file(*in.events, in.geometry);
  } else {
    s = merge_streams(parse_event_file(*in.left_events, in.geometry, Side::Left),
                      parse_event_file(*in.right_events, in.geometry, Side::Right));
  }
  offset = 0;
  if (in.normalize_time && !s.empty()) {
    offset = s.events().front().t;
    s = shift_time(s, offset);
  }
  return s;
}

void print_headline(std::ostream& out, const MetricsReport& r) {
  out << std::left << std::setw(16) << "sample" << std::setw(11) << "population"
      << std::setw(8) << "PCD" << std::setw(10) << "RMSE[px]" << std::setw(10)
      << "spikes" << "energy[uW]\n";
  const std::string label = r.sample_label.empty() ? "-" : r.sample_label;
  for (const auto* p : {&r.disparity, &r.coincidence}) {
    out << std::left << std::setw(16) << label << std::setw(11)
        << (p == &r.disparity ? "D" : "C") << std::setw(8) << fmt(p->pcd, 3)
        << std::setw(10) << fmt(p->rmse, 3) << std::setw(10) << p->spikes
        << fmt(p == &r.disparity ? std::optional<double>(r.energy_uw) : std::nullopt, 3)
        << '\n';
  }
}

void write_run_artifacts(const fs::path& dir, const Topology& topo,
                         const SpikeRecord& rec, const DisparityTrace& trace,
                         const MetricsReport& report) {
  const auto windows = trace.windows.size();
  const Timestamp window = trace.window;

  write_spike_file(rec.spikes, dir / "spikes.csv");
  write_file_atomic(dir / "rates.csv", [&](std::ostream& os) {
    bool header = true;
    for (auto p : {Population::CoincExc, Population::CoincInh, Population::Disparity}) {
      write_rates(os, instantaneous_rates(rec, topo, window, p, windows), header);
      header = false;
    }
  });
  write_file_atomic(dir / "com.csv",
                    [&](std::ostream& os) { write_com_csv(os, report, trace); });
  write_trace_file(trace, dir / "trace.csv");
  write_text(dir / "report.json", report_to_json(report));

  // Raster with coordinates, so external tools can sort rows by disparity.
  write_file_atomic(dir / "raster.csv", [&](std::ostream& os) {
    os << "t_us,neuron_id,population,d,y,x_cyc\n";
    for (const auto& s : rec.spikes) {
      const auto c = topo.coord_of(s.neuron);
      os << s.t << ',' << s.neuron << ',' << to_string(s.population) << ',' << c.d
         << ',' << c.y << ',' << c.x_cyc << '\n';
    }
  });

  // Mean firing rate per neuron over the run, nonzero entries only.
  const auto counts = per_neuron_counts(rec, topo.neuron_count());
  write_file_atomic(dir / "rate_map.csv", [&](std::ostream& os) {
    os << "population,y,x_cyc,d,mean_rate_hz\n";
    const double seconds = static_cast<double>(report.duration) * 1e-6;
    for (auto p : {Population::CoincExc, Population::Disparity}) {
      const auto range = topo.range(p);
      for (std::size_t k = 0; k < range.count; ++k) {
        const auto id = static_cast<NeuronId>(range.first + k);
        if (counts[id] == 0) continue;
        const auto c = topo.coord_of(id);
        os << to_string(p) << ',' << c.y << ',' << c.x_cyc << ',' << c.d << ','
           << format_real(static_cast<double>(counts[id]) / seconds) << '\n';
      }
    }
  });

  write_file_atomic(dir / "disparity_histogram.csv", [&](std::ostream& os) {
    os << "window_i,population,d,count\n";
    for (auto p : {Population::CoincExc, Population::Disparity}) {
      std::vector<std::map<int, std::size_t>> hist(windows);
      for (const auto& s : rec.spikes) {
        if (s.population != p) continue;
        const auto w = static_cast<std::size_t>(s.t / window);
        if (w < windows) ++hist[w][topo.coord_of(s.neuron).d];
      }
      for (std::size_t w = 0; w < windows; ++w) {
        for (const auto& [d, n] : hist[w]) {
          os << w << ',' << to_string(p) << ',' << d << ',' << n << '\n';
        }
      }
    }
  });
}

int run_one(const fs::path& config_path, const RunOptions& options, std::ostream& out,
            std::ostream& err) {
  std::string stage = "config";
  try {
    std::vector<std::string> overrides = options.overrides;
    if (options.auto_crop) overrides.push_back("preprocess.auto_crop=true");
    if (options.hardware_budget) overrides.push_back("topology.hardware_budget=true");
    const RunConfig cfg = load_run_config(config_path, overrides);
    const std::string echo = run_config_to_json(cfg);
    const auto& in = cfg.input;

    stage = "topology";
    const Topology topo = build_topology(cfg);

    stage = "input";
    PreparedInput prepared;
    Timestamp offset = 0;
    StereoEventStream recorded;
    if (in.synthetic) {
      auto stim = gen_stimulus(in.synthetic->profile, topo.retina_geometry(),
                               in.synthetic->duration_us, cfg.analysis.window_us);
      prepared.stream = std::move(stim.stream);
      prepared.trace = std::move(stim.trace);
    } else {
      recorded = load_recorded(in, offset);
    }

    PixelCoord crop_origin{0, 0};
    if (!in.synthetic) {
      stage = "preprocess";
      auto pre = preprocess_detailed(recorded, cfg.preprocess);
      prepared.stream = std::move(pre.stream);
      crop_origin = pre.crop_origin;

      stage = "groundtruth";
      if (in.ground_truth) {
        prepared.trace = read_trace_file(*in.ground_truth);
      } else {
        auto markers = read_marker_file(*in.markers);
        shift_markers(markers, offset);
        const auto calib = read_calibration_file(*in.calibration);
        const auto left = to_downscaled_coords(
            project_markers(markers, calib.left, in.geometry),
            cfg.preprocess.downscale_factor, crop_origin, cfg.preprocess.crop_size);
        const auto right = to_downscaled_coords(
            project_markers(markers, calib.right, in.geometry),
            cfg.preprocess.downscale_factor, crop_origin, cfg.preprocess.crop_size);
        prepared.trace = disparity_trajectory(
            left, right, cfg.analysis.window_us,
            window_count_for(prepared.stream.duration(), cfg.analysis.window_us));
      }
    }

    stage = "simulate";
    const SpikeRecord rec = simulate(topo, prepared.stream, cfg.lif, cfg.mismatch);

    stage = "metrics";
    ReportInputs ri;
    ri.record = &rec;
    ri.topology = &topo;
    ri.ground_truth = &prepared.trace;
    ri.window = cfg.analysis.window_us;
    ri.epsilon_d = cfg.analysis.epsilon_d;
    ri.pcd_mode = cfg.analysis.pcd_mode;
    ri.energy = cfg.analysis.energy;
    ri.sample_label = in.sample_label;
    ri.config_json = echo;
    const MetricsReport report = build_report(ri);

    stage = "output";
    write_run_artifacts(cfg.output_dir, topo, rec, prepared.trace, report);
    out << "run: " << config_path.string() << " -> " << cfg.output_dir.string() << '\n';
    print_headline(out, report);
    return kExitOk;
  } catch (...) {
    return fail("run", stage, err);
  }
}

}  // namespace

int cmd_run(std::span<const fs::path> configs, const RunOptions& options,
            std::ostream& out, std::ostream& err) {
  if (configs.empty()) {
    err << "run: config: no config given\n";
    return kExitConfig;
  }
  const std::size_t n = configs.size();
  std::vector<std::ostringstream> outs(n), errs(n);
  std::vector<int> codes(n, kExitOk);
  const unsigned jobs =
      std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(n)));
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) codes[k] = run_one(configs[k], options, outs[k], errs[k]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next++) < n;) {
          codes[k] = run_one(configs[k], options, outs[k], errs[k]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  // Output in config order regardless of completion order.
  int code = kExitOk;
  for (std::size_t k = 0; k < n; ++k) {
    out << outs[k].str();
    err << errs[k].str();
    code = std::max(code, codes[k]);
  }
  return code;
}

int cmd_synth(const fs::path& config, std::span<const std::string> overrides,
              std::ostream& out, std::ostream& err) {
  std::string stage = "config";
  try {
    const RunConfig cfg = load_run_config(config, overrides);
    if (!cfg.input.synthetic) throw ConfigError("input.synthetic is required");
    stage = "synth";
    const auto geometry = CameraGeometry{cfg.topology.retina_width, cfg.topology.retina_height};
    const auto stim = gen_stimulus(cfg.input.synthetic->profile, geometry,
                                   cfg.input.synthetic->duration_us, cfg.analysis.window_us);
    std::vector<DvsEvent> left, right;
    for (const auto& e : stim.stream.events()) {
      (e.side == Side::Left ? left : right).push_back(e);
    }
    const auto duration = stim.stream.duration();
    stage = "output";
    const auto& dir = cfg.output_dir;
    write_event_file(StereoEventStream(std::move(left), geometry, duration),
                     dir / "left_events.csv");
    write_event_file(StereoEventStream(std::move(right), geometry, duration),
                     dir / "right_events.csv");
    write_trace_file(stim.trace, dir / "trace.csv");
    out << "synth: " << stim.stream.size() << " events, " << stim.trace.windows.size()
        << " windows -> " << dir.string() << '\n';
    return kExitOk;
  } catch (...) {
    return fail("synth", stage, err);
  }
}

int cmd_topology(const TopologyOptions& options, std::ostream& out, std::ostream& err) {
  std::string stage = "config";
  try {
    auto tc = load_topology_config(options.config, options.overrides);
    if (options.unlimited) tc.limits = HardwareLimits::unlimited();
    if (options.hardware_budget || tc.hardware_budget) {
      stage = "budget";
      const auto d = largest_d_max_within(tc.topology, tc.limits);
      if (!d) throw ConfigError("no d_max fits the hardware limits");
      tc.topology.d_max = *d;
      out << "hardware budget: d_max = " << *d << '\n';
    }
    stage = "build";
    const Topology topo = Topology::build(tc.topology);
    const auto report = check_hardware_constraints(topo, tc.limits);
    stage = "output";
    write_text(options.output_dir / "topology.json", topology_to_json(topo));
    write_text(options.output_dir / "constraints.json", constraint_report_to_json(report));
    auto limit = [](std::uint64_t v) {
      return v == HardwareLimits::kUnlimited ? std::string("inf") : std::to_string(v);
    };
    out << "neurons: " << topo.neuron_count() << " (C "
        << topo.range(Population::CoincExc).count + topo.range(Population::CoincInh).count
        << ", D " << topo.range(Population::Disparity).count << "), synapses "
        << topo.synapses().size() << '\n';
    out << (report.fan_in_ok() ? "PASS" : "FAIL") << " fan-in: max "
        << report.max_fan_in_observed << " <= " << limit(tc.limits.max_fan_in) << " ("
        << report.fan_in_violations.size() << " violating neurons)\n";
    out << (report.budget_ok() ? "PASS" : "FAIL") << " neuron budget: "
        << report.neurons_required << " <= " << limit(report.neurons_available) << '\n';
    return kExitOk;
  } catch (...) {
    return fail("topology", stage, err);
  }
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err) {
  std::string stage = "config";
  try {
    const RunConfig cfg = load_run_config(options.config, options.overrides, false);
    stage = "topology";
    const Topology topo = build_topology(cfg);
    stage = "input";
    SpikeRecord rec;
    rec.spikes = read_spike_file(options.spikes);
    for (const auto& s : rec.spikes) {
      if (s.neuron >= topo.neuron_count() || topo.population_of(s.neuron) != s.population) {
        throw ConfigError("spike for neuron " + std::to_string(s.neuron) +
                          " does not match the configured topology");
      }
      ++rec.population_counts[static_cast<std::size_t>(s.population)];
      // Deliveries are reconstructed from the recorded spikes only.
      rec.synaptic_deliveries += topo.efferents(s.neuron).size();
    }
    const DisparityTrace trace = read_trace_file(options.trace);
    if (options.events) {
      rec.input_events = parse_event_file(*options.events, cfg.input.geometry).size();
    }
    rec.duration = static_cast<Timestamp>(trace.windows.size()) * trace.window;

    stage = "metrics";
    ReportInputs ri;
    ri.record = &rec;
    ri.topology = &topo;
    ri.ground_truth = &trace;
    ri.window = cfg.analysis.window_us;
    ri.epsilon_d = cfg.analysis.epsilon_d;
    ri.pcd_mode = cfg.analysis.pcd_mode;
    ri.energy = cfg.analysis.energy;
    ri.sample_label = cfg.input.sample_label;
    ri.config_json = run_config_to_json(cfg);
    const auto report = build_report(ri);

    stage = "output";
    const fs::path dir = options.output_dir.value_or(cfg.output_dir);
    write_text(dir / "report.json", report_to_json(report));
    write_file_atomic(dir / "com.csv",
                      [&](std::ostream& os) { write_com_csv(os, report, trace); });
    print_headline(out, report);
    return kExitOk;
  } catch (...) {
    return fail("eval", stage, err);
  }
}

}  // namespace stereosnn::cli
