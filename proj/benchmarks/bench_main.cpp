#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "stereosnn/events.hpp"
#include "stereosnn/preprocess.hpp"
#include "stereosnn/simulator.hpp"
#include "stereosnn/synth.hpp"
#include "stereosnn/topology.hpp"

using namespace stereosnn;

namespace {

StereoEventStream noise(std::size_t n, CameraGeometry g, Timestamp span) {
  std::mt19937_64 rng(1);
  std::vector<DvsEvent> ev(n);
  for (auto& e : ev) {
    e.t = static_cast<Timestamp>(rng() % static_cast<std::uint64_t>(span));
    e.x = static_cast<int>(rng() % static_cast<std::uint64_t>(g.width));
    e.y = static_cast<int>(rng() % static_cast<std::uint64_t>(g.height));
    e.polarity = rng() & 1 ? Polarity::On : Polarity::Off;
    e.side = rng() & 2 ? Side::Right : Side::Left;
  }
  return StereoEventStream(std::move(ev), g);
}

void BM_ParseEvents(benchmark::State& state) {
  const auto s = noise(static_cast<std::size_t>(state.range(0)), {346, 260}, 10'000'000);
  std::ostringstream os;
  write_events(os, s);
  const std::string text = os.str();
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(parse_events(in, {346, 260}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ParseEvents)->Arg(10'000)->Arg(100'000);

void BM_BackgroundFilter(benchmark::State& state) {
  const auto s = noise(static_cast<std::size_t>(state.range(0)), {346, 260}, 1'000'000);
  for (auto _ : state) benchmark::DoNotOptimize(filter_background(s, 5000, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BackgroundFilter)->Arg(10'000)->Arg(100'000);

void BM_BuildTopology(benchmark::State& state) {
  TopologyParams p;
  p.retina_width = 16;
  p.retina_height = 16;
  p.d_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Topology::build(p));
}
BENCHMARK(BM_BuildTopology)->Arg(3)->Arg(7)->Arg(15);

void BM_SimulateBar(benchmark::State& state) {
  TopologyParams p;
  p.retina_width = 16;
  p.retina_height = 16;
  p.d_max = static_cast<int>(state.range(0));
  const auto topo = Topology::build(p);
  DisparityProfile prof;
  prof.shape = StimulusShape::Bar;
  prof.extent = 4;
  prof.anchor = {5, 6};
  prof.knots = {{0, 0.0}, {2'000'000, 6.0}};
  prof.jitter_us = 500;
  const auto stim = gen_stimulus(prof, topo.retina_geometry(), 2'000'000);
  const auto lif = LifParams::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(simulate(topo, stim.stream, lif));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stim.stream.size()));
}
BENCHMARK(BM_SimulateBar)->Arg(7)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_SimulateNoise(benchmark::State& state) {
  TopologyParams p;
  p.retina_width = 16;
  p.retina_height = 16;
  p.d_max = 7;
  const auto topo = Topology::build(p);
  const auto s = noise(static_cast<std::size_t>(state.range(0)), {16, 16}, 2'000'000);
  const auto lif = LifParams::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(simulate(topo, s, lif));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateNoise)->Arg(10'000)->Arg(50'000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
