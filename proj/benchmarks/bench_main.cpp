#include <benchmark/benchmark.h>

#include "ustrack/evalkit.hpp"
#include "ustrack/flow.hpp"
#include "ustrack/jitterfilter.hpp"
#include "ustrack/synthgen.hpp"

namespace {

using namespace ustrack;

SynthResult sequence(int side, int frames, MotionField motion) {
  SynthSpec spec;
  spec.width = side;
  spec.height = side;
  spec.frames = frames;
  spec.seed = 5;
  spec.motion = std::move(motion);
  return render_sequence(spec, {{side / 2.0, side / 2.0}});
}

void BM_PyrTrack(benchmark::State& state) {
  const TrackConfig cfg;
  const SynthResult r = sequence(static_cast<int>(state.range(0)), 2, MotionField::translation({1.3, -0.7}));
  const Pyramid a = build_pyramid(r.sequence[0], cfg.levels);
  const Pyramid b = build_pyramid(r.sequence[1], cfg.levels);
  const Point2 p{state.range(0) / 2.0, state.range(0) / 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(pyr_track(a, b, p, cfg));
}
BENCHMARK(BM_PyrTrack)->Arg(64)->Arg(256);

void BM_BuildPyramid(benchmark::State& state) {
  const SynthResult r = sequence(static_cast<int>(state.range(0)), 1, MotionField::none());
  for (auto _ : state) benchmark::DoNotOptimize(build_pyramid(r.sequence[0], 3));
}
BENCHMARK(BM_BuildPyramid)->Arg(256)->Arg(512);

// One label over N frames at the default 0.6 s window.
void BM_FilterTrajectory(benchmark::State& state) {
  const int frames = static_cast<int>(state.range(0));
  const SynthResult r = sequence(64, frames, MotionField::sinusoid(5.0, 1.0));
  const Trajectory input = add_jitter(r.truth.labels.at("0"), 1.0, 3);
  FilterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(filter_trajectory(r.sequence, input, cfg));
  state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_FilterTrajectory)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Psd(benchmark::State& state) {
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  SeededRng rng(1);
  for (double& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(psd(x, 50.0));
}
BENCHMARK(BM_Psd)->Arg(500)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
