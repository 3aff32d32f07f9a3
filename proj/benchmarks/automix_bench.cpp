#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "automix/channel_fx.hpp"
#include "automix/loudness.hpp"
#include "automix/masking_metric.hpp"
#include "automix/psycho_model.hpp"

using namespace automix;

namespace {

AudioClip noise(double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<double> x(static_cast<std::size_t>(seconds * 44100));
  for (auto& v : x) v = n(rng);
  return AudioClip(44100, std::move(x));
}

}  // namespace

static void BM_Loudness(benchmark::State& state) {
  const auto clip = noise(static_cast<double>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(loudness::integrated_loudness(clip));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(clip.length()));
}
BENCHMARK(BM_Loudness)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_ProcessTrack(benchmark::State& state) {
  const auto clip = noise(static_cast<double>(state.range(0)), 2);
  fx::TrackParams p;
  p.eq.gains_db = {3, -2, 1, -4, 2, 5};
  p.drc = {-30.0, 4.0, 0.01, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(fx::process_track(clip, p));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(clip.length()));
}
BENCHMARK(BM_ProcessTrack)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_PsychoAnalyze(benchmark::State& state) {
  const psycho::PsychoModel model(44100);
  const auto clip = noise(static_cast<double>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(model.analyze_track(clip));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(clip.length()));
}
BENCHMARK(BM_PsychoAnalyze)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

// One objective evaluation for n one-second tracks.
static void BM_MaskingEvaluate(benchmark::State& state) {
  const metric::MaskingEvaluator ev(psycho::PsychoModel(44100), {});
  std::vector<AudioClip> clips;
  for (int i = 0; i < state.range(0); ++i) clips.push_back(noise(1.0, 10 + i));
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(clips));
}
BENCHMARK(BM_MaskingEvaluate)->Arg(2)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
