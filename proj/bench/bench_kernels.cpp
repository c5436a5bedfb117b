// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernels. Run with --benchmark_filter to pick one.

#include <benchmark/benchmark.h>

#include <random>

#include "raydf/decoding.hpp"
#include "raydf/expectation.hpp"
#include "raydf/metrics.hpp"
#include "raydf/scene_io.hpp"

namespace {

using namespace raydf;

const Scene& room() {
  static const Scene s = random_room_scene(1);
  return s;
}

const Bvh& room_bvh() {
  static const Bvh b(room().mesh);
  return b;
}

template <bool Parallel>
void BM_EvaluateField(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto v = Parallel ? evaluate_field(room_bvh(), room().camera, n, n, 128, FieldKind::drdf(), Truncation::hard(1.0))
                      : evaluate_field_serial(room_bvh(), room().camera, n, n, 128, FieldKind::drdf(),
                                              Truncation::hard(1.0));
    benchmark::DoNotOptimize(v.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * 128);
}
BENCHMARK(BM_EvaluateField<false>)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateField<true>)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

const FieldVolume& room_volume() {
  static const FieldVolume v =
      evaluate_field(room_bvh(), room().camera, 64, 64, 128, FieldKind::drdf(), Truncation::hard(1.0));
  return v;
}

template <bool Parallel>
void BM_DecodeVolume(benchmark::State& state) {
  for (auto _ : state) {
    auto s = Parallel ? decode_volume(room_volume(), DecoderKind::drdf())
                      : decode_volume_serial(room_volume(), DecoderKind::drdf());
    benchmark::DoNotOptimize(s.hits.data());
  }
  state.SetItemsProcessed(state.iterations() * 64 * 64);
}
BENCHMARK(BM_DecodeVolume<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeVolume<true>)->Unit(benchmark::kMillisecond);

std::vector<Vec3> cloud(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec3> p(n);
  for (auto& x : p) x = {u(rng), u(rng), 0.1 * u(rng)};
  return p;
}

template <bool Parallel>
void BM_NearestDistances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(1, n), b = cloud(2, n);
  for (auto _ : state) {
    auto d = Parallel ? nearest_distances(a, b) : nearest_distances_serial(a, b);
    benchmark::DoNotOptimize(d.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_NearestDistances<false>)->Arg(30000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestDistances<true>)->Arg(30000)->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_MonteCarlo(benchmark::State& state) {
  std::vector<double> z(101);
  for (int i = 0; i < 101; ++i) z[i] = -1.0 + 3.0 * i / 100;
  const std::vector<FieldKind> kinds = {FieldKind::urdf(), FieldKind::drdf()};
  const NoiseModel m{0.0, 0.2, 1.0};
  const auto samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto r = Parallel ? mc_expected(kinds, z, m, samples, 7) : mc_expected_serial(kinds, z, m, samples, 7);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * 101 * static_cast<std::int64_t>(samples));
}
BENCHMARK(BM_MonteCarlo<false>)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo<true>)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
