#include <random>

#include <benchmark/benchmark.h>

#include "softbody/collision.hpp"

namespace {

using namespace softbody;

std::vector<ParticleState> cloud(std::size_t n) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<ParticleState> out(n);
  for (auto& p : out) p.position = {u(rng), u(rng), u(rng)};
  return out;
}

std::vector<Collider> spheres(std::size_t n) {
  std::vector<Collider> out{ground_plane()};
  for (std::size_t i = 0; i < n; ++i) {
    Collider c;
    c.kind = ColliderKind::Sphere;
    c.point = {-9.0 + 18.0 * static_cast<double>(i) / static_cast<double>(n), 0.0, 0.0};
    c.radius = 0.5;
    out.push_back(c);
  }
  return out;
}

template <DetectionResult (*Detect)(std::span<const ParticleState>, std::span<const Collider>)>
void detect(benchmark::State& state) {
  const auto particles = cloud(static_cast<std::size_t>(state.range(0)));
  const auto colliders = spheres(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Detect(particles, colliders));
}

void BruteForce(benchmark::State& s) { detect<detect_contacts>(s); }
void SortedSweep(benchmark::State& s) { detect<detect_contacts_sorted>(s); }

BENCHMARK(BruteForce)->Args({256, 4})->Args({4096, 4})->Args({4096, 64});
BENCHMARK(SortedSweep)->Args({256, 4})->Args({4096, 4})->Args({4096, 64});

}  // namespace
