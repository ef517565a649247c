#include <benchmark/benchmark.h>

#include "softbody/engine.hpp"

namespace {

using namespace softbody;

SimulationSnapshot body_for(Dimension d, int particles_per_layer) {
  CreationParams p = default_creation_params(d);
  p.particle_count = particles_per_layer;
  if (d != Dimension::One) p.center = {0.0, kSpawnHeight, 0.0};
  SimulationSnapshot s;
  s.body = create_soft_body(p);
  // Finer bodies carry less mass per particle and need a shorter step than the defaults.
  s.params.time_step_override = 2e-4;
  return s;
}

void step(benchmark::State& state, const char* integrator, Dimension d) {
  SimulationSnapshot snap = body_for(d, static_cast<int>(state.range(0)));
  snap.integrator_name = integrator;
  Simulation sim(1, snap, AlgorithmCatalog::with_builtins());
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.step());
    if (sim.tick() >= 2000) {
      state.PauseTiming();
      sim = Simulation(1, snap, sim.catalog());
      state.ResumeTiming();
    }
  }
  state.counters["particles"] = static_cast<double>(sim.body().particles.size());
}

void SemiImplicit2D(benchmark::State& s) { step(s, integrator_names::kSemiImplicitEuler, Dimension::Two); }
void Explicit2D(benchmark::State& s) { step(s, integrator_names::kExplicitEuler, Dimension::Two); }
void Midpoint2D(benchmark::State& s) { step(s, integrator_names::kMidpoint, Dimension::Two); }
void Rk4_2D(benchmark::State& s) { step(s, integrator_names::kRk4, Dimension::Two); }
void SemiImplicit3D(benchmark::State& s) { step(s, integrator_names::kSemiImplicitEuler, Dimension::Three); }
void Rk4_3D(benchmark::State& s) { step(s, integrator_names::kRk4, Dimension::Three); }

BENCHMARK(SemiImplicit2D)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(Explicit2D)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(Midpoint2D)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(Rk4_2D)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(SemiImplicit3D)->Arg(26)->Arg(102)->Arg(402);
BENCHMARK(Rk4_3D)->Arg(26)->Arg(102)->Arg(402);

}  // namespace
