#pragma once

#include <functional>
#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "softbody/vec3.hpp"

namespace softbody {

struct ParticleState {
  Vec3 position;
  Vec3 velocity;
  bool pinned = false;
};

using StateVector = std::vector<ParticleState>;

/// Accelerations for a candidate state. Must be pure: equal states give equal results.
using ForceEvaluator = std::function<std::vector<Vec3>(std::span<const ParticleState>)>;

using StepFunction =
    std::function<StateVector(std::span<const ParticleState>, double dt, const ForceEvaluator&)>;

struct IntegratorSpec {
  std::string name;
  double time_step = 0.005;
};

namespace integrator_names {
inline constexpr const char* kSemiImplicitEuler = "semiImplicitEuler";
inline constexpr const char* kExplicitEuler = "explicitEuler";
inline constexpr const char* kMidpoint = "midpoint";
inline constexpr const char* kRk4 = "rk4";
}  // namespace integrator_names

// Velocity first, then position with the new velocity.
StateVector step_semi_implicit_euler(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval);
// Position with the old velocity, velocity with the old acceleration.
StateVector step_explicit_euler(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval);
StateVector step_midpoint(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval);
StateVector step_rk4(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval);

/// Throws Error(NonfiniteState) if any component is NaN or infinite.
void require_finite(std::span<const ParticleState> state);

class IntegratorRegistry {
 public:
  struct Entry {
    IntegratorSpec spec;
    StepFunction step;
  };

  /// Registers the four built-in methods with their default time steps.
  void add_builtins();

  /// Throws DuplicateName, or InvalidParams for a non-positive time step.
  void add(IntegratorSpec spec, StepFunction step);
  bool contains(const std::string& name) const;
  /// Throws UnknownAlgorithm.
  Entry get(const std::string& name) const;
  std::vector<IntegratorSpec> catalog() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> entries_;
};

}  // namespace softbody
