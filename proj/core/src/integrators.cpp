#include "softbody/integrators.hpp"

#include <cmath>
#include <mutex>

#include "softbody/error.hpp"

namespace softbody {
namespace {

// Advances a copy of `base` by `h` using the given derivative pair.
StateVector offset(std::span<const ParticleState> base, double h, std::span<const Vec3> dx,
                   std::span<const Vec3> dv) {
  StateVector out(base.begin(), base.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].pinned) continue;
    out[i].position += h * dx[i];
    out[i].velocity += h * dv[i];
  }
  return out;
}

std::vector<Vec3> velocities(std::span<const ParticleState> state) {
  std::vector<Vec3> v;
  v.reserve(state.size());
  for (const ParticleState& s : state) v.push_back(s.velocity);
  return v;
}

void settle_pinned(StateVector& out, std::span<const ParticleState> in) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (in[i].pinned) {
      out[i].position = in[i].position;
      out[i].velocity = {};
    }
  }
}

}  // namespace

void require_finite(std::span<const ParticleState> state) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (!is_finite(state[i].position) || !is_finite(state[i].velocity)) {
      throw Error(ErrorCode::NonfiniteState, "particle " + std::to_string(i) + " left the finite range");
    }
  }
}

StateVector step_semi_implicit_euler(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval) {
  const std::vector<Vec3> a = eval(state);
  StateVector out(state.begin(), state.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].pinned) continue;
    out[i].velocity += dt * a[i];
    out[i].position += dt * out[i].velocity;
  }
  settle_pinned(out, state);
  require_finite(out);
  return out;
}

StateVector step_explicit_euler(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval) {
  const std::vector<Vec3> a = eval(state);
  StateVector out = offset(state, dt, velocities(state), a);
  settle_pinned(out, state);
  require_finite(out);
  return out;
}

StateVector step_midpoint(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval) {
  const std::vector<Vec3> a1 = eval(state);
  const StateVector half = offset(state, 0.5 * dt, velocities(state), a1);
  const std::vector<Vec3> a2 = eval(half);
  StateVector out = offset(state, dt, velocities(half), a2);
  settle_pinned(out, state);
  require_finite(out);
  return out;
}

StateVector step_rk4(std::span<const ParticleState> state, double dt, const ForceEvaluator& eval) {
  const std::vector<Vec3> v1 = velocities(state);
  const std::vector<Vec3> a1 = eval(state);
  const StateVector s2 = offset(state, 0.5 * dt, v1, a1);
  const std::vector<Vec3> v2 = velocities(s2);
  const std::vector<Vec3> a2 = eval(s2);
  const StateVector s3 = offset(state, 0.5 * dt, v2, a2);
  const std::vector<Vec3> v3 = velocities(s3);
  const std::vector<Vec3> a3 = eval(s3);
  const StateVector s4 = offset(state, dt, v3, a3);
  const std::vector<Vec3> v4 = velocities(s4);
  const std::vector<Vec3> a4 = eval(s4);

  StateVector out(state.begin(), state.end());
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].pinned) continue;
    out[i].position += w * (v1[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
    out[i].velocity += w * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
  }
  settle_pinned(out, state);
  require_finite(out);
  return out;
}

void IntegratorRegistry::add_builtins() {
  add({integrator_names::kSemiImplicitEuler, 0.005}, step_semi_implicit_euler);
  add({integrator_names::kExplicitEuler, 0.002}, step_explicit_euler);
  add({integrator_names::kMidpoint, 0.005}, step_midpoint);
  add({integrator_names::kRk4, 0.01}, step_rk4);
}

void IntegratorRegistry::add(IntegratorSpec spec, StepFunction step) {
  if (!(spec.time_step > 0.0) || !std::isfinite(spec.time_step)) {
    throw Error(ErrorCode::InvalidParams, "time step must be positive");
  }
  if (!step) throw Error(ErrorCode::InvalidParams, "step function is empty");
  std::unique_lock lock(mutex_);
  if (entries_.contains(spec.name)) {
    throw Error(ErrorCode::DuplicateName, "integrator '" + spec.name + "' already registered");
  }
  std::string name = spec.name;
  entries_.emplace(std::move(name), Entry{std::move(spec), std::move(step)});
}

bool IntegratorRegistry::contains(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return entries_.contains(name);
}

IntegratorRegistry::Entry IntegratorRegistry::get(const std::string& name) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownAlgorithm, "no integrator named '" + name + "'");
  return it->second;
}

std::vector<IntegratorSpec> IntegratorRegistry::catalog() const {
  std::shared_lock lock(mutex_);
  std::vector<IntegratorSpec> out;
  for (const auto& [name, entry] : entries_) out.push_back(entry.spec);
  return out;
}

}  // namespace softbody
