#pragma once

#include <cstring>
#include <memory>

#include "softbody/engine.hpp"
#include "support.hpp"

namespace softbody::testing {

inline std::shared_ptr<AlgorithmCatalog> builtins() {
  static const std::shared_ptr<AlgorithmCatalog> catalog = AlgorithmCatalog::with_builtins();
  return catalog;
}

// Default body of the given dimension, lifted clear of the ground plane.
inline SimulationSnapshot lifted(Dimension d, double height = 2.0) {
  CreationParams p = default_creation_params(d);
  p.center = {0, height, 0};
  if (d == Dimension::One) p.center = {};
  SimulationSnapshot s;
  s.body = create_soft_body(p);
  return s;
}

// No gravity, drag, pressure or colliders: only internal forces remain.
inline SimulationSnapshot isolated(Dimension d) {
  SimulationSnapshot s = lifted(d);
  s.params.forces.gravity = {};
  s.params.forces.drag_coefficient = 0.0;
  s.params.forces.pressure_coefficient = 0.0;
  s.environment.clear();
  return s;
}

// Pinned anchor at the origin and one free particle on an undamped spring.
inline SimulationSnapshot spring_mass(double stretch, double k = 100.0, double m = 1.0) {
  SoftBody b;
  b.id = allocate_body_id();
  b.dimension = Dimension::One;
  b.particles.push_back({0, m, {}, {}, {}, {}, true});
  b.particles.push_back({1, m, {1.0 + stretch, 0, 0}, {}, {}, {}, false});
  b.springs.push_back({0, 0, 1, 1.0, k, 0.0, SpringKind::Structural, {}});
  b.layers.push_back({std::string(kOuterLayer), {0, 1}, 0});
  SimulationSnapshot s;
  s.body = std::move(b);
  s.params.forces.gravity = {};
  s.params.forces.drag_coefficient = 0.0;
  s.environment.clear();
  return s;
}

inline bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

inline bool bitwise_equal(const Vec3& a, const Vec3& b) {
  return bitwise_equal(a.x, b.x) && bitwise_equal(a.y, b.y) && bitwise_equal(a.z, b.z);
}

inline bool bitwise_equal(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bitwise_equal(a[i], b[i])) return false;
  }
  return true;
}

inline bool same_particles(const SoftBody& a, const SoftBody& b) {
  if (a.particles.size() != b.particles.size()) return false;
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    if (!bitwise_equal(a.particles[i].position, b.particles[i].position) ||
        !bitwise_equal(a.particles[i].velocity, b.particles[i].velocity)) {
      return false;
    }
  }
  return true;
}

inline Vec3 momentum(const SoftBody& b) {
  Vec3 p;
  for (const Particle& q : b.particles) p += q.mass * q.velocity;
  return p;
}

}  // namespace softbody::testing
