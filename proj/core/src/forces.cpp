#include "softbody/forces.hpp"

#include <algorithm>
#include <cmath>

#include "softbody/error.hpp"

namespace softbody {
namespace {

const Vec3& position_of(const SoftBody& body, int id) {
  return body.particles[static_cast<std::size_t>(id)].position;
}

void add_pressure_3d(const SoftBody& body, double pressure_coefficient, std::vector<Vec3>& out) {
  if (!is_closed_surface(body.faces)) {
    throw Error(ErrorCode::NotEnclosed, "pressure needs a closed surface");
  }
  const double volume = compute_volume(body);
  if (!(volume > 0.0)) throw Error(ErrorCode::NotEnclosed, "enclosed volume is not positive");
  const double pressure = pressure_coefficient / volume;
  for (const Face& f : body.faces) {
    const Vec3& p1 = position_of(body, f.vertices[0]);
    const Vec3& p2 = position_of(body, f.vertices[1]);
    const Vec3& p3 = position_of(body, f.vertices[2]);
    // |cross| / 2 is the face area and cross / |cross| its outward normal.
    const Vec3 share = (pressure * 0.5 / 3.0) * cross(p2 - p1, p3 - p1);
    for (int v : f.vertices) out[static_cast<std::size_t>(v)] += share;
  }
}

void add_pressure_2d(const SoftBody& body, double pressure_coefficient, std::vector<Vec3>& out) {
  const auto loops = outer_loops(body);
  const double area = enclosed_area(body);
  if (loops.empty() || !(area > 0.0)) {
    throw Error(ErrorCode::NotEnclosed, "enclosed area is not positive");
  }
  const double pressure = pressure_coefficient / area;
  for (std::size_t index : loops) {
    const auto& ids = body.layers[index].particles;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int a = ids[i];
      const int b = ids[(i + 1) % ids.size()];
      const Vec3 edge = position_of(body, b) - position_of(body, a);
      // Outward normal of a counter-clockwise loop, scaled by edge length.
      const Vec3 share = (pressure * 0.5) * Vec3{edge.y, -edge.x, 0.0};
      out[static_cast<std::size_t>(a)] += share;
      out[static_cast<std::size_t>(b)] += share;
    }
  }
}

}  // namespace

void validate(const ForceParams& p) {
  if (!is_finite(p.gravity)) throw Error(ErrorCode::InvalidParams, "gravity must be finite");
  if (!(p.drag_coefficient >= 0.0) || !std::isfinite(p.drag_coefficient)) {
    throw Error(ErrorCode::InvalidParams, "drag coefficient must be non-negative");
  }
  if (p.pressure_coefficient && !(*p.pressure_coefficient >= 0.0 && std::isfinite(*p.pressure_coefficient))) {
    throw Error(ErrorCode::InvalidParams, "pressure coefficient must be non-negative");
  }
  if (!(p.elastic_limit >= 1.0) || !(p.fracture_strain > p.elastic_limit) || !std::isfinite(p.fracture_strain)) {
    throw Error(ErrorCode::InvalidParams, "thresholds need fracture > elastic >= 1");
  }
  if (!(p.plastic_rate >= 0.0 && p.plastic_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "plastic rate must lie in [0, 1]");
  }
}

Vec3 gravity_force(const Particle& particle, const Vec3& gravity) { return particle.mass * gravity; }

SpringForce spring_force_pair(const Spring& spring, std::span<const Particle> particles) {
  const Particle& head = particles[static_cast<std::size_t>(spring.head)];
  const Particle& tail = particles[static_cast<std::size_t>(spring.tail)];
  const Vec3 axis = tail.position - head.position;
  const double length = norm(axis);
  if (length < kZeroLength) return {{}, {}, true};
  const Vec3 dir = axis / length;
  const double magnitude = spring.hook_constant * (length - spring.rest_length) +
                           spring.damping_factor * dot(tail.velocity - head.velocity, dir);
  const Vec3 on_head = magnitude * dir;
  return {on_head, -on_head, false};
}

Vec3 drag_force(const Particle& particle, double drag_coefficient) {
  return -drag_coefficient * particle.velocity;
}

double effective_pressure_coefficient(const SoftBody& body, const ForceParams& params) {
  if (body.dimension == Dimension::One) return 0.0;
  if (params.pressure_coefficient) return *params.pressure_coefficient;
  return body.pressure_coefficient.value_or(0.0);
}

std::vector<Vec3> pressure_forces(const SoftBody& body, double pressure_coefficient) {
  if (body.dimension == Dimension::One) {
    throw Error(ErrorCode::NotApplicable, "1-D bodies carry no pressure");
  }
  std::vector<Vec3> out(body.particles.size());
  if (pressure_coefficient == 0.0) return out;
  if (body.dimension == Dimension::Three) {
    add_pressure_3d(body, pressure_coefficient, out);
  } else {
    add_pressure_2d(body, pressure_coefficient, out);
  }
  return out;
}

ForceDiagnostics accumulate_forces(SoftBody& body, const ForceParams& params,
                                   std::span<const ExternalInput> inputs,
                                   std::span<const PointForce> contact_forces) {
  ForceDiagnostics diagnostics;
  for (Particle& p : body.particles) {
    p.accumulated_force = gravity_force(p, params.gravity);
    p.accumulated_force += drag_force(p, params.drag_coefficient);
  }
  for (const Spring& s : body.springs) {
    const SpringForce f = spring_force_pair(s, body.particles);
    if (f.zero_length) {
      ++diagnostics.zero_length_springs;
      continue;
    }
    body.particles[static_cast<std::size_t>(s.head)].accumulated_force += f.on_head;
    body.particles[static_cast<std::size_t>(s.tail)].accumulated_force += f.on_tail;
  }
  const double kp = effective_pressure_coefficient(body, params);
  if (kp > 0.0) {
    const std::vector<Vec3> pressure = pressure_forces(body, kp);
    for (std::size_t i = 0; i < body.particles.size(); ++i) body.particles[i].accumulated_force += pressure[i];
  }
  for (const PointForce& c : contact_forces) {
    body.particles.at(static_cast<std::size_t>(c.particle_id)).accumulated_force += c.force;
  }
  for (const ExternalInput& input : inputs) {
    if (input.remaining_steps <= 0) continue;
    for (int id : input.targets) {
      Particle& p = body.particles.at(static_cast<std::size_t>(id));
      if (input.kind == InputKind::ImpulseForce) {
        p.accumulated_force += input.force;
      } else {
        p.accumulated_force += input.stiffness * (input.target_position - p.position);
      }
    }
  }
  for (Particle& p : body.particles) {
    p.accumulated_force = mask(p.accumulated_force, body.dimension);
    p.acceleration = p.accumulated_force / p.mass;
  }
  return diagnostics;
}

std::vector<int> apply_deformation_model(SoftBody& body, const ForceParams& params) {
  std::vector<int> broken;
  for (Spring& s : body.springs) {
    if (s.rest_length < kZeroLength) continue;
    const double length = norm(position_of(body, s.tail) - position_of(body, s.head));
    const double strain = length / s.rest_length;
    if (strain > params.fracture_strain) {
      broken.push_back(s.id);
    } else if (strain > params.elastic_limit) {
      s.rest_length = (1.0 - params.plastic_rate) * s.rest_length + params.plastic_rate * length;
    }
  }
  if (broken.empty()) return broken;

  auto is_broken = [&broken](int id) { return std::binary_search(broken.begin(), broken.end(), id); };
  std::erase_if(body.springs, [&](const Spring& s) { return is_broken(s.id); });
  const std::size_t faces_before = body.faces.size();
  std::erase_if(body.faces, [&](const Face& f) {
    return std::any_of(f.springs.begin(), f.springs.end(), is_broken);
  });
  if (body.faces.size() != faces_before && body.dimension == Dimension::Three && body.pressure_coefficient) {
    body.pressure_coefficient = 0.0;
  }
  return broken;
}

}  // namespace softbody
