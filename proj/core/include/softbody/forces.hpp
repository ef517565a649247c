#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "softbody/model.hpp"

namespace softbody {

struct ForceParams {
  Vec3 gravity{0.0, -9.81, 0.0};
  double drag_coefficient = 0.01;
  // Overrides the body's own coefficient when set.
  std::optional<double> pressure_coefficient;
  double elastic_limit = 1.5;
  double plastic_rate = 0.1;
  double fracture_strain = 2.5;
};

/// Throws Error(InvalidParams) unless fracture > elastic >= 1, rate in [0, 1]
/// and the coefficients are non-negative.
void validate(const ForceParams& params);

enum class InputKind { ImpulseForce, Drag };

// Pointer-driven interaction. Drag inputs pull each target toward
// `target_position` with a linear spring of the given stiffness.
struct ExternalInput {
  InputKind kind = InputKind::ImpulseForce;
  std::vector<int> targets;
  Vec3 force;
  Vec3 target_position;
  double stiffness = 0.0;
  int remaining_steps = 1;
};

struct PointForce {
  int particle_id = 0;
  Vec3 force;
};

struct SpringForce {
  Vec3 on_head;
  Vec3 on_tail;
  bool zero_length = false;
};

struct ForceDiagnostics {
  std::size_t zero_length_springs = 0;
};

inline constexpr double kZeroLength = 1e-12;

Vec3 gravity_force(const Particle& particle, const Vec3& gravity);

/// Damped Hooke force along the spring axis. Coincident endpoints yield a
/// zero force with `zero_length` set instead of an undefined direction.
SpringForce spring_force_pair(const Spring& spring, std::span<const Particle> particles);

Vec3 drag_force(const Particle& particle, double drag_coefficient);

/// Closed-body pressure P = kP / V pushed outward through every outer face
/// (3-D) or outer loop edge (2-D). Result is indexed by particle id.
std::vector<Vec3> pressure_forces(const SoftBody& body, double pressure_coefficient);

/// Rebuilds accumulated_force and acceleration of every particle. Summation
/// order is fixed: gravity, drag, springs by id, pressure by face, contacts, inputs.
ForceDiagnostics accumulate_forces(SoftBody& body, const ForceParams& params,
                                   std::span<const ExternalInput> inputs,
                                   std::span<const PointForce> contact_forces);

/// Plastic creep and fracture. Returns ids of removed springs in ascending order.
/// Tearing a face out of a closed surface releases the body's pressure.
std::vector<int> apply_deformation_model(SoftBody& body, const ForceParams& params);

double effective_pressure_coefficient(const SoftBody& body, const ForceParams& params);

}  // namespace softbody
