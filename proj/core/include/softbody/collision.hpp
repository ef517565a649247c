#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "softbody/forces.hpp"
#include "softbody/integrators.hpp"

namespace softbody {

enum class ColliderKind { HalfSpace, Sphere };

// Static obstacle. For a half-space `point` lies on the plane and `normal`
// points out of the solid; for a sphere `point` is the center.
struct Collider {
  ColliderKind kind = ColliderKind::HalfSpace;
  Vec3 point;
  Vec3 normal{0.0, 1.0, 0.0};
  double radius = 1.0;
  double contact_stiffness = 1000.0;
  double contact_damping = 5.0;
};

Collider ground_plane();
/// Throws Error(InvalidParams) on a non-unit normal, non-positive radius or negative gains.
void validate(const Collider& collider);

struct Contact {
  int particle_id = 0;
  std::size_t collider_index = 0;
  double penetration_depth = 0.0;
  Vec3 normal;
  double relative_normal_velocity = 0.0;
};

struct DetectionResult {
  std::vector<Contact> contacts;  // ordered by (particle id, collider index)
  std::size_t degenerate_normals = 0;
};

using DetectFunction =
    std::function<DetectionResult(std::span<const ParticleState>, std::span<const Collider>)>;

namespace detector_names {
inline constexpr const char* kBruteForce = "bruteForce";
inline constexpr const char* kSortedSweep = "sortedSweep";
}  // namespace detector_names

/// Tests every particle against every collider.
DetectionResult detect_contacts(std::span<const ParticleState> particles, std::span<const Collider> colliders);
/// Same contact set as detect_contacts; sphere colliders only visit particles
/// whose x coordinate falls inside the sphere's slab.
DetectionResult detect_contacts_sorted(std::span<const ParticleState> particles,
                                       std::span<const Collider> colliders);

/// Penalty response. Damping resists approach only and the result never pulls
/// the particle into the obstacle.
Vec3 penalty_force(const Contact& contact, const Collider& collider);

std::vector<PointForce> contact_forces(std::span<const Contact> contacts, std::span<const Collider> colliders);

struct BoundingSphere {
  Vec3 center;
  double radius = 0.0;
};

BoundingSphere bounding_sphere(std::span<const ParticleState> particles, std::span<const int> ids);

/// Sphere-proxy contacts between the parts of an attached body: each particle
/// of one part that enters another part's bounding sphere gets a contact.
/// `part_of[i]` is the part index of particle i.
std::vector<PointForce> part_proxy_forces(std::span<const ParticleState> particles, std::span<const int> part_of,
                                          double contact_stiffness, double contact_damping);

class DetectorRegistry {
 public:
  void add_builtins();
  /// Throws DuplicateName.
  void add(const std::string& name, DetectFunction detect);
  bool contains(const std::string& name) const;
  /// Throws UnknownAlgorithm.
  DetectFunction get(const std::string& name) const;
  std::vector<std::string> catalog() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, DetectFunction> entries_;
};

}  // namespace softbody
