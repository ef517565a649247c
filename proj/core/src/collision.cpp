#include "softbody/collision.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "softbody/error.hpp"

namespace softbody {
namespace {

// Returns true and fills `out` when the particle penetrates the collider.
bool probe(const ParticleState& p, int particle_id, const Collider& c, std::size_t index, Contact& out,
           std::size_t& degenerate) {
  if (c.kind == ColliderKind::HalfSpace) {
    const double signed_distance = dot(p.position - c.point, c.normal);
    if (!(signed_distance < 0.0)) return false;
    out = {particle_id, index, -signed_distance, c.normal, dot(p.velocity, c.normal)};
    return true;
  }
  const Vec3 offset = p.position - c.point;
  const double d = norm(offset);
  if (!(d < c.radius)) return false;
  if (d == 0.0) {
    ++degenerate;
    return false;
  }
  const Vec3 n = offset / d;
  out = {particle_id, index, c.radius - d, n, dot(p.velocity, n)};
  return true;
}

}  // namespace

Collider ground_plane() { return Collider{}; }

void validate(const Collider& c) {
  if (!is_finite(c.point)) throw Error(ErrorCode::InvalidParams, "collider position must be finite");
  if (c.kind == ColliderKind::HalfSpace && std::abs(norm(c.normal) - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidParams, "half-space normal must be unit length");
  }
  if (c.kind == ColliderKind::Sphere && !(c.radius > 0.0 && std::isfinite(c.radius))) {
    throw Error(ErrorCode::InvalidParams, "sphere radius must be positive");
  }
  if (!(c.contact_stiffness >= 0.0) || !(c.contact_damping >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "contact gains must be non-negative");
  }
}

DetectionResult detect_contacts(std::span<const ParticleState> particles, std::span<const Collider> colliders) {
  DetectionResult result;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    for (std::size_t c = 0; c < colliders.size(); ++c) {
      Contact contact;
      if (probe(particles[i], static_cast<int>(i), colliders[c], c, contact, result.degenerate_normals)) {
        result.contacts.push_back(contact);
      }
    }
  }
  return result;
}

DetectionResult detect_contacts_sorted(std::span<const ParticleState> particles,
                                       std::span<const Collider> colliders) {
  DetectionResult result;
  std::vector<int> by_x(particles.size());
  std::iota(by_x.begin(), by_x.end(), 0);
  std::sort(by_x.begin(), by_x.end(), [&](int a, int b) {
    const double xa = particles[static_cast<std::size_t>(a)].position.x;
    const double xb = particles[static_cast<std::size_t>(b)].position.x;
    return xa < xb || (xa == xb && a < b);
  });
  auto x_of = [&](int id) { return particles[static_cast<std::size_t>(id)].position.x; };

  for (std::size_t c = 0; c < colliders.size(); ++c) {
    const Collider& col = colliders[c];
    auto first = by_x.begin();
    auto last = by_x.end();
    if (col.kind == ColliderKind::Sphere) {
      first = std::lower_bound(by_x.begin(), by_x.end(), col.point.x - col.radius,
                               [&](int id, double x) { return x_of(id) < x; });
      last = std::upper_bound(first, by_x.end(), col.point.x + col.radius,
                              [&](double x, int id) { return x < x_of(id); });
    }
    for (auto it = first; it != last; ++it) {
      Contact contact;
      if (probe(particles[static_cast<std::size_t>(*it)], *it, col, c, contact, result.degenerate_normals)) {
        result.contacts.push_back(contact);
      }
    }
  }
  std::sort(result.contacts.begin(), result.contacts.end(), [](const Contact& a, const Contact& b) {
    return a.particle_id < b.particle_id || (a.particle_id == b.particle_id && a.collider_index < b.collider_index);
  });
  return result;
}

Vec3 penalty_force(const Contact& contact, const Collider& collider) {
  const double approach = std::min(contact.relative_normal_velocity, 0.0);
  double magnitude = collider.contact_stiffness * contact.penetration_depth - collider.contact_damping * approach;
  if (magnitude < 0.0) magnitude = 0.0;
  return magnitude * contact.normal;
}

std::vector<PointForce> contact_forces(std::span<const Contact> contacts, std::span<const Collider> colliders) {
  std::vector<PointForce> out;
  out.reserve(contacts.size());
  for (const Contact& c : contacts) out.push_back({c.particle_id, penalty_force(c, colliders[c.collider_index])});
  return out;
}

BoundingSphere bounding_sphere(std::span<const ParticleState> particles, std::span<const int> ids) {
  BoundingSphere s;
  if (ids.empty()) return s;
  for (int id : ids) s.center += particles[static_cast<std::size_t>(id)].position;
  s.center = s.center / static_cast<double>(ids.size());
  for (int id : ids) s.radius = std::max(s.radius, norm(particles[static_cast<std::size_t>(id)].position - s.center));
  return s;
}

std::vector<PointForce> part_proxy_forces(std::span<const ParticleState> particles, std::span<const int> part_of,
                                          double contact_stiffness, double contact_damping) {
  std::vector<PointForce> out;
  const int parts = part_of.empty() ? 0 : *std::max_element(part_of.begin(), part_of.end()) + 1;
  if (parts < 2) return out;
  std::vector<std::vector<int>> members(static_cast<std::size_t>(parts));
  for (std::size_t i = 0; i < part_of.size(); ++i) members[static_cast<std::size_t>(part_of[i])].push_back(static_cast<int>(i));
  std::vector<Collider> proxies;
  for (const auto& ids : members) {
    const BoundingSphere s = bounding_sphere(particles, ids);
    Collider c;
    c.kind = ColliderKind::Sphere;
    c.point = s.center;
    c.radius = s.radius > 0.0 ? s.radius : 1e-12;
    c.contact_stiffness = contact_stiffness;
    c.contact_damping = contact_damping;
    proxies.push_back(c);
  }
  for (std::size_t i = 0; i < particles.size(); ++i) {
    for (std::size_t q = 0; q < proxies.size(); ++q) {
      if (static_cast<int>(q) == part_of[i]) continue;
      Contact contact;
      std::size_t degenerate = 0;
      if (probe(particles[i], static_cast<int>(i), proxies[q], q, contact, degenerate)) {
        out.push_back({static_cast<int>(i), penalty_force(contact, proxies[q])});
      }
    }
  }
  return out;
}

void DetectorRegistry::add_builtins() {
  add(detector_names::kBruteForce, detect_contacts);
  add(detector_names::kSortedSweep, detect_contacts_sorted);
}

void DetectorRegistry::add(const std::string& name, DetectFunction detect) {
  if (!detect) throw Error(ErrorCode::InvalidParams, "detector function is empty");
  std::unique_lock lock(mutex_);
  if (entries_.contains(name)) throw Error(ErrorCode::DuplicateName, "detector '" + name + "' already registered");
  entries_.emplace(name, std::move(detect));
}

bool DetectorRegistry::contains(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return entries_.contains(name);
}

DetectFunction DetectorRegistry::get(const std::string& name) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownAlgorithm, "no detector named '" + name + "'");
  return it->second;
}

std::vector<std::string> DetectorRegistry::catalog() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, fn] : entries_) out.push_back(name);
  return out;
}

}  // namespace softbody
