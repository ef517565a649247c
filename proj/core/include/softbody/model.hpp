#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "softbody/vec3.hpp"

namespace softbody {

enum class Dimension { One = 1, Two = 2, Three = 3 };

int to_int(Dimension d);
/// Throws Error(InvalidParams) for anything other than 1, 2 or 3.
Dimension dimension_from_int(int value);

enum class SpringKind { Structural, Radius, Shear };

std::string_view to_string(SpringKind kind);
std::optional<SpringKind> spring_kind_from_string(std::string_view name);

struct Particle {
  int id = 0;
  double mass = 1.0;
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
  Vec3 accumulated_force;
  bool pinned = false;
};

struct Spring {
  int id = 0;
  int head = 0;
  int tail = 0;
  double rest_length = 0.0;
  double hook_constant = 0.0;
  double damping_factor = 0.0;
  SpringKind kind = SpringKind::Structural;
  // Average of adjacent face normals; zero when no face touches the spring.
  // Display only, never read by the force model.
  Vec3 normal;
};

struct Face {
  int id = 0;
  std::array<int, 3> vertices{};
  std::array<int, 3> springs{};
};

// One concentric shell. For 2-D bodies the particle list is an ordered
// counter-clockwise loop; `part` identifies the source body after attach.
struct Layer {
  std::string label;
  std::vector<int> particles;
  int part = 0;
};

inline constexpr std::string_view kOuterLayer = "outer";
inline constexpr std::string_view kInnerLayer = "inner";

struct Color {
  double r = 0.8;
  double g = 0.2;
  double b = 0.2;
  friend bool operator==(const Color&, const Color&) = default;
};

struct SoftBody {
  int id = 0;
  Dimension dimension = Dimension::Two;
  std::vector<Layer> layers;
  // particles[i].id == i always holds.
  std::vector<Particle> particles;
  // Sorted by ascending id; ids are unique but may have gaps after fracture.
  std::vector<Spring> springs;
  std::vector<Face> faces;
  std::optional<double> pressure_coefficient;
  Color color;

  const Spring* find_spring(int spring_id) const;
  Spring* find_spring(int spring_id);
  const Particle* find_particle(int particle_id) const;
  int next_spring_id() const { return springs.empty() ? 0 : springs.back().id + 1; }
  int next_face_id() const { return faces.empty() ? 0 : faces.back().id + 1; }
  double total_mass() const;
  Vec3 centroid() const;
};

struct SpringConstants {
  double hook_constant = 0.0;
  double damping_factor = 0.0;
};

struct SpringDefaults {
  SpringConstants structural{200.0, 1.0};
  SpringConstants radius{150.0, 1.0};
  SpringConstants shear{100.0, 1.0};

  const SpringConstants& for_kind(SpringKind kind) const;
};

// Accepted at creation and forwarded to the deformation model thresholds.
struct DeformationRange {
  double elastic_limit = 1.5;
  double fracture_strain = 2.5;
};

struct CreationParams {
  Dimension dimension = Dimension::Two;
  int particle_count = 16;  // per layer
  int layer_count = 2;
  double total_mass = 1.0;
  // When set, total mass is density times the enclosed measure of the outer
  // layer (length, area or volume depending on dimension).
  std::optional<double> density;
  double size = 1.0;
  double inner_ratio = 0.5;
  SpringDefaults springs;
  double pressure_coefficient = 5.0;
  Color color;
  Vec3 center;
  std::optional<DeformationRange> deformation_range;
};

CreationParams default_creation_params(Dimension dimension);

/// Fresh process-unique body id.
int allocate_body_id();

SoftBody create_default_soft_body(Dimension dimension);
SoftBody create_soft_body(const CreationParams& params);

/// Appends a spring whose rest length is the current endpoint distance.
int add_spring(SoftBody& body, int head, int tail, SpringKind kind, double hook_constant,
               double damping_factor);

/// Records a face; any edge without a spring gets a structural spring built
/// from `edge_defaults`.
int add_face(SoftBody& body, int v1, int v2, int v3,
             const SpringConstants& edge_defaults = SpringDefaults{}.structural);

struct ParticleRef {
  int body_id = 0;
  int particle_id = 0;
};

struct AttachPair {
  ParticleRef first;
  ParticleRef second;
};

struct CombinedBody {
  SoftBody body;
  std::vector<int> a_to_combined;
  std::vector<int> b_to_combined;
};

CombinedBody attach_objects(const SoftBody& a, const SoftBody& b, std::span<const AttachPair> pairs,
                            SpringKind kind, double hook_constant, double damping_factor);

/// Signed volume enclosed by the body's faces. Throws NotVolumetric for
/// bodies below 3-D and OpenSurface when the faces do not close.
double compute_volume(const SoftBody& body);

// Geometry helpers shared with the force model and persistence.

Vec3 mask(const Vec3& v, Dimension dimension);
void apply_dimension_mask(SoftBody& body);

/// True when every directed edge appears exactly once and its reverse exactly once.
bool is_closed_surface(std::span<const Face> faces);

/// Sum of signed shoelace areas of every outer loop of a 2-D body.
double enclosed_area(const SoftBody& body);

/// Indices into body.layers of the closed outer loops of a 2-D body.
std::vector<std::size_t> outer_loops(const SoftBody& body);

void refresh_spring_normals(SoftBody& body);

/// Throws Error(InvariantViolation) describing the first broken invariant.
void validate(const SoftBody& body);

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // outward winding
};

/// Latitude/longitude sphere with two poles and `rings` rings of `segments` vertices.
TriMesh uv_sphere(int segments, int rings, double radius);

/// Unique undirected edges in order of first appearance over the triangles.
std::vector<std::array<int, 2>> mesh_edges(const TriMesh& mesh);

/// (segments, rings) with segments * rings == vertex_count - 2 closest to a 4:3 aspect.
std::array<int, 2> sphere_resolution(int vertex_count);

}  // namespace softbody
