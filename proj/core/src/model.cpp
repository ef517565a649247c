#include "softbody/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <utility>

#include "softbody/error.hpp"

namespace softbody {
namespace {

std::atomic<int> g_next_body_id{1};

double distance(const SoftBody& body, int a, int b) {
  return norm(body.particles[static_cast<std::size_t>(b)].position -
              body.particles[static_cast<std::size_t>(a)].position);
}

bool resolves(const SoftBody& body, int particle_id) {
  return particle_id >= 0 && static_cast<std::size_t>(particle_id) < body.particles.size();
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidParams, std::string(what) + " must be positive");
  }
}

void require_non_negative(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidParams, std::string(what) + " must be non-negative");
  }
}

void validate_params(const CreationParams& p) {
  const int min_count = p.dimension == Dimension::One ? 1 : p.dimension == Dimension::Two ? 3 : 5;
  if (p.particle_count < min_count) {
    throw Error(ErrorCode::InvalidParams, "particle count too small for dimension " +
                                              std::to_string(to_int(p.dimension)));
  }
  if (p.layer_count < 1) throw Error(ErrorCode::InvalidParams, "layer count must be positive");
  if (p.dimension == Dimension::One && p.layer_count != 1) {
    throw Error(ErrorCode::InvalidParams, "1-D bodies have exactly one layer");
  }
  require_positive(p.total_mass, "total mass");
  if (p.density) require_positive(*p.density, "density");
  require_positive(p.size, "size");
  if (!(p.inner_ratio > 0.0 && p.inner_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "inner ratio must lie strictly between 0 and 1");
  }
  for (const SpringConstants* s : {&p.springs.structural, &p.springs.radius, &p.springs.shear}) {
    require_non_negative(s->hook_constant, "hook constant");
    require_non_negative(s->damping_factor, "damping factor");
  }
  require_non_negative(p.pressure_coefficient, "pressure coefficient");
  if (!is_finite(p.center)) throw Error(ErrorCode::InvalidParams, "center must be finite");
  if (p.deformation_range) {
    const auto& d = *p.deformation_range;
    if (!(d.elastic_limit >= 1.0 && d.fracture_strain > d.elastic_limit)) {
      throw Error(ErrorCode::InvalidParams, "deformation range needs fracture > elastic >= 1");
    }
  }
}

// Template shape of one layer at unit scale, plus its edges and triangles.
struct LayerTemplate {
  std::vector<Vec3> points;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> triangles;
};

LayerTemplate make_template(const CreationParams& p) {
  LayerTemplate t;
  const int n = p.particle_count;
  switch (p.dimension) {
    case Dimension::One: {
      for (int i = 0; i < n; ++i) {
        const double x = n == 1 ? 0.0 : -0.5 + static_cast<double>(i) / (n - 1);
        t.points.push_back({x, 0.0, 0.0});
      }
      for (int i = 0; i + 1 < n; ++i) t.edges.push_back({i, i + 1});
      break;
    }
    case Dimension::Two: {
      for (int i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * i / n;
        t.points.push_back({std::cos(a), std::sin(a), 0.0});
      }
      for (int i = 0; i < n; ++i) t.edges.push_back({i, (i + 1) % n});
      break;
    }
    case Dimension::Three: {
      const auto [segments, rings] = sphere_resolution(n);
      TriMesh mesh = uv_sphere(segments, rings, 1.0);
      t.edges = mesh_edges(mesh);
      t.points = std::move(mesh.vertices);
      t.triangles = std::move(mesh.triangles);
      break;
    }
  }
  return t;
}

double layer_scale(const CreationParams& p, int layer) {
  if (p.dimension == Dimension::One) return p.size;
  if (p.layer_count == 1) return p.size;
  const double t = static_cast<double>(layer) / (p.layer_count - 1);
  return p.size * (1.0 - t * (1.0 - p.inner_ratio));
}

std::string layer_label(int layer, int layer_count) {
  if (layer == 0) return std::string(kOuterLayer);
  if (layer == layer_count - 1) return std::string(kInnerLayer);
  return "layer" + std::to_string(layer);
}

double template_measure(const CreationParams& p, const LayerTemplate& t) {
  switch (p.dimension) {
    case Dimension::One:
      return p.size;
    case Dimension::Two: {
      double area = 0.0;
      for (const auto& e : t.edges) {
        const Vec3& a = t.points[static_cast<std::size_t>(e[0])];
        const Vec3& b = t.points[static_cast<std::size_t>(e[1])];
        area += 0.5 * (a.x * b.y - b.x * a.y);
      }
      return area * p.size * p.size;
    }
    case Dimension::Three: {
      double volume = 0.0;
      for (const auto& tri : t.triangles) {
        volume += dot(t.points[static_cast<std::size_t>(tri[0])],
                      cross(t.points[static_cast<std::size_t>(tri[1])],
                            t.points[static_cast<std::size_t>(tri[2])])) /
                  6.0;
      }
      return volume * p.size * p.size * p.size;
    }
  }
  return 0.0;
}

int find_edge_spring(const SoftBody& body, int a, int b) {
  for (const Spring& s : body.springs) {
    if ((s.head == a && s.tail == b) || (s.head == b && s.tail == a)) return s.id;
  }
  return -1;
}

}  // namespace

int to_int(Dimension d) { return static_cast<int>(d); }

Dimension dimension_from_int(int value) {
  if (value < 1 || value > 3) {
    throw Error(ErrorCode::InvalidParams, "dimension must be 1, 2 or 3, got " + std::to_string(value));
  }
  return static_cast<Dimension>(value);
}

std::string_view to_string(SpringKind kind) {
  switch (kind) {
    case SpringKind::Structural: return "structural";
    case SpringKind::Radius: return "radius";
    case SpringKind::Shear: return "shear";
  }
  return "structural";
}

std::optional<SpringKind> spring_kind_from_string(std::string_view name) {
  if (name == "structural") return SpringKind::Structural;
  if (name == "radius") return SpringKind::Radius;
  if (name == "shear") return SpringKind::Shear;
  return std::nullopt;
}

const Spring* SoftBody::find_spring(int spring_id) const {
  auto it = std::lower_bound(springs.begin(), springs.end(), spring_id,
                             [](const Spring& s, int id) { return s.id < id; });
  return it != springs.end() && it->id == spring_id ? &*it : nullptr;
}

Spring* SoftBody::find_spring(int spring_id) {
  return const_cast<Spring*>(std::as_const(*this).find_spring(spring_id));
}

const Particle* SoftBody::find_particle(int particle_id) const {
  if (particle_id < 0 || static_cast<std::size_t>(particle_id) >= particles.size()) return nullptr;
  return &particles[static_cast<std::size_t>(particle_id)];
}

double SoftBody::total_mass() const {
  double m = 0.0;
  for (const Particle& p : particles) m += p.mass;
  return m;
}

Vec3 SoftBody::centroid() const {
  Vec3 c;
  double m = 0.0;
  for (const Particle& p : particles) {
    c += p.mass * p.position;
    m += p.mass;
  }
  return m > 0.0 ? c / m : c;
}

const SpringConstants& SpringDefaults::for_kind(SpringKind kind) const {
  switch (kind) {
    case SpringKind::Radius: return radius;
    case SpringKind::Shear: return shear;
    case SpringKind::Structural: break;
  }
  return structural;
}

CreationParams default_creation_params(Dimension dimension) {
  CreationParams p;
  p.dimension = dimension;
  switch (dimension) {
    case Dimension::One:
      p.particle_count = 8;
      p.layer_count = 1;
      break;
    case Dimension::Two:
      p.particle_count = 16;
      p.layer_count = 2;
      break;
    case Dimension::Three:
      p.particle_count = 50;  // 8 segments x 6 rings + 2 poles
      p.layer_count = 2;
      break;
  }
  return p;
}

int allocate_body_id() { return g_next_body_id.fetch_add(1); }

SoftBody create_default_soft_body(Dimension dimension) {
  return create_soft_body(default_creation_params(dimension));
}

SoftBody create_soft_body(const CreationParams& params) {
  validate_params(params);
  const LayerTemplate tmpl = make_template(params);
  const int per_layer = static_cast<int>(tmpl.points.size());
  const int total = per_layer * params.layer_count;

  double total_mass = params.total_mass;
  if (params.density) total_mass = *params.density * template_measure(params, tmpl);
  const double particle_mass = total_mass / total;

  SoftBody body;
  body.id = allocate_body_id();
  body.dimension = params.dimension;
  body.color = params.color;
  if (params.dimension != Dimension::One) body.pressure_coefficient = params.pressure_coefficient;

  for (int layer = 0; layer < params.layer_count; ++layer) {
    Layer l;
    l.label = layer_label(layer, params.layer_count);
    const double scale = layer_scale(params, layer);
    for (int i = 0; i < per_layer; ++i) {
      Particle p;
      p.id = static_cast<int>(body.particles.size());
      p.mass = particle_mass;
      p.position = mask(params.center + scale * tmpl.points[static_cast<std::size_t>(i)], params.dimension);
      l.particles.push_back(p.id);
      body.particles.push_back(p);
    }
    body.layers.push_back(std::move(l));
  }

  const auto& k = params.springs;
  auto at = [per_layer](int layer, int i) { return layer * per_layer + i; };
  for (int layer = 0; layer < params.layer_count; ++layer) {
    for (const auto& e : tmpl.edges) {
      add_spring(body, at(layer, e[0]), at(layer, e[1]), SpringKind::Structural,
                 k.structural.hook_constant, k.structural.damping_factor);
    }
  }
  for (int layer = 0; layer + 1 < params.layer_count; ++layer) {
    for (int i = 0; i < per_layer; ++i) {
      add_spring(body, at(layer, i), at(layer + 1, i), SpringKind::Radius, k.radius.hook_constant,
                 k.radius.damping_factor);
    }
  }
  for (int layer = 0; layer + 1 < params.layer_count; ++layer) {
    for (const auto& e : tmpl.edges) {
      add_spring(body, at(layer, e[0]), at(layer + 1, e[1]), SpringKind::Shear, k.shear.hook_constant,
                 k.shear.damping_factor);
      add_spring(body, at(layer, e[1]), at(layer + 1, e[0]), SpringKind::Shear, k.shear.hook_constant,
                 k.shear.damping_factor);
    }
  }
  for (const auto& tri : tmpl.triangles) {
    add_face(body, tri[0], tri[1], tri[2], k.structural);
  }
  refresh_spring_normals(body);
  return body;
}

int add_spring(SoftBody& body, int head, int tail, SpringKind kind, double hook_constant,
               double damping_factor) {
  if (!resolves(body, head) || !resolves(body, tail)) {
    throw Error(ErrorCode::UnknownParticle,
                "spring endpoint " + std::to_string(resolves(body, head) ? tail : head));
  }
  if (head == tail) throw Error(ErrorCode::SelfLoop, "spring head equals tail");
  require_non_negative(hook_constant, "hook constant");
  require_non_negative(damping_factor, "damping factor");
  Spring s;
  s.id = body.next_spring_id();
  s.head = head;
  s.tail = tail;
  s.kind = kind;
  s.hook_constant = hook_constant;
  s.damping_factor = damping_factor;
  s.rest_length = distance(body, head, tail);
  body.springs.push_back(s);
  return s.id;
}

int add_face(SoftBody& body, int v1, int v2, int v3, const SpringConstants& edge_defaults) {
  if (body.dimension == Dimension::One) {
    throw Error(ErrorCode::DimensionForbidsFace, "a 1-D body has no faces");
  }
  for (int v : {v1, v2, v3}) {
    if (!resolves(body, v)) throw Error(ErrorCode::UnknownParticle, "face vertex " + std::to_string(v));
  }
  if (v1 == v2 || v2 == v3 || v1 == v3) {
    throw Error(ErrorCode::DegenerateFace, "face vertices must be distinct");
  }
  Face f;
  f.id = body.next_face_id();
  f.vertices = {v1, v2, v3};
  for (int e = 0; e < 3; ++e) {
    const int a = f.vertices[static_cast<std::size_t>(e)];
    const int b = f.vertices[static_cast<std::size_t>((e + 1) % 3)];
    int spring = find_edge_spring(body, a, b);
    if (spring < 0) {
      spring = add_spring(body, a, b, SpringKind::Structural, edge_defaults.hook_constant,
                          edge_defaults.damping_factor);
    }
    f.springs[static_cast<std::size_t>(e)] = spring;
  }
  body.faces.push_back(f);
  return f.id;
}

CombinedBody attach_objects(const SoftBody& a, const SoftBody& b, std::span<const AttachPair> pairs,
                            SpringKind kind, double hook_constant, double damping_factor) {
  if (a.id == b.id) throw Error(ErrorCode::SameObject, "cannot attach a body to itself");

  const int offset = static_cast<int>(a.particles.size());
  // Normalise each pair to (particle in a, particle in b) before touching anything.
  std::vector<std::array<int, 2>> resolved;
  resolved.reserve(pairs.size());
  for (const AttachPair& pair : pairs) {
    if (pair.first.body_id == pair.second.body_id) {
      throw Error(ErrorCode::SameObject, "selected particles must come from two different objects");
    }
    const ParticleRef* in_a = nullptr;
    const ParticleRef* in_b = nullptr;
    for (const ParticleRef* ref : {&pair.first, &pair.second}) {
      if (ref->body_id == a.id) in_a = ref;
      else if (ref->body_id == b.id) in_b = ref;
    }
    if (in_a == nullptr || in_b == nullptr) {
      throw Error(ErrorCode::UnknownParticle, "pair references a body that is not being attached");
    }
    if (!resolves(a, in_a->particle_id)) {
      throw Error(ErrorCode::UnknownParticle, "particle " + std::to_string(in_a->particle_id));
    }
    if (!resolves(b, in_b->particle_id)) {
      throw Error(ErrorCode::UnknownParticle, "particle " + std::to_string(in_b->particle_id));
    }
    resolved.push_back({in_a->particle_id, in_b->particle_id + offset});
  }

  CombinedBody out;
  SoftBody& c = out.body;
  c.id = allocate_body_id();
  c.dimension = static_cast<Dimension>(std::max(to_int(a.dimension), to_int(b.dimension)));
  c.color = a.color;
  if (c.dimension != Dimension::One) {
    c.pressure_coefficient = a.pressure_coefficient ? a.pressure_coefficient : b.pressure_coefficient;
  }

  c.particles = a.particles;
  for (const Particle& p : b.particles) {
    Particle q = p;
    q.id = p.id + offset;
    c.particles.push_back(q);
  }
  for (std::size_t i = 0; i < a.particles.size(); ++i) out.a_to_combined.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < b.particles.size(); ++i) {
    out.b_to_combined.push_back(static_cast<int>(i) + offset);
  }

  int part_offset = 0;
  for (const Layer& l : a.layers) {
    c.layers.push_back(l);
    part_offset = std::max(part_offset, l.part + 1);
  }
  for (const Layer& l : b.layers) {
    Layer m = l;
    m.part = l.part + part_offset;
    for (int& id : m.particles) id += offset;
    c.layers.push_back(std::move(m));
  }

  std::map<int, int> b_spring_ids;
  c.springs = a.springs;
  for (const Spring& s : b.springs) {
    Spring t = s;
    t.id = c.next_spring_id();
    t.head += offset;
    t.tail += offset;
    b_spring_ids[s.id] = t.id;
    c.springs.push_back(t);
  }
  c.faces = a.faces;
  for (const Face& f : b.faces) {
    Face g = f;
    g.id = c.next_face_id();
    for (int& v : g.vertices) v += offset;
    for (int& s : g.springs) s = b_spring_ids.at(s);
    c.faces.push_back(g);
  }
  for (const auto& [pa, pb] : resolved) add_spring(c, pa, pb, kind, hook_constant, damping_factor);
  apply_dimension_mask(c);
  refresh_spring_normals(c);
  return out;
}

double compute_volume(const SoftBody& body) {
  if (body.dimension != Dimension::Three) {
    throw Error(ErrorCode::NotVolumetric, "volume is defined for 3-D bodies only");
  }
  if (!is_closed_surface(body.faces)) {
    throw Error(ErrorCode::OpenSurface, "faces do not form a closed oriented surface");
  }
  double volume = 0.0;
  for (const Face& f : body.faces) {
    const Vec3& p1 = body.particles[static_cast<std::size_t>(f.vertices[0])].position;
    const Vec3& p2 = body.particles[static_cast<std::size_t>(f.vertices[1])].position;
    const Vec3& p3 = body.particles[static_cast<std::size_t>(f.vertices[2])].position;
    volume += dot(p1, cross(p2, p3));
  }
  return volume / 6.0;
}

Vec3 mask(const Vec3& v, Dimension dimension) {
  switch (dimension) {
    case Dimension::One: return {v.x, 0.0, 0.0};
    case Dimension::Two: return {v.x, v.y, 0.0};
    case Dimension::Three: break;
  }
  return v;
}

void apply_dimension_mask(SoftBody& body) {
  if (body.dimension == Dimension::Three) return;
  for (Particle& p : body.particles) {
    p.position = mask(p.position, body.dimension);
    p.velocity = mask(p.velocity, body.dimension);
    p.acceleration = mask(p.acceleration, body.dimension);
    p.accumulated_force = mask(p.accumulated_force, body.dimension);
  }
}

bool is_closed_surface(std::span<const Face> faces) {
  if (faces.empty()) return false;
  std::vector<std::pair<int, int>> edges;
  edges.reserve(faces.size() * 3);
  for (const Face& f : faces) {
    for (std::size_t e = 0; e < 3; ++e) edges.emplace_back(f.vertices[e], f.vertices[(e + 1) % 3]);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) return false;
  return std::all_of(edges.begin(), edges.end(), [&](const auto& e) {
    return std::binary_search(edges.begin(), edges.end(), std::pair{e.second, e.first});
  });
}

std::vector<std::size_t> outer_loops(const SoftBody& body) {
  std::vector<std::size_t> loops;
  if (body.dimension != Dimension::Two) return loops;
  for (std::size_t i = 0; i < body.layers.size(); ++i) {
    if (body.layers[i].label == kOuterLayer && body.layers[i].particles.size() >= 3) loops.push_back(i);
  }
  return loops;
}

double enclosed_area(const SoftBody& body) {
  double area = 0.0;
  for (std::size_t index : outer_loops(body)) {
    const auto& ids = body.layers[index].particles;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Vec3& a = body.particles[static_cast<std::size_t>(ids[i])].position;
      const Vec3& b = body.particles[static_cast<std::size_t>(ids[(i + 1) % ids.size()])].position;
      area += 0.5 * (a.x * b.y - b.x * a.y);
    }
  }
  return area;
}

void refresh_spring_normals(SoftBody& body) {
  for (Spring& s : body.springs) s.normal = {};
  for (const Face& f : body.faces) {
    const Vec3& p1 = body.particles[static_cast<std::size_t>(f.vertices[0])].position;
    const Vec3& p2 = body.particles[static_cast<std::size_t>(f.vertices[1])].position;
    const Vec3& p3 = body.particles[static_cast<std::size_t>(f.vertices[2])].position;
    const Vec3 n = cross(p2 - p1, p3 - p1);
    const double len = norm(n);
    if (len <= 0.0) continue;
    for (int id : f.springs) {
      if (Spring* s = body.find_spring(id)) s->normal += n / len;
    }
  }
  for (Spring& s : body.springs) {
    const double len = norm(s.normal);
    if (len > 0.0) s.normal = s.normal / len;
  }
}

void validate(const SoftBody& body) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvariantViolation, what); };
  for (std::size_t i = 0; i < body.particles.size(); ++i) {
    const Particle& p = body.particles[i];
    if (p.id != static_cast<int>(i)) fail("particle ids must be dense and ordered");
    if (!(p.mass > 0.0) || !std::isfinite(p.mass)) fail("particle " + std::to_string(i) + " mass must be positive");
    for (const Vec3* v : {&p.position, &p.velocity, &p.acceleration, &p.accumulated_force}) {
      if (!is_finite(*v)) fail("particle " + std::to_string(i) + " has a non-finite vector");
      if (mask(*v, body.dimension) != *v) {
        fail("particle " + std::to_string(i) + " has components outside its dimension");
      }
    }
  }
  for (std::size_t i = 0; i < body.springs.size(); ++i) {
    const Spring& s = body.springs[i];
    if (i > 0 && body.springs[i - 1].id >= s.id) fail("spring ids must be strictly increasing");
    if (!resolves(body, s.head) || !resolves(body, s.tail)) fail("spring " + std::to_string(s.id) + " endpoint unresolved");
    if (s.head == s.tail) fail("spring " + std::to_string(s.id) + " is a self loop");
    if (!(s.rest_length >= 0.0) || !(s.hook_constant >= 0.0) || !(s.damping_factor >= 0.0)) {
      fail("spring " + std::to_string(s.id) + " has a negative parameter");
    }
  }
  if (body.dimension == Dimension::One) {
    if (!body.faces.empty()) fail("a 1-D body has no faces");
    if (body.pressure_coefficient) fail("a 1-D body has no pressure");
  }
  for (std::size_t i = 0; i < body.faces.size(); ++i) {
    const Face& f = body.faces[i];
    if (i > 0 && body.faces[i - 1].id >= f.id) fail("face ids must be strictly increasing");
    for (int v : f.vertices) {
      if (!resolves(body, v)) fail("face " + std::to_string(f.id) + " vertex unresolved");
    }
    if (f.vertices[0] == f.vertices[1] || f.vertices[1] == f.vertices[2] || f.vertices[0] == f.vertices[2]) {
      fail("face " + std::to_string(f.id) + " repeats a vertex");
    }
    for (std::size_t e = 0; e < 3; ++e) {
      const Spring* s = body.find_spring(f.springs[e]);
      const int a = f.vertices[e];
      const int b = f.vertices[(e + 1) % 3];
      if (s == nullptr || !((s->head == a && s->tail == b) || (s->head == b && s->tail == a))) {
        fail("face " + std::to_string(f.id) + " edge spring mismatch");
      }
    }
  }
  // Fracture may open the surface, so only orientation is checked here.
  std::set<std::pair<int, int>> directed;
  for (const Face& f : body.faces) {
    for (std::size_t e = 0; e < 3; ++e) {
      if (!directed.emplace(f.vertices[e], f.vertices[(e + 1) % 3]).second) {
        fail("face " + std::to_string(f.id) + " repeats a directed edge; surface is not consistently oriented");
      }
    }
  }
  for (const Layer& l : body.layers) {
    for (int id : l.particles) {
      if (!resolves(body, id)) fail("layer " + l.label + " references unknown particle");
    }
  }
  if (body.pressure_coefficient && !(*body.pressure_coefficient >= 0.0)) fail("pressure coefficient must be non-negative");
}

TriMesh uv_sphere(int segments, int rings, double radius) {
  TriMesh mesh;
  mesh.vertices.push_back({0.0, radius, 0.0});
  for (int r = 1; r <= rings; ++r) {
    const double theta = std::numbers::pi * r / (rings + 1);
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      mesh.vertices.push_back(
          {radius * std::sin(theta) * std::cos(phi), radius * std::cos(theta), radius * std::sin(theta) * std::sin(phi)});
    }
  }
  mesh.vertices.push_back({0.0, -radius, 0.0});
  const int south = static_cast<int>(mesh.vertices.size()) - 1;
  auto ring = [segments](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };

  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({0, ring(1, s + 1), ring(1, s)});
  for (int r = 1; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      mesh.triangles.push_back({ring(r, s), ring(r, s + 1), ring(r + 1, s + 1)});
      mesh.triangles.push_back({ring(r, s), ring(r + 1, s + 1), ring(r + 1, s)});
    }
  }
  for (int s = 0; s < segments; ++s) mesh.triangles.push_back({south, ring(rings, s), ring(rings, s + 1)});

  double volume = 0.0;
  for (const auto& t : mesh.triangles) {
    volume += dot(mesh.vertices[static_cast<std::size_t>(t[0])],
                  cross(mesh.vertices[static_cast<std::size_t>(t[1])], mesh.vertices[static_cast<std::size_t>(t[2])]));
  }
  if (volume < 0.0) {
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  }
  return mesh;
}

std::vector<std::array<int, 2>> mesh_edges(const TriMesh& mesh) {
  std::vector<std::array<int, 2>> edges;
  std::set<std::pair<int, int>> seen;
  for (const auto& t : mesh.triangles) {
    for (std::size_t e = 0; e < 3; ++e) {
      const int a = t[e];
      const int b = t[(e + 1) % 3];
      const std::pair key{std::min(a, b), std::max(a, b)};
      if (seen.insert(key).second) edges.push_back({a, b});
    }
  }
  return edges;
}

std::array<int, 2> sphere_resolution(int vertex_count) {
  const int band = vertex_count - 2;
  std::array<int, 2> best{band, 1};
  double best_score = std::abs(static_cast<double>(band) - 4.0 / 3.0);
  for (int rings = 1; rings <= band; ++rings) {
    if (band % rings != 0) continue;
    const int segments = band / rings;
    if (segments < 3) continue;
    const double score = std::abs(static_cast<double>(segments) / rings - 4.0 / 3.0);
    if (score < best_score) {
      best_score = score;
      best = {segments, rings};
    }
  }
  return best;
}

}  // namespace softbody
