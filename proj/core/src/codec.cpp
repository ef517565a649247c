#include "codec.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>

#include "softbody/persistence.hpp"

namespace softbody::codec {
namespace {

void write_number(std::string& out, const json& v) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::InvariantViolation, "cannot encode a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    out += buf;
    if (std::strpbrk(buf, ".e") == nullptr) out += ".0";
  } else {
    out += v.dump();
  }
}

bool is_scalar_array(const json& v) {
  for (const json& e : v) {
    if (e.is_structured()) return false;
  }
  return true;
}

void write(std::string& out, const json& v, int indent, bool pretty) {
  const std::string pad = pretty ? std::string(static_cast<std::size_t>(indent + 2), ' ') : std::string();
  const std::string close_pad = pretty ? std::string(static_cast<std::size_t>(indent), ' ') : std::string();
  const char* nl = pretty ? "\n" : "";
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{";
    out += nl;
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) {
        out += ",";
        out += nl;
      }
      first = false;
      out += pad;
      out += json(it.key()).dump();
      out += pretty ? ": " : ":";
      write(out, it.value(), indent + 2, pretty);
    }
    out += nl;
    out += close_pad;
    out += "}";
  } else if (v.is_array()) {
    if (v.empty() || is_scalar_array(v) || !pretty) {
      out += "[";
      bool first = true;
      for (const json& e : v) {
        if (!first) out += pretty ? ", " : ",";
        first = false;
        write(out, e, indent, pretty);
      }
      out += "]";
      return;
    }
    out += "[\n";
    bool first = true;
    for (const json& e : v) {
      if (!first) out += ",\n";
      first = false;
      out += pad;
      write(out, e, indent + 2, pretty);
    }
    out += "\n";
    out += close_pad;
    out += "]";
  } else if (v.is_number()) {
    write_number(out, v);
  } else {
    out += v.dump();
  }
}

double num(const json& j, const char* key) { return field(j, key).get<double>(); }
int integer(const json& j, const char* key) { return field(j, key).get<int>(); }

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

Vec3 vec3_or(const json& j, const char* key, Vec3 fallback = {}) {
  auto it = j.find(key);
  return it == j.end() ? fallback : vec3_from(*it);
}

std::string_view kind_name(ColliderKind k) { return k == ColliderKind::HalfSpace ? "halfSpace" : "sphere"; }

}  // namespace

std::string canonical(const json& value) {
  std::string out;
  write(out, value, 0, true);
  out += "\n";
  return out;
}

std::string compact(const json& value) {
  std::string out;
  write(out, value, 0, false);
  return out;
}

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptDocument, std::string("not valid JSON: ") + e.what());
  }
}

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaMismatch, std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::SchemaMismatch, std::string("missing field '") + key + "'");
  return *it;
}

void require_document(const json& j, std::string_view kind) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaMismatch, "document must be a JSON object");
  auto version = j.find("formatVersion");
  if (version == j.end() || !version->is_number_integer()) {
    throw Error(ErrorCode::SchemaMismatch, "document lacks an integer formatVersion");
  }
  if (version->get<long long>() != persistence::kFormatVersion) {
    throw Error(ErrorCode::SchemaMismatch, "unsupported formatVersion " + version->dump());
  }
  auto doc = j.find("document");
  if (doc == j.end() || !doc->is_string() || doc->get<std::string>() != kind) {
    throw Error(ErrorCode::SchemaMismatch, "expected a '" + std::string(kind) + "' document");
  }
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::SchemaMismatch, "a vector is an array of three numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const SoftBody& body) {
  json j;
  j["id"] = body.id;
  j["dimension"] = to_int(body.dimension);
  j["color"] = json::array({body.color.r, body.color.g, body.color.b});
  if (body.pressure_coefficient) j["pressureCoefficient"] = *body.pressure_coefficient;
  json layers = json::array();
  for (const Layer& l : body.layers) layers.push_back({{"label", l.label}, {"part", l.part}, {"particles", l.particles}});
  j["layers"] = std::move(layers);
  json particles = json::array();
  for (const Particle& p : body.particles) {
    particles.push_back({{"id", p.id},
                         {"mass", p.mass},
                         {"position", to_json(p.position)},
                         {"velocity", to_json(p.velocity)},
                         {"acceleration", to_json(p.acceleration)},
                         {"accumulatedForce", to_json(p.accumulated_force)},
                         {"pinned", p.pinned}});
  }
  j["particles"] = std::move(particles);
  json springs = json::array();
  for (const Spring& s : body.springs) {
    springs.push_back({{"id", s.id},
                       {"head", s.head},
                       {"tail", s.tail},
                       {"restLen", s.rest_length},
                       {"hookConstant", s.hook_constant},
                       {"dampingFactor", s.damping_factor},
                       {"kind", std::string(to_string(s.kind))}});
  }
  j["springs"] = std::move(springs);
  json faces = json::array();
  for (const Face& f : body.faces) faces.push_back({{"id", f.id}, {"vertices", f.vertices}, {"springs", f.springs}});
  j["faces"] = std::move(faces);
  return j;
}

SoftBody body_from(const json& j, Ids ids) {
  const bool remap = ids == Ids::Remap;
  SoftBody b;
  b.id = remap ? allocate_body_id() : integer(j, "id");
  try {
    b.dimension = dimension_from_int(integer(j, "dimension"));
  } catch (const Error&) {
    throw Error(ErrorCode::SchemaMismatch, "dimension must be 1, 2 or 3");
  }
  if (auto c = j.find("color"); c != j.end()) {
    const Vec3 rgb = vec3_from(*c);
    b.color = {rgb.x, rgb.y, rgb.z};
  }
  if (auto kp = j.find("pressureCoefficient"); kp != j.end()) b.pressure_coefficient = kp->get<double>();

  std::map<int, int> particle_index;
  const json& particles = field(j, "particles");
  for (const json& pj : particles) {
    Particle p;
    p.id = static_cast<int>(b.particles.size());
    const int old_id = remap ? value_or<int>(pj, "id", p.id) : integer(pj, "id");
    if (!particle_index.emplace(old_id, p.id).second) {
      throw Error(ErrorCode::SchemaMismatch, "duplicate particle id " + std::to_string(old_id));
    }
    // Imported objects without masses share the default total mass of 1 kg.
    p.mass = remap && !pj.contains("mass") ? 1.0 / static_cast<double>(particles.size()) : num(pj, "mass");
    p.position = vec3_from(field(pj, "position"));
    p.velocity = vec3_or(pj, "velocity");
    p.acceleration = vec3_or(pj, "acceleration");
    p.accumulated_force = vec3_or(pj, "accumulatedForce");
    p.pinned = value_or<bool>(pj, "pinned", false);
    if (!remap && old_id != p.id) throw Error(ErrorCode::InvariantViolation, "particle ids must be dense and ordered");
    b.particles.push_back(p);
  }
  auto particle = [&](const json& v) {
    auto it = particle_index.find(v.get<int>());
    if (it == particle_index.end()) {
      throw Error(ErrorCode::InvariantViolation, "reference to unknown particle " + v.dump());
    }
    return it->second;
  };

  std::map<int, int> spring_index;
  const SpringDefaults defaults;
  if (auto springs = j.find("springs"); springs != j.end()) {
    for (const json& sj : *springs) {
      Spring s;
      s.id = remap ? static_cast<int>(b.springs.size()) : integer(sj, "id");
      if (auto id = sj.find("id"); id != sj.end() && !spring_index.emplace(id->get<int>(), s.id).second) {
        throw Error(ErrorCode::SchemaMismatch, "duplicate spring id " + id->dump());
      }
      s.head = particle(field(sj, "head"));
      s.tail = particle(field(sj, "tail"));
      const std::string kind = value_or<std::string>(sj, "kind", "structural");
      const auto parsed = spring_kind_from_string(kind);
      if (!parsed) throw Error(ErrorCode::SchemaMismatch, "unknown spring kind '" + kind + "'");
      s.kind = *parsed;
      const SpringConstants& k = defaults.for_kind(s.kind);
      s.hook_constant = value_or<double>(sj, "hookConstant", k.hook_constant);
      s.damping_factor = value_or<double>(sj, "dampingFactor", k.damping_factor);
      s.rest_length = value_or<double>(sj, "restLen", norm(b.particles[static_cast<std::size_t>(s.tail)].position -
                                                            b.particles[static_cast<std::size_t>(s.head)].position));
      b.springs.push_back(s);
    }
  }

  if (auto faces = j.find("faces"); faces != j.end()) {
    if (!faces->empty() && b.dimension == Dimension::One) {
      throw Error(ErrorCode::InvariantViolation, "a 1-D body has no faces");
    }
    for (const json& fj : *faces) {
      const json& vj = field(fj, "vertices");
      if (!vj.is_array() || vj.size() != 3) throw Error(ErrorCode::SchemaMismatch, "a face has three vertices");
      const int v1 = particle(vj[0]), v2 = particle(vj[1]), v3 = particle(vj[2]);
      auto sj = fj.find("springs");
      if (remap && sj == fj.end()) {
        add_face(b, v1, v2, v3);
        continue;
      }
      Face f;
      f.id = remap ? b.next_face_id() : integer(fj, "id");
      f.vertices = {v1, v2, v3};
      const json& springs = remap ? *sj : field(fj, "springs");
      if (!springs.is_array() || springs.size() != 3) throw Error(ErrorCode::SchemaMismatch, "a face has three springs");
      for (std::size_t e = 0; e < 3; ++e) {
        const int old_id = springs[e].get<int>();
        if (remap) {
          auto it = spring_index.find(old_id);
          if (it == spring_index.end()) throw Error(ErrorCode::InvariantViolation, "face references unknown spring");
          f.springs[e] = it->second;
        } else {
          f.springs[e] = old_id;
        }
      }
      b.faces.push_back(f);
    }
  }

  if (auto layers = j.find("layers"); layers != j.end()) {
    for (const json& lj : *layers) {
      Layer l;
      l.label = field(lj, "label").get<std::string>();
      l.part = value_or<int>(lj, "part", 0);
      for (const json& id : field(lj, "particles")) l.particles.push_back(particle(id));
      b.layers.push_back(std::move(l));
    }
  } else {
    Layer l{std::string(kOuterLayer), {}, 0};
    for (const Particle& p : b.particles) l.particles.push_back(p.id);
    b.layers.push_back(std::move(l));
  }
  if (remap && b.dimension != Dimension::One && !b.pressure_coefficient) b.pressure_coefficient = 0.0;
  refresh_spring_normals(b);
  validate(b);
  return b;
}

json to_json(const SimParams& p) {
  json j{{"gravity", to_json(p.forces.gravity)},
         {"dragCoefficient", p.forces.drag_coefficient},
         {"elasticLimit", p.forces.elastic_limit},
         {"plasticRate", p.forces.plastic_rate},
         {"fractureStrain", p.forces.fracture_strain},
         {"frameRate", p.frame_rate},
         {"partCollisions", p.part_collisions}};
  if (p.forces.pressure_coefficient) j["pressureCoefficient"] = *p.forces.pressure_coefficient;
  if (p.time_step_override) j["timeStepOverride"] = *p.time_step_override;
  return j;
}

SimParams params_from(const json& j) {
  SimParams p;
  p.forces.gravity = vec3_or(j, "gravity", p.forces.gravity);
  p.forces.drag_coefficient = value_or<double>(j, "dragCoefficient", p.forces.drag_coefficient);
  p.forces.elastic_limit = value_or<double>(j, "elasticLimit", p.forces.elastic_limit);
  p.forces.plastic_rate = value_or<double>(j, "plasticRate", p.forces.plastic_rate);
  p.forces.fracture_strain = value_or<double>(j, "fractureStrain", p.forces.fracture_strain);
  p.frame_rate = value_or<double>(j, "frameRate", p.frame_rate);
  p.part_collisions = value_or<bool>(j, "partCollisions", p.part_collisions);
  if (auto it = j.find("pressureCoefficient"); it != j.end()) p.forces.pressure_coefficient = it->get<double>();
  if (auto it = j.find("timeStepOverride"); it != j.end()) p.time_step_override = it->get<double>();
  return p;
}

json to_json(const Collider& c) {
  json j{{"kind", std::string(kind_name(c.kind))},
         {"point", to_json(c.point)},
         {"contactStiffness", c.contact_stiffness},
         {"contactDamping", c.contact_damping}};
  if (c.kind == ColliderKind::HalfSpace) {
    j["normal"] = to_json(c.normal);
  } else {
    j["radius"] = c.radius;
  }
  return j;
}

Collider collider_from(const json& j) {
  Collider c;
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "halfSpace") {
    c.kind = ColliderKind::HalfSpace;
    c.normal = vec3_from(field(j, "normal"));
  } else if (kind == "sphere") {
    c.kind = ColliderKind::Sphere;
    c.radius = num(j, "radius");
  } else {
    throw Error(ErrorCode::SchemaMismatch, "unknown collider kind '" + kind + "'");
  }
  c.point = vec3_from(field(j, "point"));
  c.contact_stiffness = value_or<double>(j, "contactStiffness", c.contact_stiffness);
  c.contact_damping = value_or<double>(j, "contactDamping", c.contact_damping);
  validate(c);
  return c;
}

json to_json(const ExternalInput& in) {
  return {{"kind", in.kind == InputKind::ImpulseForce ? "impulseForce" : "drag"},
          {"targets", in.targets},
          {"force", to_json(in.force)},
          {"targetPosition", to_json(in.target_position)},
          {"stiffness", in.stiffness},
          {"remainingSteps", in.remaining_steps}};
}

ExternalInput input_from(const json& j) {
  ExternalInput in;
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "impulseForce") {
    in.kind = InputKind::ImpulseForce;
  } else if (kind == "drag") {
    in.kind = InputKind::Drag;
  } else {
    throw Error(ErrorCode::SchemaMismatch, "unknown input kind '" + kind + "'");
  }
  in.targets = field(j, "targets").get<std::vector<int>>();
  in.force = vec3_from(field(j, "force"));
  in.target_position = vec3_from(field(j, "targetPosition"));
  in.stiffness = num(j, "stiffness");
  in.remaining_steps = integer(j, "remainingSteps");
  return in;
}

json to_json(const SeriesFrame& f) {
  json positions = json::array();
  json velocities = json::array();
  for (const Vec3& p : f.positions) positions.push_back(to_json(p));
  for (const Vec3& v : f.velocities) velocities.push_back(to_json(v));
  return {{"tick", f.tick},
          {"simTime", f.sim_time},
          {"positions", std::move(positions)},
          {"velocities", std::move(velocities)},
          {"brokenSpringIds", f.broken_spring_ids}};
}

SeriesFrame series_frame_from(const json& j) {
  SeriesFrame f;
  f.tick = field(j, "tick").get<std::int64_t>();
  f.sim_time = num(j, "simTime");
  for (const json& p : field(j, "positions")) f.positions.push_back(vec3_from(p));
  for (const json& v : field(j, "velocities")) f.velocities.push_back(vec3_from(v));
  f.broken_spring_ids = field(j, "brokenSpringIds").get<std::vector<int>>();
  if (f.positions.size() != f.velocities.size()) {
    throw Error(ErrorCode::SchemaMismatch, "frame positions and velocities differ in length");
  }
  return f;
}

}  // namespace softbody::codec
