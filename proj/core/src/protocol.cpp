#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <map>

#include "codec.hpp"
#include "softbody/server.hpp"

namespace softbody::server {

using codec::json;

namespace {

Error bad_request(const std::string& message) { return Error(ErrorCode::BadRequest, message); }

// Requests may spell keys in camelCase; everything is matched in snake_case.
// Embedded documents keep their own file-format spelling.
std::string snake(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      out += '_';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += c;
    }
  }
  return out;
}

json normalize_keys(const json& j) {
  if (j.is_array()) {
    json out = json::array();
    for (const json& e : j) out.push_back(normalize_keys(e));
    return out;
  }
  if (!j.is_object()) return j;
  json out = json::object();
  for (const auto& [key, value] : j.items()) {
    const std::string k = snake(key);
    out[k] = k == "document" ? value : normalize_keys(value);
  }
  return out;
}

const json* find(const json& req, const char* key) {
  auto it = req.find(key);
  return it == req.end() || it->is_null() ? nullptr : &*it;
}

const json& need(const json& req, const char* key) {
  const json* v = find(req, key);
  if (!v) throw bad_request(std::string("missing field '") + key + "'");
  return *v;
}

int need_int(const json& req, const char* key) {
  const json& v = need(req, key);
  if (!v.is_number_integer()) throw bad_request(std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

double get_number(const json& v, const char* key) {
  if (!v.is_number()) throw bad_request(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::string get_string(const json& v, const char* key) {
  if (!v.is_string()) throw bad_request(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const char* key) {
  if (!v.is_boolean()) throw bad_request(std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

Vec3 get_vec3(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
    throw bad_request(std::string("'") + key + "' must be an array of three numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::optional<double> opt_number(const json& req, const char* key) {
  const json* v = find(req, key);
  return v ? std::optional<double>(get_number(*v, key)) : std::nullopt;
}

std::optional<Vec3> opt_vec3(const json& req, const char* key) {
  const json* v = find(req, key);
  return v ? std::optional<Vec3>(get_vec3(*v, key)) : std::nullopt;
}

std::vector<int> particle_ids(const json& req) {
  if (const json* one = find(req, "particle_id")) {
    if (!one->is_number_integer()) throw bad_request("'particle_id' must be an integer");
    return {one->get<int>()};
  }
  const json& many = need(req, "particle_ids");
  if (!many.is_array()) throw bad_request("'particle_ids' must be an array of integers");
  std::vector<int> ids;
  for (const json& e : many) {
    if (!e.is_number_integer()) throw bad_request("'particle_ids' must be an array of integers");
    ids.push_back(e.get<int>());
  }
  return ids;
}

// Documents travel either as embedded JSON or as the file text itself.
std::string document_text(const json& req) {
  const json& doc = need(req, "document");
  if (doc.is_string()) return doc.get<std::string>();
  if (!doc.is_object()) throw bad_request("'document' must be an object or a string");
  return codec::compact(doc);
}

json vec_list(const std::vector<Vec3>& vs) {
  json out = json::array();
  for (const Vec3& v : vs) out.push_back(json::array({v.x, v.y, v.z}));
  return out;
}

ParamPatch patch_from(const json& req) {
  ParamPatch p;
  p.gravity = opt_vec3(req, "gravity");
  p.drag_coefficient = opt_number(req, "drag_coefficient");
  p.pressure_coefficient = opt_number(req, "pressure_coefficient");
  p.hook_constant = opt_number(req, "hook_constant");
  p.damping_factor = opt_number(req, "damping_factor");
  p.particle_mass = opt_number(req, "particle_mass");
  if (const json* v = find(req, "particle_count")) {
    if (!v->is_number_integer()) throw bad_request("'particle_count' must be an integer");
    p.particle_count = v->get<int>();
  }
  p.velocity = opt_vec3(req, "velocity");
  p.acceleration = opt_vec3(req, "acceleration");
  p.time_step_override = opt_number(req, "time_step_override");
  if (const json* v = find(req, "clear_time_step_override")) p.clear_time_step_override = get_bool(*v, "clear_time_step_override");
  p.frame_rate = opt_number(req, "frame_rate");
  p.elastic_limit = opt_number(req, "elastic_limit");
  p.plastic_rate = opt_number(req, "plastic_rate");
  p.fracture_strain = opt_number(req, "fracture_strain");
  if (const json* v = find(req, "part_collisions")) p.part_collisions = get_bool(*v, "part_collisions");
  return p;
}

bool empty(const ParamPatch& p) {
  return !p.gravity && !p.drag_coefficient && !p.pressure_coefficient && !p.hook_constant && !p.damping_factor &&
         !p.particle_mass && !p.particle_count && !p.velocity && !p.acceleration && !p.time_step_override &&
         !p.clear_time_step_override && !p.frame_rate && !p.elastic_limit && !p.plastic_rate && !p.fracture_strain &&
         !p.part_collisions;
}

json describe(const Simulation& sim) {
  return {{"instance_id", sim.id()},
          {"status", std::string(to_string(sim.status()))},
          {"tick", sim.tick()},
          {"sim_time", sim.sim_time()},
          {"dimension", to_int(sim.body().dimension)},
          {"particle_count", sim.body().particles.size()},
          {"spring_count", sim.body().springs.size()},
          {"integrator", sim.integrator_name()},
          {"detector", sim.detector_name()},
          {"effective_time_step", sim.effective_time_step()}};
}

json frame_message(const Frame& f, int subscription_id) {
  const FrameDiagnostics& d = f.diagnostics;
  json diagnostics{{"kinetic_energy", d.kinetic_energy},
                   {"potential_energy", d.potential_energy},
                   {"total_energy", d.total_energy},
                   {"volume", d.volume ? json(*d.volume) : json(nullptr)},
                   {"contacts", d.contacts},
                   {"zero_length_springs", d.zero_length_springs},
                   {"degenerate_normals", d.degenerate_normals}};
  return {{"type", "frame"},
          {"instance_id", f.instance_id},
          {"subscription_id", subscription_id},
          {"tick", f.tick},
          {"sim_time", f.sim_time},
          {"status", std::string(to_string(f.status))},
          {"positions", vec_list(f.positions)},
          {"velocities", vec_list(f.velocities)},
          {"broken_spring_ids", f.broken_spring_ids},
          {"diagnostics", std::move(diagnostics)}};
}

json error_message(ErrorCode code, const std::string& message) {
  return {{"type", "error"}, {"code", std::string(to_string(code))}, {"message", message}};
}

// Error::what() carries a "CODE: " prefix that the wire keeps in `code`.
std::string plain(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

}  // namespace

struct Session::Dispatch {
  using Handler = json (*)(Session&, const json&);

  static const std::vector<std::pair<std::string, Handler>>& table() {
    static const std::vector<std::pair<std::string, Handler>> t = {
        {"catalog", catalog},
        {"create", create},
        {"import_object", import_object},
        {"import_state", import_state},
        {"get_object", get_object},
        {"start", start},
        {"pause", pause},
        {"resume", resume},
        {"step", step},
        {"set_params", set_params},
        {"swap_algorithm", swap_algorithm},
        {"apply_force", apply_force},
        {"drag", drag},
        {"attach", attach},
        {"add_instance", add_instance},
        {"save_state", save_state},
        {"start_series", start_series},
        {"stop_series", stop_series},
        {"start_playback", start_playback},
        {"stop_playback", stop_playback},
        {"subscribe", subscribe},
        {"unsubscribe", unsubscribe},
    };
    return t;
  }

  static json catalog_body(Session& s) {
    json integrators = json::array();
    for (const IntegratorSpec& spec : s.hub_.catalog().integrators.catalog()) {
      integrators.push_back({{"name", spec.name}, {"time_step", spec.time_step}});
    }
    json instances = json::array();
    for (int id : s.hub_.instance_ids()) {
      try {
        instances.push_back(s.hub_.execute(id, [](Simulation& sim) { return describe(sim); }));
      } catch (const Error&) {
        // Removed between listing and asking.
      }
    }
    return {{"integrators", std::move(integrators)},
            {"detectors", s.hub_.catalog().detectors.catalog()},
            {"instances", std::move(instances)},
            {"max_instances", s.hub_.max_instances()}};
  }

  static json catalog(Session& s, const json&) { return catalog_body(s); }

  static json created(Session& s, const Hub::Handle& h) {
    json out = s.hub_.execute(h.instance_id, [](Simulation& sim) { return describe(sim); });
    out["view_id"] = h.view_id;
    return out;
  }

  static SimStatus initial_status(const json& req) {
    const json* v = find(req, "start");
    return v && get_bool(*v, "start") ? SimStatus::Running : SimStatus::Paused;
  }

  // Builds the instance off-hub first so a rejected patch leaves nothing behind.
  static json launch(Session& s, SimulationSnapshot snap, const json& req) {
    if (const json* v = find(req, "integrator")) snap.integrator_name = get_string(*v, "integrator");
    if (const json* v = find(req, "detector")) snap.detector_name = get_string(*v, "detector");
    Simulation probe(0, std::move(snap), s.hub_.catalog_ptr(), SimStatus::Paused);
    const ParamPatch patch = patch_from(req);
    if (!empty(patch)) probe.set_params(patch);
    return created(s, s.hub_.create(probe.snapshot(), initial_status(req)));
  }

  static json create(Session& s, const json& req) {
    const json* dim = find(req, "dimension");
    if (dim && !dim->is_number_integer()) throw bad_request("'dimension' must be an integer");
    CreationParams cp = default_creation_params(dimension_from_int(dim ? dim->get<int>() : 2));
    if (const json* v = find(req, "particles_per_layer")) {
      if (!v->is_number_integer()) throw bad_request("'particles_per_layer' must be an integer");
      cp.particle_count = v->get<int>();
    }
    if (const json* v = find(req, "layer_count")) {
      if (!v->is_number_integer()) throw bad_request("'layer_count' must be an integer");
      cp.layer_count = v->get<int>();
    }
    if (auto v = opt_number(req, "total_mass")) cp.total_mass = *v;
    if (auto v = opt_number(req, "size")) cp.size = *v;
    if (cp.dimension != Dimension::One) cp.center = {0.0, kSpawnHeight, 0.0};
    if (auto v = opt_vec3(req, "center")) cp.center = *v;
    if (auto v = opt_vec3(req, "color")) cp.color = {v->x, v->y, v->z};
    SimulationSnapshot snap;
    snap.body = create_soft_body(cp);
    snap.environment = s.environment_->colliders;
    return launch(s, std::move(snap), req);
  }

  static json import_object(Session& s, const json& req) {
    SimulationSnapshot snap;
    snap.body = persistence::decode_object(document_text(req));
    snap.environment = s.environment_->colliders;
    return launch(s, std::move(snap), req);
  }

  static json import_state(Session& s, const json& req) {
    persistence::LoadedState loaded = persistence::decode_state(document_text(req), s.hub_.catalog());
    json out = created(s, s.hub_.create(std::move(loaded.snapshot), initial_status(req)));
    out["warnings"] = loaded.warnings;
    return out;
  }

  static json get_object(Session& s, const json& req) {
    const std::string text =
        s.hub_.execute(need_int(req, "instance_id"), [](Simulation& sim) { return persistence::encode_object(sim.body()); });
    return {{"document", codec::parse(text)}};
  }

  template <class F>
  static json on_instance(Session& s, const json& req, F&& fn) {
    return s.hub_.execute(need_int(req, "instance_id"), [&](Simulation& sim) {
      fn(sim);
      return describe(sim);
    });
  }

  static json start(Session& s, const json& req) {
    return on_instance(s, req, [](Simulation& sim) {
      if (sim.status() != SimStatus::Running) sim.resume();
    });
  }

  static json pause(Session& s, const json& req) {
    return on_instance(s, req, [](Simulation& sim) { sim.pause(); });
  }

  static json resume(Session& s, const json& req) {
    return on_instance(s, req, [](Simulation& sim) { sim.resume(); });
  }

  static json step(Session& s, const json& req) {
    int count = 1;
    if (const json* v = find(req, "count")) {
      if (!v->is_number_integer() || v->get<int>() < 1) throw bad_request("'count' must be a positive integer");
      count = v->get<int>();
    }
    return on_instance(s, req, [count](Simulation& sim) {
      for (int i = 0; i < count; ++i) {
        if (sim.status() == SimStatus::Playback) {
          sim.step_playback();
        } else {
          sim.advance_paused();
        }
      }
    });
  }

  static json set_params(Session& s, const json& req) {
    const ParamPatch patch = patch_from(req);
    return on_instance(s, req, [&](Simulation& sim) { sim.set_params(patch); });
  }

  static json swap_algorithm(Session& s, const json& req) {
    AlgorithmKind kind = AlgorithmKind::Integrator;
    if (const json* v = find(req, "kind")) {
      const std::string k = get_string(*v, "kind");
      if (k == "detector") {
        kind = AlgorithmKind::Detector;
      } else if (k != "integrator") {
        throw bad_request("'kind' must be \"integrator\" or \"detector\"");
      }
    }
    const std::string name = get_string(need(req, "name"), "name");
    return on_instance(s, req, [&](Simulation& sim) { sim.swap_algorithm(kind, name); });
  }

  static int steps_field(const json& req, const char* key, int fallback) {
    const json* v = find(req, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw bad_request(std::string("'") + key + "' must be an integer");
    return v->get<int>();
  }

  static json apply_force(Session& s, const json& req) {
    ExternalInput in;
    in.kind = InputKind::ImpulseForce;
    in.targets = particle_ids(req);
    in.force = get_vec3(need(req, "force"), "force");
    in.remaining_steps = steps_field(req, "remaining_steps", 1);
    return on_instance(s, req, [&](Simulation& sim) { sim.apply_user_force(in); });
  }

  static json drag(Session& s, const json& req) {
    ExternalInput in;
    in.kind = InputKind::Drag;
    in.targets = particle_ids(req);
    in.remaining_steps = steps_field(req, "remaining_steps", 1);
    // A release only names the particles.
    in.target_position = in.remaining_steps == 0 ? Vec3{} : get_vec3(need(req, "target"), "target");
    in.stiffness = in.remaining_steps == 0 ? 0.0 : get_number(need(req, "stiffness"), "stiffness");
    return on_instance(s, req, [&](Simulation& sim) { sim.apply_user_force(in); });
  }

  static json attach(Session& s, const json& req) {
    const int first = need_int(req, "instance_id");
    const int second = need_int(req, "other_instance_id");
    const json& pairs_json = need(req, "pairs");
    if (!pairs_json.is_array()) throw bad_request("'pairs' must be an array of [particle, other_particle]");
    SpringKind kind = SpringKind::Structural;
    if (const json* v = find(req, "spring_kind")) {
      auto k = spring_kind_from_string(get_string(*v, "spring_kind"));
      if (!k) throw bad_request("unknown spring kind");
      kind = *k;
    }
    const SpringConstants defaults = SpringDefaults{}.for_kind(kind);
    const double k = opt_number(req, "hook_constant").value_or(defaults.hook_constant);
    const double d = opt_number(req, "damping_factor").value_or(defaults.damping_factor);

    SimulationSnapshot base = s.hub_.execute(first, [](Simulation& sim) { return sim.snapshot(); });
    const SoftBody other = s.hub_.execute(second, [](Simulation& sim) { return sim.body(); });
    std::vector<AttachPair> pairs;
    for (const json& p : pairs_json) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
        throw bad_request("'pairs' must be an array of [particle, other_particle]");
      }
      pairs.push_back({{base.body.id, p[0].get<int>()}, {other.id, p[1].get<int>()}});
    }
    CombinedBody combined = attach_objects(base.body, other, pairs, kind, k, d);
    base.body = std::move(combined.body);
    base.tick = 0;
    base.sim_time = 0.0;
    base.pending_inputs.clear();
    return created(s, s.hub_.create(std::move(base), initial_status(req)));
  }

  static json add_instance(Session& s, const json& req) {
    const int source = need_int(req, "instance_id");
    const std::string mode = find(req, "mode") ? get_string(need(req, "mode"), "mode") : "new_algorithm";
    if (mode == "same_algorithm_new_view") {
      return created(s, s.hub_.add_instance(source, AddMode::SameAlgorithmNewView));
    }
    if (mode != "new_algorithm") throw bad_request("'mode' must be \"same_algorithm_new_view\" or \"new_algorithm\"");
    const std::string name = get_string(need(req, "integrator"), "integrator");
    return created(s, s.hub_.add_instance(source, AddMode::NewAlgorithm, name));
  }

  static json save_state(Session& s, const json& req) {
    const std::string text = s.hub_.execute(need_int(req, "instance_id"), [](Simulation& sim) {
      if (sim.status() == SimStatus::Playback) {
        throw Error(ErrorCode::WrongStatus, "stop playback before saving the live state");
      }
      return persistence::encode_state(sim.snapshot());
    });
    return {{"document", codec::parse(text)}};
  }

  static json start_series(Session& s, const json& req) {
    const int stride = steps_field(req, "stride", 1);
    const json* inc = find(req, "include_current");
    const bool include_current = inc && get_bool(*inc, "include_current");
    return on_instance(s, req, [&](Simulation& sim) { sim.start_recording(stride, include_current); });
  }

  static json stop_series(Session& s, const json& req) {
    const std::string text = s.hub_.execute(need_int(req, "instance_id"), [](Simulation& sim) {
      return persistence::encode_series(sim.stop_recording());
    });
    json doc = codec::parse(text);
    const std::size_t frames = doc["frames"].size();
    return {{"document", std::move(doc)}, {"frame_count", frames}};
  }

  static json start_playback(Session& s, const json& req) {
    Series series = persistence::decode_series(document_text(req));
    const std::size_t frames = series.frames.size();
    json out = on_instance(s, req, [&](Simulation& sim) { sim.start_playback(std::move(series)); });
    out["frame_count"] = frames;
    return out;
  }

  static json stop_playback(Session& s, const json& req) {
    return on_instance(s, req, [](Simulation& sim) { sim.stop_playback(); });
  }

  static json subscribe(Session& s, const json& req) {
    const int instance = need_int(req, "instance_id");
    const double rate = find(req, "rate_hz") ? get_number(need(req, "rate_hz"), "rate_hz") : 30.0;
    std::shared_ptr<const Outbound> out = s.out_;
    auto id = std::make_shared<std::atomic<int>>(0);
    // The sink runs on the stepping thread: encode and hand off, nothing more.
    std::lock_guard lock(s.mutex_);
    *id = s.hub_.subscribe(instance, rate, [out, id](const InstanceEvent& e) {
      if (*id == 0) return;
      if (e.kind == InstanceEvent::Kind::Frame) {
        (*out)(codec::compact(frame_message(e.frame, id->load())), true);
      } else {
        json msg = error_message(e.code, e.message);
        msg["instance_id"] = e.instance_id;
        msg["subscription_id"] = id->load();
        (*out)(codec::compact(msg), false);
      }
    });
    s.subscriptions_.push_back(id->load());
    return {{"instance_id", instance}, {"subscription_id", id->load()}, {"rate_hz", rate}};
  }

  static json unsubscribe(Session& s, const json& req) {
    const int id = need_int(req, "subscription_id");
    {
      std::lock_guard lock(s.mutex_);
      auto it = std::find(s.subscriptions_.begin(), s.subscriptions_.end(), id);
      if (it == s.subscriptions_.end()) throw bad_request("no subscription " + std::to_string(id) + " on this connection");
      s.subscriptions_.erase(it);
    }
    s.hub_.unsubscribe(id);
    return {{"subscription_id", id}};
  }
};

const std::vector<std::string>& request_types() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, handler] : Session::Dispatch::table()) n.push_back(name);
    return n;
  }();
  return names;
}

Session::Session(Hub& hub, std::shared_ptr<const persistence::Environment> environment, Outbound out)
    : hub_(hub),
      environment_(environment ? std::move(environment) : std::make_shared<const persistence::Environment>()),
      out_(std::make_shared<const Outbound>(std::move(out))) {}

Session::~Session() { close(); }

void Session::close() {
  std::vector<int> subs;
  {
    std::lock_guard lock(mutex_);
    subs.swap(subscriptions_);
  }
  for (int id : subs) hub_.unsubscribe(id);
}

void Session::send(const std::string& text, bool droppable) { (*out_)(text, droppable); }

void Session::open() {
  json hello = Dispatch::catalog_body(*this);
  hello["type"] = "catalog";
  send(codec::compact(hello));
}

void Session::handle(std::string_view text) {
  json req;
  try {
    req = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    send(codec::compact(error_message(ErrorCode::ParseError, "message is not valid JSON")));
    return;
  }
  if (!req.is_object()) {
    send(codec::compact(error_message(ErrorCode::BadRequest, "message must be a JSON object")));
    return;
  }
  req = normalize_keys(req);
  json request_id;
  if (auto it = req.find("request_id"); it != req.end()) request_id = *it;
  std::string type;
  if (auto it = req.find("type"); it != req.end() && it->is_string()) type = it->get<std::string>();

  json reply;
  try {
    if (type.empty()) throw bad_request("message needs a string 'type'");
    const auto& table = Dispatch::table();
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& entry) { return entry.first == type; });
    if (it == table.end()) throw Error(ErrorCode::UnknownType, "unknown message type '" + type + "'");
    reply = it->second(*this, req);
    reply["type"] = "ack";
  } catch (const Error& e) {
    reply = error_message(e.code(), plain(e));
  } catch (const json::exception& e) {
    reply = error_message(ErrorCode::BadRequest, e.what());
  } catch (const std::exception& e) {
    reply = error_message(ErrorCode::BadRequest, e.what());
  }
  if (!type.empty()) reply["request_type"] = type;
  if (!request_id.is_null()) reply["request_id"] = request_id;
  send(codec::compact(reply));
}

std::uint16_t resolve_port(std::uint16_t cli_port) {
  const char* env = std::getenv("SOFTBODY_PORT");
  if (!env || !*env) return cli_port;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (*end != '\0' || value < 0 || value > 65535) return cli_port;
  return static_cast<std::uint16_t>(value);
}

}  // namespace softbody::server
