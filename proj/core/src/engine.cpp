#include "softbody/engine.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace softbody {
namespace {

StateVector to_state(const SoftBody& body) {
  StateVector s;
  s.reserve(body.particles.size());
  for (const Particle& p : body.particles) s.push_back({p.position, p.velocity, p.pinned});
  return s;
}

std::vector<int> part_membership(const SoftBody& body) {
  std::vector<int> part_of(body.particles.size(), 0);
  for (const Layer& l : body.layers) {
    for (int id : l.particles) part_of[static_cast<std::size_t>(id)] = l.part;
  }
  return part_of;
}

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidParams, std::string(what) + " must be positive");
}

void require_finite_non_negative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidParams, std::string(what) + " must be non-negative");
  }
}

double layer_mean_radius(const SoftBody& body, const Layer& layer, const Vec3& center) {
  double sum = 0.0;
  for (int id : layer.particles) sum += norm(body.particles[static_cast<std::size_t>(id)].position - center);
  return layer.particles.empty() ? 0.0 : sum / static_cast<double>(layer.particles.size());
}

}  // namespace

void validate(const SimParams& params) {
  validate(params.forces);
  if (params.time_step_override) require_finite_positive(*params.time_step_override, "time step override");
  require_finite_positive(params.frame_rate, "frame rate");
}

std::string_view to_string(SimStatus status) {
  switch (status) {
    case SimStatus::Running: return "running";
    case SimStatus::Paused: return "paused";
    case SimStatus::Playback: return "playback";
  }
  return "paused";
}

std::shared_ptr<AlgorithmCatalog> AlgorithmCatalog::with_builtins() {
  auto catalog = std::make_shared<AlgorithmCatalog>();
  catalog->integrators.add_builtins();
  catalog->detectors.add_builtins();
  return catalog;
}

SoftBody rebuild_with_particle_count(const SoftBody& body, int particle_count) {
  int parts = 0;
  for (const Layer& l : body.layers) parts = std::max(parts, l.part + 1);
  if (parts > 1) throw Error(ErrorCode::InvalidParams, "an attached body cannot be rebuilt");
  if (body.layers.empty() || body.particles.empty()) {
    throw Error(ErrorCode::InvalidParams, "body has no layers to rebuild from");
  }

  const int layers = static_cast<int>(body.layers.size());
  if (particle_count <= 0 || particle_count % layers != 0) {
    throw Error(ErrorCode::InvalidParams,
                "particle count must be a positive multiple of the layer count (" + std::to_string(layers) + ")");
  }
  CreationParams p = default_creation_params(body.dimension);
  p.particle_count = particle_count / layers;
  p.layer_count = layers;
  p.total_mass = body.total_mass();
  p.color = body.color;
  p.pressure_coefficient = body.pressure_coefficient.value_or(0.0);
  for (SpringKind kind : {SpringKind::Structural, SpringKind::Radius, SpringKind::Shear}) {
    auto it = std::find_if(body.springs.begin(), body.springs.end(), [kind](const Spring& s) { return s.kind == kind; });
    if (it == body.springs.end()) continue;
    SpringConstants& k = kind == SpringKind::Structural ? p.springs.structural
                         : kind == SpringKind::Radius   ? p.springs.radius
                                                        : p.springs.shear;
    k = {it->hook_constant, it->damping_factor};
  }

  const Layer& outer = body.layers.front();
  Vec3 outer_center;
  for (int id : outer.particles) outer_center += body.particles[static_cast<std::size_t>(id)].position;
  outer_center = outer_center / static_cast<double>(std::max<std::size_t>(outer.particles.size(), 1));
  if (body.dimension == Dimension::One) {
    double lo = outer_center.x;
    double hi = outer_center.x;
    for (int id : outer.particles) {
      lo = std::min(lo, body.particles[static_cast<std::size_t>(id)].position.x);
      hi = std::max(hi, body.particles[static_cast<std::size_t>(id)].position.x);
    }
    p.size = hi - lo;
  } else {
    p.size = layer_mean_radius(body, outer, outer_center);
    if (body.layers.size() > 1) {
      const double inner = layer_mean_radius(body, body.layers.back(), outer_center);
      p.inner_ratio = std::clamp(p.size > 0.0 ? inner / p.size : 0.5, 0.05, 0.95);
    }
  }
  if (!(p.size > 0.0)) throw Error(ErrorCode::InvalidParams, "body has collapsed; cannot infer its size");

  SoftBody rebuilt = create_soft_body(p);
  rebuilt.id = body.id;
  // Fold the rounding residue into the last particle so the summed mass is
  // bit-identical to the old total. The partial sum is within a factor of two
  // of the total, so the subtraction is exact.
  if (rebuilt.particles.size() > 1) {
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < rebuilt.particles.size(); ++i) head += rebuilt.particles[i].mass;
    rebuilt.particles.back().mass = p.total_mass - head;
  }

  double mass = 0.0;
  Vec3 momentum;
  for (const Particle& q : body.particles) {
    momentum += q.mass * q.velocity;
    mass += q.mass;
  }
  const Vec3 mean_velocity = mask(momentum / mass, body.dimension);
  const Vec3 shift = body.centroid() - rebuilt.centroid();
  for (Particle& q : rebuilt.particles) {
    q.position = mask(q.position + shift, body.dimension);
    q.velocity = mean_velocity;
  }
  refresh_spring_normals(rebuilt);
  return rebuilt;
}

Simulation::Simulation(int id, SimulationSnapshot snapshot, std::shared_ptr<const AlgorithmCatalog> catalog,
                       SimStatus status)
    : id_(id),
      catalog_(std::move(catalog)),
      body_(std::move(snapshot.body)),
      integrator_name_(std::move(snapshot.integrator_name)),
      detector_name_(std::move(snapshot.detector_name)),
      environment_(std::move(snapshot.environment)),
      params_(snapshot.params),
      tick_(snapshot.tick),
      sim_time_(snapshot.sim_time),
      status_(status == SimStatus::Playback ? SimStatus::Paused : status),
      pending_inputs_(std::move(snapshot.pending_inputs)) {
  if (!catalog_) throw Error(ErrorCode::InvalidParams, "simulation needs an algorithm catalog");
  validate(body_);
  validate(params_);
  for (const Collider& c : environment_) validate(c);
  if (!catalog_->integrators.contains(integrator_name_)) {
    throw Error(ErrorCode::UnknownAlgorithm, "no integrator named '" + integrator_name_ + "'");
  }
  if (!catalog_->detectors.contains(detector_name_)) {
    throw Error(ErrorCode::UnknownAlgorithm, "no detector named '" + detector_name_ + "'");
  }
}

double Simulation::effective_time_step() const {
  if (params_.time_step_override) return *params_.time_step_override;
  return catalog_->integrators.get(integrator_name_).spec.time_step;
}

void Simulation::require_not_playback(const char* what) const {
  if (status_ == SimStatus::Playback) {
    throw Error(ErrorCode::PlaybackImmutable, std::string(what) + " is not allowed during playback");
  }
}

Frame Simulation::step() {
  if (status_ != SimStatus::Running) {
    throw Error(ErrorCode::WrongStatus, "step needs a running instance, status is " + std::string(to_string(status_)));
  }
  return do_step();
}

Frame Simulation::advance_paused() {
  if (status_ != SimStatus::Paused) {
    throw Error(ErrorCode::WrongStatus, "single-step needs a paused instance, status is " + std::string(to_string(status_)));
  }
  return do_step();
}

Frame Simulation::do_step() {
  const IntegratorRegistry::Entry integrator = catalog_->integrators.get(integrator_name_);
  const DetectFunction detect = catalog_->detectors.get(detector_name_);
  const double dt = params_.time_step_override.value_or(integrator.spec.time_step);

  SoftBody work = body_;
  const std::vector<int> part_of = params_.part_collisions ? part_membership(body_) : std::vector<int>{};
  bool first_stage = true;
  std::vector<Particle> stage_one;
  ForceDiagnostics stage_diag;
  std::size_t degenerate = 0;
  std::size_t contacts = 0;

  const ForceEvaluator eval = [&](std::span<const ParticleState> state) {
    for (std::size_t i = 0; i < state.size(); ++i) {
      work.particles[i].position = state[i].position;
      work.particles[i].velocity = state[i].velocity;
    }
    const DetectionResult detected = detect(state, environment_);
    std::vector<PointForce> forces = contact_forces(detected.contacts, environment_);
    if (!part_of.empty()) {
      const Collider defaults;
      const auto proxy = part_proxy_forces(state, part_of, defaults.contact_stiffness, defaults.contact_damping);
      forces.insert(forces.end(), proxy.begin(), proxy.end());
    }
    const ForceDiagnostics diag = accumulate_forces(work, params_.forces, pending_inputs_, forces);
    std::vector<Vec3> accelerations;
    accelerations.reserve(work.particles.size());
    for (const Particle& p : work.particles) accelerations.push_back(p.acceleration);
    if (first_stage) {
      first_stage = false;
      stage_one = work.particles;
      stage_diag = diag;
      degenerate = detected.degenerate_normals;
      contacts = detected.contacts.size();
    }
    return accelerations;
  };

  StateVector next;
  try {
    next = integrator.step(to_state(body_), dt, eval);
    require_finite(next);
  } catch (const Error& e) {
    status_ = SimStatus::Paused;
    last_error_ = e.code();
    throw;
  }

  for (std::size_t i = 0; i < body_.particles.size(); ++i) {
    Particle& p = body_.particles[i];
    p.position = next[i].position;
    p.velocity = next[i].velocity;
    p.accumulated_force = stage_one[i].accumulated_force;
    p.acceleration = stage_one[i].acceleration;
  }
  std::vector<int> broken = apply_deformation_model(body_, params_.forces);
  apply_dimension_mask(body_);
  for (Particle& p : body_.particles) {
    if (p.pinned) p.velocity = {};
  }
  ++tick_;
  sim_time_ += dt;
  last_zero_length_ = stage_diag.zero_length_springs;
  last_degenerate_ = degenerate;
  last_contacts_ = contacts;

  for (ExternalInput& input : pending_inputs_) --input.remaining_steps;
  std::erase_if(pending_inputs_, [](const ExternalInput& in) { return in.remaining_steps <= 0; });

  if (recording_) {
    ++steps_since_record_start_;
    pending_broken_.insert(pending_broken_.end(), broken.begin(), broken.end());
    if (steps_since_record_start_ % recording_->header.stride == 0) {
      // Fractures from skipped steps ride along with the next recorded frame.
      SeriesFrame f{tick_, sim_time_, {}, {}, std::exchange(pending_broken_, {})};
      for (const Particle& p : body_.particles) {
        f.positions.push_back(p.position);
        f.velocities.push_back(p.velocity);
      }
      recording_->frames.push_back(std::move(f));
    }
  }
  return make_frame(std::move(broken));
}

FrameDiagnostics Simulation::diagnostics() const {
  FrameDiagnostics d;
  for (const Particle& p : body_.particles) {
    d.kinetic_energy += 0.5 * p.mass * dot(p.velocity, p.velocity);
    d.potential_energy -= p.mass * dot(params_.forces.gravity, p.position);
  }
  for (const Spring& s : body_.springs) {
    const double stretch = norm(body_.particles[static_cast<std::size_t>(s.tail)].position -
                                body_.particles[static_cast<std::size_t>(s.head)].position) -
                           s.rest_length;
    d.potential_energy += 0.5 * s.hook_constant * stretch * stretch;
  }
  d.total_energy = d.kinetic_energy + d.potential_energy;
  if (body_.dimension == Dimension::Three && is_closed_surface(body_.faces)) {
    d.volume = compute_volume(body_);
  } else if (body_.dimension == Dimension::Two && !outer_loops(body_).empty()) {
    d.volume = enclosed_area(body_);
  }
  d.contacts = last_contacts_;
  d.zero_length_springs = last_zero_length_;
  d.degenerate_normals = last_degenerate_;
  return d;
}

Frame Simulation::make_frame(std::vector<int> broken) const {
  Frame f;
  f.instance_id = id_;
  f.tick = tick_;
  f.sim_time = sim_time_;
  f.positions.reserve(body_.particles.size());
  f.velocities.reserve(body_.particles.size());
  for (const Particle& p : body_.particles) {
    f.positions.push_back(p.position);
    f.velocities.push_back(p.velocity);
  }
  f.broken_spring_ids = std::move(broken);
  f.diagnostics = diagnostics();
  f.status = status_;
  return f;
}

Frame Simulation::current_frame() const { return make_frame({}); }

void Simulation::pause() {
  if (status_ != SimStatus::Running) {
    throw Error(ErrorCode::WrongStatus, "pause needs a running instance, status is " + std::string(to_string(status_)));
  }
  status_ = SimStatus::Paused;
}

void Simulation::resume() {
  if (status_ != SimStatus::Paused) {
    throw Error(ErrorCode::WrongStatus, "resume needs a paused instance, status is " + std::string(to_string(status_)));
  }
  status_ = SimStatus::Running;
  last_error_.reset();
}

void Simulation::set_params(const ParamPatch& patch) {
  require_not_playback("changing parameters");

  SimParams params = params_;
  if (patch.gravity) params.forces.gravity = *patch.gravity;
  if (patch.drag_coefficient) params.forces.drag_coefficient = *patch.drag_coefficient;
  if (patch.elastic_limit) params.forces.elastic_limit = *patch.elastic_limit;
  if (patch.plastic_rate) params.forces.plastic_rate = *patch.plastic_rate;
  if (patch.fracture_strain) params.forces.fracture_strain = *patch.fracture_strain;
  if (patch.clear_time_step_override) params.time_step_override.reset();
  if (patch.time_step_override) params.time_step_override = *patch.time_step_override;
  if (patch.frame_rate) params.frame_rate = *patch.frame_rate;
  if (patch.part_collisions) params.part_collisions = *patch.part_collisions;
  validate(params);

  if (patch.pressure_coefficient) {
    require_finite_non_negative(*patch.pressure_coefficient, "pressure coefficient");
    if (body_.dimension == Dimension::One) throw Error(ErrorCode::InvalidParams, "1-D bodies carry no pressure");
    if (*patch.pressure_coefficient > 0.0 && body_.dimension == Dimension::Three && !is_closed_surface(body_.faces)) {
      throw Error(ErrorCode::NotEnclosed, "pressure needs a closed surface");
    }
  }
  if (patch.hook_constant) require_finite_non_negative(*patch.hook_constant, "hook constant");
  if (patch.damping_factor) require_finite_non_negative(*patch.damping_factor, "damping factor");
  if (patch.particle_mass) require_finite_positive(*patch.particle_mass, "particle mass");
  if (patch.velocity && !is_finite(*patch.velocity)) throw Error(ErrorCode::InvalidParams, "velocity must be finite");
  if (patch.acceleration && !is_finite(*patch.acceleration)) {
    throw Error(ErrorCode::InvalidParams, "acceleration must be finite");
  }

  SoftBody body = body_;
  std::vector<ExternalInput> inputs = pending_inputs_;
  if (patch.particle_count) {
    if (recording_) throw Error(ErrorCode::WrongStatus, "particle count cannot change while recording");
    body = rebuild_with_particle_count(body, *patch.particle_count);
    for (ExternalInput& in : inputs) {
      std::erase_if(in.targets, [&](int id) { return static_cast<std::size_t>(id) >= body.particles.size(); });
    }
    std::erase_if(inputs, [](const ExternalInput& in) { return in.targets.empty(); });
  }
  if (patch.pressure_coefficient) body.pressure_coefficient = *patch.pressure_coefficient;
  for (Spring& s : body.springs) {
    if (patch.hook_constant) s.hook_constant = *patch.hook_constant;
    if (patch.damping_factor) s.damping_factor = *patch.damping_factor;
  }
  for (Particle& p : body.particles) {
    if (patch.particle_mass) p.mass = *patch.particle_mass;
    if (patch.velocity) p.velocity = p.pinned ? Vec3{} : mask(*patch.velocity, body.dimension);
    if (patch.acceleration) p.acceleration = mask(*patch.acceleration, body.dimension);
  }

  params_ = params;
  body_ = std::move(body);
  pending_inputs_ = std::move(inputs);
}

void Simulation::swap_algorithm(AlgorithmKind kind, const std::string& name) {
  std::string& current = kind == AlgorithmKind::Integrator ? integrator_name_ : detector_name_;
  const bool known = kind == AlgorithmKind::Integrator ? catalog_->integrators.contains(name)
                                                       : catalog_->detectors.contains(name);
  if (!known) throw Error(ErrorCode::UnknownAlgorithm, "no algorithm named '" + name + "'");
  if (name == current) throw Error(ErrorCode::SameAlgorithm, "'" + name + "' is already in use");
  current = name;
}

void Simulation::apply_user_force(ExternalInput input) {
  require_not_playback("user interaction");
  if (input.targets.empty()) throw Error(ErrorCode::InvalidParams, "input has no target particles");
  for (int id : input.targets) {
    if (body_.find_particle(id) == nullptr) throw Error(ErrorCode::UnknownParticle, "particle " + std::to_string(id));
  }
  if (input.remaining_steps < 0) throw Error(ErrorCode::InvalidParams, "remaining steps must be non-negative");
  if (!is_finite(input.force) || !is_finite(input.target_position) || !(input.stiffness >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "input values must be finite and stiffness non-negative");
  }
  if (input.remaining_steps == 0) {
    // A zero-length drag is the pointer release: it ends any drag on those particles.
    if (input.kind == InputKind::Drag) {
      std::erase_if(pending_inputs_, [&](const ExternalInput& pending) {
        return pending.kind == InputKind::Drag &&
               std::any_of(pending.targets.begin(), pending.targets.end(), [&](int id) {
                 return std::find(input.targets.begin(), input.targets.end(), id) != input.targets.end();
               });
      });
    }
    return;
  }
  pending_inputs_.push_back(std::move(input));
}

Simulation Simulation::clone_with_integrator(int new_id, const std::string& integrator_name) const {
  if (!catalog_->integrators.contains(integrator_name)) {
    throw Error(ErrorCode::UnknownAlgorithm, "no integrator named '" + integrator_name + "'");
  }
  if (status_ == SimStatus::Playback) throw Error(ErrorCode::PlaybackImmutable, "cannot fork a playback instance");
  SimulationSnapshot s = snapshot();
  s.integrator_name = integrator_name;
  s.body.id = allocate_body_id();
  return Simulation(new_id, std::move(s), catalog_, status_);
}

SimulationSnapshot Simulation::snapshot() const {
  if (live_before_playback_) return *live_before_playback_;
  SimulationSnapshot s;
  s.body = body_;
  s.integrator_name = integrator_name_;
  s.detector_name = detector_name_;
  s.environment = environment_;
  s.params = params_;
  s.tick = tick_;
  s.sim_time = sim_time_;
  s.pending_inputs = pending_inputs_;
  return s;
}

void Simulation::start_recording(int stride, bool include_current) {
  require_not_playback("recording");
  if (recording_) throw Error(ErrorCode::WrongStatus, "already recording");
  if (stride < 1) throw Error(ErrorCode::InvalidParams, "stride must be at least 1");
  Series s;
  s.header.body = body_;
  s.header.params = params_;
  s.header.integrator_name = integrator_name_;
  s.header.detector_name = detector_name_;
  s.header.stride = stride;
  s.header.start_tick = tick_;
  if (include_current) {
    SeriesFrame f{tick_, sim_time_, {}, {}, {}};
    for (const Particle& p : body_.particles) {
      f.positions.push_back(p.position);
      f.velocities.push_back(p.velocity);
    }
    s.frames.push_back(std::move(f));
  }
  recording_ = std::move(s);
  steps_since_record_start_ = 0;
  pending_broken_.clear();
}

Series Simulation::stop_recording() {
  if (!recording_) throw Error(ErrorCode::WrongStatus, "not recording");
  Series s = std::move(*recording_);
  recording_.reset();
  return s;
}

void Simulation::start_playback(Series series) {
  if (series.frames.empty()) throw Error(ErrorCode::EmptySeries, "series has no frames");
  for (const SeriesFrame& f : series.frames) {
    if (f.positions.size() != series.header.body.particles.size()) {
      throw Error(ErrorCode::SchemaMismatch, "series frame does not match header topology");
    }
  }
  if (status_ != SimStatus::Playback) live_before_playback_ = snapshot();
  if (recording_) recording_.reset();
  body_ = series.header.body;
  pending_inputs_.clear();
  playback_ = std::move(series);
  playback_cursor_ = 0;
  status_ = SimStatus::Playback;
}

Frame Simulation::step_playback() {
  if (status_ != SimStatus::Playback || !playback_) throw Error(ErrorCode::WrongStatus, "instance is not in playback");
  if (playback_cursor_ >= playback_->frames.size()) throw Error(ErrorCode::EndOfSeries, "series exhausted");
  const SeriesFrame& f = playback_->frames[playback_cursor_++];
  for (std::size_t i = 0; i < body_.particles.size(); ++i) {
    body_.particles[i].position = f.positions[i];
    if (i < f.velocities.size()) body_.particles[i].velocity = f.velocities[i];
  }
  if (!f.broken_spring_ids.empty()) {
    std::erase_if(body_.springs, [&](const Spring& s) {
      return std::find(f.broken_spring_ids.begin(), f.broken_spring_ids.end(), s.id) != f.broken_spring_ids.end();
    });
    std::erase_if(body_.faces, [&](const Face& face) {
      return std::any_of(face.springs.begin(), face.springs.end(), [&](int id) {
        return std::find(f.broken_spring_ids.begin(), f.broken_spring_ids.end(), id) != f.broken_spring_ids.end();
      });
    });
  }
  tick_ = f.tick;
  sim_time_ = f.sim_time;
  Frame out;
  out.instance_id = id_;
  out.tick = f.tick;
  out.sim_time = f.sim_time;
  out.positions = f.positions;
  out.velocities = f.velocities;
  out.broken_spring_ids = f.broken_spring_ids;
  out.diagnostics = diagnostics();
  out.status = status_;
  return out;
}

void Simulation::stop_playback() {
  if (status_ != SimStatus::Playback || !live_before_playback_) {
    throw Error(ErrorCode::WrongStatus, "instance is not in playback");
  }
  SimulationSnapshot s = std::move(*live_before_playback_);
  live_before_playback_.reset();
  playback_.reset();
  playback_cursor_ = 0;
  body_ = std::move(s.body);
  tick_ = s.tick;
  sim_time_ = s.sim_time;
  pending_inputs_ = std::move(s.pending_inputs);
  status_ = SimStatus::Paused;
}

std::size_t Simulation::playback_remaining() const {
  if (!playback_) return 0;
  return playback_->frames.size() - playback_cursor_;
}

}  // namespace softbody
