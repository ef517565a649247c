#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "softbody/collision.hpp"
#include "softbody/error.hpp"
#include "softbody/forces.hpp"
#include "softbody/integrators.hpp"
#include "softbody/model.hpp"

namespace softbody {

struct SimParams {
  ForceParams forces;
  std::optional<double> time_step_override;
  double frame_rate = 30.0;  // publish rate, Hz
  // Sphere-proxy contacts between the parts of an attached body.
  bool part_collisions = false;
};

void validate(const SimParams& params);

enum class SimStatus { Running, Paused, Playback };
std::string_view to_string(SimStatus status);

// Both registries are shared by every instance; only registration mutates them.
struct AlgorithmCatalog {
  IntegratorRegistry integrators;
  DetectorRegistry detectors;

  static std::shared_ptr<AlgorithmCatalog> with_builtins();
};

// Creation through the server or CLI without an explicit center puts 2-D and
// 3-D bodies this far above the ground plane.
inline constexpr double kSpawnHeight = 2.0;

inline constexpr const char* kDefaultIntegrator = integrator_names::kSemiImplicitEuler;
inline constexpr const char* kDefaultDetector = detector_names::kBruteForce;

struct FrameDiagnostics {
  double kinetic_energy = 0.0;
  double potential_energy = 0.0;  // spring + gravity
  double total_energy = 0.0;
  // Enclosed volume (3-D) or area (2-D) when the body is closed.
  std::optional<double> volume;
  std::size_t contacts = 0;
  std::size_t zero_length_springs = 0;
  std::size_t degenerate_normals = 0;
};

struct Frame {
  int instance_id = 0;
  std::int64_t tick = 0;
  double sim_time = 0.0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<int> broken_spring_ids;
  FrameDiagnostics diagnostics;
  SimStatus status = SimStatus::Paused;
};

struct SeriesFrame {
  std::int64_t tick = 0;
  double sim_time = 0.0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<int> broken_spring_ids;
};

struct SeriesHeader {
  SoftBody body;  // topology at the start of recording
  SimParams params;
  std::string integrator_name;
  std::string detector_name;
  int stride = 1;
  std::int64_t start_tick = 0;
};

struct Series {
  SeriesHeader header;
  std::vector<SeriesFrame> frames;
};

// Everything needed to resume a simulation bit-for-bit.
struct SimulationSnapshot {
  SoftBody body;
  std::string integrator_name = kDefaultIntegrator;
  std::string detector_name = kDefaultDetector;
  std::vector<Collider> environment{ground_plane()};
  SimParams params;
  std::int64_t tick = 0;
  double sim_time = 0.0;
  std::vector<ExternalInput> pending_inputs;
};

// Unset fields are left alone. Applied atomically between steps.
struct ParamPatch {
  std::optional<Vec3> gravity;
  std::optional<double> drag_coefficient;
  std::optional<double> pressure_coefficient;
  std::optional<double> hook_constant;
  std::optional<double> damping_factor;
  std::optional<double> particle_mass;
  std::optional<int> particle_count;  // total over all layers
  std::optional<Vec3> velocity;
  std::optional<Vec3> acceleration;
  std::optional<double> time_step_override;
  bool clear_time_step_override = false;
  std::optional<double> frame_rate;
  std::optional<double> elastic_limit;
  std::optional<double> plastic_rate;
  std::optional<double> fracture_strain;
  std::optional<bool> part_collisions;
};

enum class AlgorithmKind { Integrator, Detector };

/// Rebuilds `body` with `particle_count` particles in total (split evenly over
/// its layers), keeping dimension, layer count, total mass and centroid.
/// Velocities become the body average.
SoftBody rebuild_with_particle_count(const SoftBody& body, int particle_count);

/// One running simulation: a body, its integrator and detector, a clock and
/// a status. Not thread-safe; the owner serialises all calls.
class Simulation {
 public:
  Simulation(int id, SimulationSnapshot snapshot, std::shared_ptr<const AlgorithmCatalog> catalog,
             SimStatus status = SimStatus::Running);

  /// One full step: contacts, forces, integration, deformation, clock.
  /// On NonfiniteState (or any step error) the instance pauses and keeps its
  /// last good state before rethrowing.
  Frame step();
  /// Single step of a paused instance; the status stays paused.
  Frame advance_paused();

  void pause();
  void resume();

  void set_params(const ParamPatch& patch);
  void swap_algorithm(AlgorithmKind kind, const std::string& name);
  void apply_user_force(ExternalInput input);

  /// Independent deep copy at the current state driven by another integrator.
  Simulation clone_with_integrator(int new_id, const std::string& integrator_name) const;

  void start_recording(int stride, bool include_current = false);
  Series stop_recording();
  bool recording() const { return recording_.has_value(); }

  void start_playback(Series series);
  Frame step_playback();
  /// Leaves playback and restores the live state, paused.
  void stop_playback();
  std::size_t playback_remaining() const;

  Frame current_frame() const;
  SimulationSnapshot snapshot() const;

  int id() const { return id_; }
  const SoftBody& body() const { return body_; }
  const std::string& integrator_name() const { return integrator_name_; }
  const std::string& detector_name() const { return detector_name_; }
  const std::vector<Collider>& environment() const { return environment_; }
  const SimParams& params() const { return params_; }
  const std::vector<ExternalInput>& pending_inputs() const { return pending_inputs_; }
  std::int64_t tick() const { return tick_; }
  double sim_time() const { return sim_time_; }
  SimStatus status() const { return status_; }
  double effective_time_step() const;
  std::optional<ErrorCode> last_error() const { return last_error_; }
  const std::shared_ptr<const AlgorithmCatalog>& catalog() const { return catalog_; }

 private:
  Frame do_step();
  Frame make_frame(std::vector<int> broken) const;
  FrameDiagnostics diagnostics() const;
  void require_not_playback(const char* what) const;

  int id_;
  std::shared_ptr<const AlgorithmCatalog> catalog_;
  SoftBody body_;
  std::string integrator_name_;
  std::string detector_name_;
  std::vector<Collider> environment_;
  SimParams params_;
  std::int64_t tick_ = 0;
  double sim_time_ = 0.0;
  SimStatus status_;
  std::vector<ExternalInput> pending_inputs_;
  std::optional<ErrorCode> last_error_;
  std::size_t last_zero_length_ = 0;
  std::size_t last_degenerate_ = 0;
  std::size_t last_contacts_ = 0;

  std::optional<Series> recording_;
  std::int64_t steps_since_record_start_ = 0;
  std::vector<int> pending_broken_;

  std::optional<Series> playback_;
  std::size_t playback_cursor_ = 0;
  std::optional<SimulationSnapshot> live_before_playback_;
};

}  // namespace softbody
