#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "softbody/engine.hpp"

namespace softbody::persistence {

inline constexpr int kFormatVersion = 1;

// Colliders plus free-form rendering hints for the UI, kept as compact JSON.
struct Environment {
  std::vector<Collider> colliders{ground_plane()};
  std::string display_hints = "{}";
};

struct LoadedState {
  SimulationSnapshot snapshot;
  std::vector<std::string> warnings;
};

// In-memory encoders return canonical document text.

std::string encode_state(const SimulationSnapshot& snapshot);
/// Unknown algorithm names fall back to the defaults and add a warning.
LoadedState decode_state(std::string_view text, const AlgorithmCatalog& catalog);

std::string encode_series(const Series& series);
Series decode_series(std::string_view text);

std::string encode_object(const SoftBody& body);
/// Fresh ids throughout; INVARIANT_VIOLATION if the result breaks a body invariant.
SoftBody decode_object(std::string_view text);

std::string encode_environment(const Environment& env);
Environment decode_environment(std::string_view text);

/// tick,sim_time,particle_id,x,y,z,vx,vy,vz; one row per frame and particle.
std::string series_csv(const Series& series);

// File wrappers. Failures to open, read or write raise IO_FAILURE.

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

void save_state(const Simulation& sim, const std::filesystem::path& path);
LoadedState load_state(const std::filesystem::path& path, const AlgorithmCatalog& catalog);
void save_series(const Series& series, const std::filesystem::path& path);
Series load_series(const std::filesystem::path& path);
void export_object(const SoftBody& body, const std::filesystem::path& path);
SoftBody import_object(const std::filesystem::path& path);
void save_environment(const Environment& env, const std::filesystem::path& path);
Environment load_environment(const std::filesystem::path& path);
void export_csv(const Series& series, const std::filesystem::path& path);

}  // namespace softbody::persistence
