#include "softbody/persistence.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "codec.hpp"

namespace softbody::persistence {
namespace {

using codec::field;
using codec::json;

json document(std::string_view kind) {
  return json{{"formatVersion", kFormatVersion}, {"document", std::string(kind)}};
}

// nlohmann type errors become schema errors; our own errors pass through.
template <class F>
auto decoding(F&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("unexpected document structure: ") + e.what());
  }
}

std::string algorithm_or_default(std::string name, bool known, const char* fallback, const char* what,
                                 std::vector<std::string>& warnings) {
  if (known) return name;
  warnings.push_back(std::string("unknown ") + what + " '" + name + "', using '" + fallback + "'");
  return fallback;
}

}  // namespace

std::string encode_state(const SimulationSnapshot& s) {
  json j = document("state");
  j["savedAtTick"] = s.tick;
  j["simTime"] = s.sim_time;
  j["integratorName"] = s.integrator_name;
  j["detectorName"] = s.detector_name;
  j["params"] = codec::to_json(s.params);
  j["body"] = codec::to_json(s.body);
  json env = json::array();
  for (const Collider& c : s.environment) env.push_back(codec::to_json(c));
  j["environment"] = std::move(env);
  json inputs = json::array();
  for (const ExternalInput& in : s.pending_inputs) inputs.push_back(codec::to_json(in));
  j["pendingInputs"] = std::move(inputs);
  return codec::canonical(j);
}

LoadedState decode_state(std::string_view text, const AlgorithmCatalog& catalog) {
  const json j = codec::parse(text);
  codec::require_document(j, "state");
  return decoding([&] {
    LoadedState out;
    SimulationSnapshot& s = out.snapshot;
    s.tick = field(j, "savedAtTick").get<std::int64_t>();
    s.sim_time = field(j, "simTime").get<double>();
    const auto integrator = field(j, "integratorName").get<std::string>();
    const auto detector = field(j, "detectorName").get<std::string>();
    s.integrator_name = algorithm_or_default(integrator, catalog.integrators.contains(integrator),
                                             kDefaultIntegrator, "integrator", out.warnings);
    s.detector_name = algorithm_or_default(detector, catalog.detectors.contains(detector), kDefaultDetector,
                                           "detector", out.warnings);
    s.params = codec::params_from(field(j, "params"));
    try {
      s.body = codec::body_from(field(j, "body"), codec::Ids::Preserve);
      validate(s.params);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SchemaMismatch) throw;
      throw Error(ErrorCode::CorruptDocument, e.what());
    }
    s.environment.clear();
    for (const json& c : field(j, "environment")) s.environment.push_back(codec::collider_from(c));
    for (const json& in : field(j, "pendingInputs")) s.pending_inputs.push_back(codec::input_from(in));
    return out;
  });
}

std::string encode_series(const Series& series) {
  if (series.frames.empty()) throw Error(ErrorCode::EmptySeries, "series has no frames");
  json j = document("series");
  const SeriesHeader& h = series.header;
  j["header"] = {{"body", codec::to_json(h.body)},
                 {"params", codec::to_json(h.params)},
                 {"integratorName", h.integrator_name},
                 {"detectorName", h.detector_name},
                 {"stride", h.stride},
                 {"startTick", h.start_tick},
                 {"frameCount", series.frames.size()}};
  json frames = json::array();
  for (const SeriesFrame& f : series.frames) frames.push_back(codec::to_json(f));
  j["frames"] = std::move(frames);
  return codec::canonical(j);
}

Series decode_series(std::string_view text) {
  const json j = codec::parse(text);
  codec::require_document(j, "series");
  return decoding([&] {
    Series s;
    const json& h = field(j, "header");
    s.header.body = codec::body_from(field(h, "body"), codec::Ids::Preserve);
    s.header.params = codec::params_from(field(h, "params"));
    s.header.integrator_name = field(h, "integratorName").get<std::string>();
    s.header.detector_name = field(h, "detectorName").get<std::string>();
    s.header.stride = field(h, "stride").get<int>();
    s.header.start_tick = field(h, "startTick").get<std::int64_t>();
    if (s.header.stride < 1) throw Error(ErrorCode::SchemaMismatch, "stride must be at least 1");
    for (const json& f : field(j, "frames")) s.frames.push_back(codec::series_frame_from(f));
    if (field(h, "frameCount").get<std::size_t>() != s.frames.size()) {
      throw Error(ErrorCode::SchemaMismatch, "frameCount does not match the frame list");
    }
    if (s.frames.empty()) throw Error(ErrorCode::EmptySeries, "series has no frames");
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      if (i > 0 && s.frames[i].tick <= s.frames[i - 1].tick) {
        throw Error(ErrorCode::SchemaMismatch, "frame ticks must be strictly increasing");
      }
      if (s.frames[i].positions.size() != s.header.body.particles.size()) {
        throw Error(ErrorCode::SchemaMismatch, "frame particle count does not match the header body");
      }
    }
    return s;
  });
}

std::string encode_object(const SoftBody& body) {
  json j = document("object");
  j["body"] = codec::to_json(body);
  return codec::canonical(j);
}

SoftBody decode_object(std::string_view text) {
  const json j = codec::parse(text);
  codec::require_document(j, "object");
  return decoding([&] { return codec::body_from(field(j, "body"), codec::Ids::Remap); });
}

std::string encode_environment(const Environment& env) {
  json j = document("environment");
  json list = json::array();
  for (const Collider& c : env.colliders) list.push_back(codec::to_json(c));
  j["colliders"] = std::move(list);
  j["displayHints"] = codec::parse(env.display_hints);
  if (!j["displayHints"].is_object()) throw Error(ErrorCode::InvalidParams, "display hints must be a JSON object");
  return codec::canonical(j);
}

Environment decode_environment(std::string_view text) {
  const json j = codec::parse(text);
  codec::require_document(j, "environment");
  return decoding([&] {
    Environment env;
    env.colliders.clear();
    for (const json& c : field(j, "colliders")) env.colliders.push_back(codec::collider_from(c));
    if (auto hints = j.find("displayHints"); hints != j.end()) {
      if (!hints->is_object()) throw Error(ErrorCode::SchemaMismatch, "displayHints must be an object");
      env.display_hints = codec::compact(*hints);
    }
    return env;
  });
}

std::string series_csv(const Series& series) {
  std::string out = "tick,sim_time,particle_id,x,y,z,vx,vy,vz\n";
  char buf[512];
  for (const SeriesFrame& f : series.frames) {
    for (std::size_t i = 0; i < f.positions.size(); ++i) {
      const Vec3& p = f.positions[i];
      const Vec3& v = f.velocities[i];
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    static_cast<long long>(f.tick), f.sim_time, i, p.x, p.y, p.z, v.x, v.y, v.z);
      out += buf;
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

void save_state(const Simulation& sim, const std::filesystem::path& path) {
  write_file(path, encode_state(sim.snapshot()));
}

LoadedState load_state(const std::filesystem::path& path, const AlgorithmCatalog& catalog) {
  return decode_state(read_file(path), catalog);
}

void save_series(const Series& series, const std::filesystem::path& path) { write_file(path, encode_series(series)); }
Series load_series(const std::filesystem::path& path) { return decode_series(read_file(path)); }

void export_object(const SoftBody& body, const std::filesystem::path& path) { write_file(path, encode_object(body)); }
SoftBody import_object(const std::filesystem::path& path) { return decode_object(read_file(path)); }

void save_environment(const Environment& env, const std::filesystem::path& path) {
  write_file(path, encode_environment(env));
}
Environment load_environment(const std::filesystem::path& path) {
  return decode_environment(read_file(path));
}

void export_csv(const Series& series, const std::filesystem::path& path) { write_file(path, series_csv(series)); }

}  // namespace softbody::persistence
