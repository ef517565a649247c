#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <sstream>

#include <CLI11.hpp>

#include "softbody/ahp.hpp"
#include "softbody/persistence.hpp"
#include "softbody/server.hpp"

namespace softbody::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Collider> environment_or_default(const std::string& path) {
  if (path.empty()) return {ground_plane()};
  return persistence::load_environment(path).colliders;
}

struct RunOutputs {
  std::string record;
  int stride = 1;
  std::string csv;
  std::string state_out;
};

// Steps `sim` and writes whatever outputs were asked for. The initial frame
// is always part of a recording, so zero steps still yields a valid series.
void drive(Simulation& sim, long steps, const RunOutputs& outputs, std::ostream& out) {
  const bool recording = !outputs.record.empty() || !outputs.csv.empty();
  if (recording) sim.start_recording(outputs.stride, true);
  for (long i = 0; i < steps; ++i) sim.step();
  if (recording) {
    const Series series = sim.stop_recording();
    if (!outputs.record.empty()) persistence::save_series(series, outputs.record);
    if (!outputs.csv.empty()) persistence::export_csv(series, outputs.csv);
  }
  if (!outputs.state_out.empty()) persistence::save_state(sim, outputs.state_out);
  out << "tick " << sim.tick() << " simTime " << fmt(sim.sim_time()) << " energy "
      << fmt(sim.current_frame().diagnostics.total_energy) << "\n";
}

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> names;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  return names;
}

std::atomic<server::Server*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (server::Server* s = g_server.load()) s->stop();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mass-spring soft body simulator", "softbody"};
  app.require_subcommand(1);
  const auto catalog = AlgorithmCatalog::with_builtins();

  std::uint16_t port = 8080;
  std::size_t max_instances = 8;
  std::string address = "0.0.0.0";
  std::string env_path;
  std::string static_root;
  auto* serve = app.add_subcommand("serve", "Run the WebSocket control and streaming server");
  serve->add_option("--port", port, "TCP port (SOFTBODY_PORT overrides)");
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--max-instances", max_instances, "Concurrent simulation limit")->check(CLI::PositiveNumber);
  serve->add_option("--environment", env_path, "Default .sbenv for new instances");
  serve->add_option("--static", static_root, "Directory served at /");

  int dim = 2;
  int particles = 0;
  int layers = 0;
  double mass = 1.0;
  double size = 1.0;
  std::vector<double> center;
  std::string object_out;
  auto* create = app.add_subcommand("create", "Write a default soft body object");
  create->add_option("--dim", dim, "Dimension (1, 2 or 3)")->check(CLI::Range(1, 3));
  create->add_option("--particles", particles, "Particles per layer")->check(CLI::PositiveNumber);
  create->add_option("--layers", layers, "Layer count")->check(CLI::PositiveNumber);
  create->add_option("--mass", mass, "Total mass in kg")->check(CLI::PositiveNumber);
  create->add_option("--size", size, "Outer radius or half-length")->check(CLI::PositiveNumber);
  create->add_option("--center", center, "Center x y z")->expected(3);
  create->add_option("--out", object_out, "Output .sbobj")->required();

  std::string object_in;
  std::string integrator = kDefaultIntegrator;
  std::string detector = kDefaultDetector;
  long steps = 0;
  double dt = 0.0;
  RunOutputs outputs;
  auto* run_cmd = app.add_subcommand("run", "Simulate an object headless");
  run_cmd->add_option("--object", object_in, "Input .sbobj")->required();
  run_cmd->add_option("--integrator", integrator, "Integrator name");
  run_cmd->add_option("--detector", detector, "Collision detector name");
  run_cmd->add_option("--steps", steps, "Number of steps")->required()->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--dt", dt, "Time step override")->check(CLI::PositiveNumber);
  run_cmd->add_option("--environment", env_path, "Environment .sbenv");
  run_cmd->add_option("--record", outputs.record, "Write a .sbseries");
  run_cmd->add_option("--stride", outputs.stride, "Record every Nth step")->check(CLI::PositiveNumber);
  run_cmd->add_option("--export-csv", outputs.csv, "Write the recorded frames as CSV");
  run_cmd->add_option("--save-state", outputs.state_out, "Write the final .sbstate");

  std::string state_in;
  auto* resume = app.add_subcommand("resume", "Continue a saved state");
  resume->add_option("--state", state_in, "Input .sbstate")->required();
  resume->add_option("--steps", steps, "Number of steps")->required()->check(CLI::NonNegativeNumber);
  resume->add_option("--record", outputs.record, "Write a .sbseries");
  resume->add_option("--stride", outputs.stride, "Record every Nth step")->check(CLI::PositiveNumber);
  resume->add_option("--export-csv", outputs.csv, "Write the recorded frames as CSV");
  resume->add_option("--save-state", outputs.state_out, "Write the final .sbstate");

  std::string integrator_list;
  std::string report;
  auto* compare = app.add_subcommand("compare", "Run one object under several integrators and report divergence");
  compare->add_option("--object", object_in, "Input .sbobj")->required();
  compare->add_option("--integrators", integrator_list, "Comma-separated names, first is the reference")->required();
  compare->add_option("--steps", steps, "Number of steps")->required()->check(CLI::PositiveNumber);
  compare->add_option("--dt", dt, "Common time step (default: smallest integrator default)")
      ->check(CLI::PositiveNumber);
  compare->add_option("--environment", env_path, "Environment .sbenv");
  compare->add_option("--report", report, "Output CSV")->required();

  std::string value_matrix;
  std::string cost_matrix;
  std::string points_out;
  bool align_by_position = false;
  auto* ahp_cmd = app.add_subcommand("ahp", "Cost-value prioritisation from pairwise comparison matrices");
  ahp_cmd->add_option("--value-matrix", value_matrix, "Value comparison CSV")->required();
  ahp_cmd->add_option("--cost-matrix", cost_matrix, "Cost comparison CSV")->required();
  ahp_cmd->add_option("--out", points_out, "Output points CSV")->required();
  ahp_cmd->add_flag("--align-by-position", align_by_position, "Pair cost rows with value rows by order, not label");

  std::vector<std::string> argv_storage{"softbody"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (serve->parsed()) {
      if (!static_root.empty() && !std::filesystem::is_directory(static_root)) {
        throw Error(ErrorCode::IoFailure, "no directory " + static_root);
      }
      server::ServerConfig config;
      config.address = address;
      config.port = server::resolve_port(port);
      config.max_instances = max_instances;
      config.default_environment = env_path;
      config.static_root = static_root;
      server::Server srv(config);
      out << "listening on " << address << ":" << srv.port() << "\n" << std::flush;
      g_server = &srv;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      srv.run();
      g_server = nullptr;
      return 0;
    }

    if (create->parsed()) {
      CreationParams p = default_creation_params(dimension_from_int(dim));
      if (particles > 0) p.particle_count = particles;
      if (layers > 0) p.layer_count = layers;
      p.total_mass = mass;
      p.size = size;
      if (p.dimension != Dimension::One) p.center = {0.0, kSpawnHeight, 0.0};
      if (!center.empty()) p.center = {center[0], center[1], center[2]};
      const SoftBody body = create_soft_body(p);
      persistence::export_object(body, object_out);
      out << "wrote " << body.particles.size() << " particles, " << body.springs.size() << " springs\n";
      return 0;
    }

    if (run_cmd->parsed()) {
      SimulationSnapshot snap;
      snap.body = persistence::import_object(object_in);
      snap.integrator_name = integrator;
      snap.detector_name = detector;
      snap.environment = environment_or_default(env_path);
      if (dt > 0.0) snap.params.time_step_override = dt;
      Simulation sim(1, std::move(snap), catalog, SimStatus::Running);
      drive(sim, steps, outputs, out);
      return 0;
    }

    if (resume->parsed()) {
      persistence::LoadedState loaded = persistence::load_state(state_in, *catalog);
      for (const std::string& w : loaded.warnings) err << "warning: " << w << "\n";
      Simulation sim(1, std::move(loaded.snapshot), catalog, SimStatus::Running);
      drive(sim, steps, outputs, out);
      return 0;
    }

    if (compare->parsed()) {
      const std::vector<std::string> names = split(integrator_list);
      if (names.size() < 2) {
        err << "error: compare needs at least two integrators\n";
        return 2;
      }
      double common_dt = dt;
      if (common_dt <= 0.0) {
        common_dt = catalog->integrators.get(names[0]).spec.time_step;
        for (const std::string& n : names) common_dt = std::min(common_dt, catalog->integrators.get(n).spec.time_step);
      }
      const SoftBody body = persistence::import_object(object_in);
      const std::vector<Collider> env = environment_or_default(env_path);
      std::vector<Simulation> sims;
      for (std::size_t i = 0; i < names.size(); ++i) {
        SimulationSnapshot snap;
        snap.body = body;
        snap.integrator_name = names[i];
        snap.environment = env;
        snap.params.time_step_override = common_dt;
        sims.emplace_back(static_cast<int>(i + 1), std::move(snap), catalog, SimStatus::Running);
      }
      std::string csv = "tick,sim_time";
      for (const std::string& n : names) csv += ",energy_" + n;
      for (std::size_t i = 1; i < names.size(); ++i) {
        csv += ",max_divergence_" + names[i] + ",rms_divergence_" + names[i];
      }
      csv += "\n";
      for (long s = 0; s < steps; ++s) {
        std::vector<Frame> frames;
        for (Simulation& sim : sims) frames.push_back(sim.step());
        csv += std::to_string(frames[0].tick) + "," + fmt(frames[0].sim_time);
        for (const Frame& f : frames) csv += "," + fmt(f.diagnostics.total_energy);
        // Position gap to the reference run, per particle.
        for (std::size_t i = 1; i < frames.size(); ++i) {
          double max_gap = 0.0;
          double sum_sq = 0.0;
          for (std::size_t p = 0; p < frames[0].positions.size(); ++p) {
            const double gap = norm(frames[i].positions[p] - frames[0].positions[p]);
            max_gap = std::max(max_gap, gap);
            sum_sq += gap * gap;
          }
          const double rms = frames[0].positions.empty() ? 0.0 : std::sqrt(sum_sq / frames[0].positions.size());
          csv += "," + fmt(max_gap) + "," + fmt(rms);
        }
        csv += "\n";
      }
      persistence::write_file(report, csv);
      out << "compared " << names.size() << " integrators over " << steps << " steps at dt " << fmt(common_dt) << "\n";
      return 0;
    }

    if (ahp_cmd->parsed()) {
      const ahp::PriorityVector value = ahp::priority_vector(ahp::read_matrix_csv(value_matrix));
      ahp::PriorityVector cost = ahp::priority_vector(ahp::read_matrix_csv(cost_matrix));
      if (align_by_position) {
        if (cost.labels.size() != value.labels.size()) {
          throw Error(ErrorCode::LabelMismatch, "positional alignment needs equally sized matrices");
        }
        cost.labels = value.labels;
      }
      const auto points = ahp::cost_value_points(value, cost);
      persistence::write_file(points_out, ahp::points_csv(points));
      out << "wrote " << points.size() << " points\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace softbody::cli
