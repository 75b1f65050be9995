#include "pcgrasp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcgrasp/config.hpp"
#include "pcgrasp/error.hpp"
#include "pcgrasp/eval.hpp"
#include "pcgrasp/export.hpp"
#include "pcgrasp/pipeline.hpp"
#include "pcgrasp/simulator.hpp"

namespace pcgrasp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FrameFile {
  fs::path path;
  DepthFormat format;
};

std::vector<FrameFile> list_frames(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("input is not a directory: " + dir.string());
  std::vector<FrameFile> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    if (auto fmt = depth_format_from_extension(entry.path())) files.push_back({entry.path(), *fmt});
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  if (files.empty()) throw IoError("no depth frames (.pgm, .raw, .csv) in " + dir.string());
  std::sort(files.begin(), files.end(), [](const FrameFile& a, const FrameFile& b) {
    return a.path.filename().string() < b.path.filename().string();
  });
  return files;
}

PipelineConfig config_or_default(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  return load_config(path);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(what + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string input;
  std::string out;
  bool single_thread = false;
  bool reference = false;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  const PipelineConfig cfg = config_or_default(a.config);
  cfg.validate();
  const auto files = list_frames(a.input);
  if (a.single_thread) omp_set_num_threads(1);

  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::ostream& os = a.out.empty() ? out : file;

  Pipeline pipeline(cfg, a.reference ? Execution::serial : Execution::parallel);
  os << run_header(cfg).dump() << '\n';
  for (std::size_t i = 0; i < files.size(); ++i) {
    const DepthFrame frame = load_depth_frame(files[i].path, files[i].format, i);
    os << pipeline.process(frame, files[i].path.filename().string()).to_json().dump() << '\n';
  }
  os.flush();
  if (!os) throw IoError("write failed");
  return kExitOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string scene_template = "single_object";
  std::string scene;
  std::string intrinsics;
  std::string out;
  int objects = 3;
  std::uint64_t seed = 1;
  int frames = 100;
  double start = 800.0;
  double end = 300.0;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.9 * 180.0 / std::numbers::pi;
  int every = 20;
  int first = 100;
  std::optional<double> noise;
  std::optional<double> dropout;
};

SceneTemplate::Kind parse_template(const std::string& name) {
  if (name == "single_object") return SceneTemplate::Kind::single_object;
  if (name == "cluttered") return SceneTemplate::Kind::cluttered;
  if (name == "grip_taxonomy") return SceneTemplate::Kind::grip_taxonomy;
  throw ConfigError("unknown template '" + name + "' (single_object, cluttered, grip_taxonomy)");
}

json pose_json(const CameraPose& pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) rot.push_back({pose.rotation(r, 0), pose.rotation(r, 1), pose.rotation(r, 2)});
  return {{"position", point_json(pose.position)}, {"rotation", rot}};
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  CameraIntrinsics intr;
  if (!a.intrinsics.empty()) intr = load_intrinsics(a.intrinsics);

  SceneSpec scene;
  if (!a.scene.empty()) {
    scene = load_scene(a.scene);
  } else {
    SceneTemplate tmpl;
    tmpl.kind = parse_template(a.scene_template);
    tmpl.objects = a.objects;
    tmpl.clear_azimuth = a.azimuth_deg * kDeg;
    scene = generate_scene(a.seed, tmpl);
  }
  if (a.noise) scene.noise_sigma = *a.noise;
  if (a.dropout) scene.dropout_rate = *a.dropout;
  scene.validate();

  ApproachSpec spec;
  spec.azimuth = a.azimuth_deg * kDeg;
  spec.elevation = a.elevation_deg * kDeg;
  spec.start_range = a.start;
  spec.end_range = a.end;
  spec.frames = a.frames;
  const auto frames = simulate_approach(scene, spec, intr, a.every, a.first);

  const fs::path root(a.out);
  fs::create_directories(root / "frames");
  fs::create_directories(root / "labels");
  save_scene(root / "scene.json", scene);
  save_intrinsics(root / "intrinsics.json", intr);

  json manifest_frames = json::array();
  json keyframes = json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu", i);
    const std::string frame_file = std::string("frames/frame_") + name + ".pgm";
    const std::string label_file = std::string("labels/label_") + name + ".pgm";
    const auto& f = frames[i];
    save_pgm16(root / frame_file, f.render.frame);
    save_pgm8(root / label_file, intr.width, intr.height, f.render.labels);

    json truth = json::object();
    for (const auto& [id, vis] : f.truth)
      truth[std::to_string(id)] = {{"centroid", point_json(vis.centroid)}, {"pixels", vis.pixels}};
    manifest_frames.push_back({{"index", i},
                               {"file", frame_file},
                               {"labels", label_file},
                               {"keyframe", f.keyframe},
                               {"range_mm", f.range},
                               {"pose", pose_json(f.pose)},
                               {"visible", truth}});
    if (f.keyframe) keyframes.push_back(i);
  }
  json object_ids = json::array();
  for (const auto& o : scene.objects) object_ids.push_back(o.id);
  const json manifest{{"seed", a.seed},
                      {"target_id", scene.objects.front().id},
                      {"objects", object_ids},
                      {"keyframes", keyframes},
                      {"frames", manifest_frames}};
  auto f = open_out(root / "manifest.json");
  f << manifest.dump(2) << '\n';
  if (!f) throw IoError("write failed: manifest.json");

  out << "wrote " << frames.size() << " frames, " << scene.objects.size() << " objects, "
      << keyframes.size() << " keyframes to " << root.string() << '\n';
  return kExitOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string config;
  std::string input;
  std::size_t warmup = 5;
  bool single_thread = false;
  bool reference = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const PipelineConfig cfg = config_or_default(a.config);
  cfg.validate();
  const auto files = list_frames(a.input);
  std::vector<DepthFrame> frames;
  frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i)
    frames.push_back(load_depth_frame(files[i].path, files[i].format, i));
  if (a.single_thread) omp_set_num_threads(1);

  Pipeline pipeline(cfg, a.reference ? Execution::serial : Execution::parallel);
  const FpsStats stats = benchmark([&](const DepthFrame& f) { pipeline.process(f); }, frames, a.warmup);
  write_throughput_markdown(out, stats, a.single_thread);
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string records;
  std::string manifest;
  double threshold = kDefaultSuccessThresholdMm;
  std::string trials;
  std::string grip_map;
  std::string csv;
  std::string md;
};

std::map<std::uint64_t, FrameRecord> load_records(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  std::map<std::uint64_t, FrameRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.value("type", std::string{}) == "header") continue;
    FrameRecord r = FrameRecord::from_json(j);
    records[r.timestamp] = std::move(r);
  }
  return records;
}

std::vector<FrameResult> evaluate_manifest(const fs::path& records_path, const fs::path& manifest_path) {
  const auto records = load_records(records_path);
  const json manifest = read_json(manifest_path);
  std::vector<FrameResult> results;
  try {
    const int target_id = manifest.at("target_id").get<int>();
    for (const auto& fr : manifest.at("frames")) {
      if (!fr.at("keyframe").get<bool>()) continue;
      const auto index = fr.at("index").get<std::uint64_t>();
      const auto it = records.find(index);
      if (it == records.end())
        throw SchemaError("no run record for keyframe " + std::to_string(index));
      std::map<int, VisibleObject> visible;
      for (const auto& [id, v] : fr.at("visible").items())
        visible[std::stoi(id)] = {point_from(v.at("centroid"), "visible centroid"),
                                  v.at("pixels").get<std::size_t>()};
      results.push_back(judge_target(index, it->second.target, visible, target_id));
    }
  } catch (const json::exception& e) {
    throw SchemaError(manifest_path.string() + ": " + e.what());
  }
  if (results.empty()) throw SchemaError("manifest marks no keyframes");
  return results;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const bool rsr_mode = !a.records.empty() || !a.manifest.empty();
  const bool gas_mode = !a.trials.empty() || !a.grip_map.empty();
  if (rsr_mode == gas_mode)
    throw ConfigError("eval needs either --records with --manifest, or --trials with --grip-map");
  if (rsr_mode && (a.records.empty() || a.manifest.empty()))
    throw ConfigError("eval: --records and --manifest go together");
  if (gas_mode && (a.trials.empty() || a.grip_map.empty()))
    throw ConfigError("eval: --trials and --grip-map go together");

  std::ostringstream csv, md;
  if (rsr_mode) {
    const auto results = evaluate_manifest(a.records, a.manifest);
    write_rsr_report(csv, md, results, a.threshold);
  } else {
    const auto trials = load_trials_csv(a.trials);
    const auto report = gas(trials, load_grip_map(a.grip_map));
    write_gas_csv(csv, report);
    write_gas_markdown(md, report);
  }
  if (!a.csv.empty()) open_out(a.csv) << csv.str();
  if (!a.md.empty()) open_out(a.md) << md.str();
  out << md.str();
  return kExitOk;
}

// --- export ----------------------------------------------------------------

struct ExportArgs {
  std::string config;
  std::string frame;
  std::string ply;
  std::string stage = "clusters";
  std::string graph;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const PipelineConfig cfg = config_or_default(a.config);
  cfg.validate();
  const auto fmt = depth_format_from_extension(a.frame);
  if (!fmt) throw IoError("unrecognized frame extension: " + a.frame);
  const DepthFrame frame = load_depth_frame(a.frame, *fmt);
  const FrameAnalysis an = analyze_frame(frame, cfg, Execution::parallel, true);

  if (!a.ply.empty()) {
    if (a.stage == "cloud") {
      write_ply(fs::path(a.ply), an.cloud);
    } else if (a.stage == "objects") {
      write_ply(fs::path(a.ply), an.objects);
    } else if (a.stage == "clusters") {
      write_ply(fs::path(a.ply), an.objects, an.clusters.labels);
    } else {
      throw ConfigError("unknown stage '" + a.stage + "' (cloud, objects, clusters)");
    }
  }
  if (!a.graph.empty()) {
    auto f = open_out(a.graph);
    write_scene_graph(f, an.graph);
  }
  out << "points " << an.n_points << ", plane support " << (an.plane ? an.plane->support : 0)
      << ", clusters " << an.clusters.k << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth-only grasp targeting pipeline"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Process a directory of depth frames into a record stream");
  run_cmd->add_option("-c,--config", run.config, "Pipeline config JSON");
  run_cmd->add_option("-i,--input", run.input, "Directory of .pgm/.raw/.csv frames")->required();
  run_cmd->add_option("-o,--out", run.out, "Record file (default: stdout)");
  run_cmd->add_flag("--single-thread", run.single_thread, "Run on one thread");
  run_cmd->add_flag("--reference", run.reference, "Use the serial reference kernels");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Render a synthetic approach with ground truth");
  auto* tmpl_opt = sim_cmd->add_option("--template", sim.scene_template,
                                       "single_object | cluttered | grip_taxonomy");
  sim_cmd->add_option("--scene", sim.scene, "Scene JSON instead of a template")->excludes(tmpl_opt);
  sim_cmd->add_option("--objects", sim.objects, "Object count for the cluttered template");
  sim_cmd->add_option("--seed", sim.seed, "Scene and noise seed");
  sim_cmd->add_option("--frames", sim.frames, "Frames in the approach");
  sim_cmd->add_option("--start", sim.start, "Start range, mm");
  sim_cmd->add_option("--end", sim.end, "End range, mm");
  sim_cmd->add_option("--azimuth", sim.azimuth_deg, "Approach azimuth, degrees");
  sim_cmd->add_option("--elevation", sim.elevation_deg, "Approach elevation, degrees");
  sim_cmd->add_option("--every", sim.every, "Keyframe spacing");
  sim_cmd->add_option("--first", sim.first, "Keyframes are taken below this frame index");
  sim_cmd->add_option("--noise", sim.noise, "Depth noise std-dev, mm");
  sim_cmd->add_option("--dropout", sim.dropout, "Pixel dropout rate");
  sim_cmd->add_option("--intrinsics", sim.intrinsics, "Camera intrinsics JSON");
  sim_cmd->add_option("-o,--out", sim.out, "Output directory")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Measure pipeline throughput");
  bench_cmd->add_option("-c,--config", bench.config, "Pipeline config JSON");
  bench_cmd->add_option("-i,--input", bench.input, "Directory of frames")->required();
  bench_cmd->add_option("--warmup", bench.warmup, "Untimed leading frames");
  bench_cmd->add_flag("--single-thread", bench.single_thread, "Run on one thread");
  bench_cmd->add_flag("--reference", bench.reference, "Use the serial reference kernels");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "RSR from records + manifest, or GAS from a trial ledger");
  eval_cmd->add_option("--records", ev.records, "Record stream from `run`");
  eval_cmd->add_option("--manifest", ev.manifest, "manifest.json from `simulate`");
  eval_cmd->add_option("--threshold", ev.threshold, "Centroid error bound, mm");
  eval_cmd->add_option("--trials", ev.trials, "Trial CSV");
  eval_cmd->add_option("--grip-map", ev.grip_map, "Object id to grip type JSON");
  eval_cmd->add_option("--csv", ev.csv, "CSV report path");
  eval_cmd->add_option("--md", ev.md, "Markdown report path");

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export", "Write a PLY cloud and scene graph for one frame");
  export_cmd->add_option("-c,--config", ex.config, "Pipeline config JSON");
  export_cmd->add_option("-f,--frame", ex.frame, "Depth frame")->required();
  export_cmd->add_option("--ply", ex.ply, "PLY output path");
  export_cmd->add_option("--stage", ex.stage, "cloud | objects | clusters");
  export_cmd->add_option("--graph", ex.graph, "Scene graph JSON-lines output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*bench_cmd) return cmd_bench(bench, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*export_cmd) return cmd_export(ex, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace pcgrasp
