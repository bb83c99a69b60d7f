// Copyright 2026 The didgeom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "didgeom/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <ostream>
#include <thread>

#include "didgeom/augmentation.hpp"
#include "didgeom/depth_fusion.hpp"
#include "didgeom/depth_labels.hpp"
#include "didgeom/error.hpp"
#include "didgeom/evaluation.hpp"
#include "didgeom/geometry.hpp"
#include "didgeom/kitti_io.hpp"
#include "didgeom/random.hpp"
#include "didgeom/records.hpp"
#include "didgeom/synth_oracle.hpp"

namespace didgeom::cli {
namespace {

namespace fs = std::filesystem;
using records::Json;

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("didgeom", sink);
  logger->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("DID_GEOM_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  logger->set_level(level);
  return logger;
}

// Frame ids are the file stems of `dir/*ext`, sorted.
std::vector<std::string> list_frames(const fs::path& dir, const std::string& ext) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IoError, fmt::format("{} is not a directory", dir.string()));
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext && entry.path().stem() != "manifest") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Frame-parallel fan-out; the first failure by frame index is re-thrown.
void for_each_frame(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> workers;
    const auto n = std::min<std::size_t>(std::size_t(jobs), count);
    for (std::size_t w = 0; w < n; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) break;
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", context, e.what()));
  }
}

std::pair<double, double> parse_pair(const std::string& text, const char* flag) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::BadArgument, fmt::format("{} expects lo,hi", flag));
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string a = text.substr(0, comma);
    const std::string b = text.substr(comma + 1);
    const double lo = std::stod(a, &used_a);
    const double hi = std::stod(b, &used_b);
    if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::BadArgument, fmt::format("{} expects lo,hi (got '{}')", flag, text));
  }
}

struct Manifest {
  std::string subcommand;
  Json config = Json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
};

// The manifest records wall-clock time and is therefore the one output that
// differs between otherwise identical runs.
void write_manifest(const Manifest& m, const fs::path& path, double seconds) {
  Json j;
  j["subcommand"] = m.subcommand;
  j["tool_version"] = kToolVersion;
  j["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["wall_clock_seconds"] = seconds;
  files::write_text(path, records::dump(j));
}

std::string frame_name(std::size_t i) { return fmt::format("{:06d}", i); }

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 0;
  int objects = 5;
  int frames = 1;
  std::string out;
  int width = 1242;
  int height = 375;
  double density = 400.0;
  double noise_vis = 0.1;
  double noise_att = 0.1;
  std::string yaw;
};

Manifest run_synth(const SynthArgs& a, spdlog::logger& log) {
  const fs::path out = a.out;
  SceneConfig base;
  base.num_objects = a.objects;
  base.image_width = a.width;
  base.image_height = a.height;
  base.point_density = a.density;
  base.noise_vis = a.noise_vis;
  base.noise_att = a.noise_att;
  if (!a.yaw.empty()) {
    const auto [lo, hi] = parse_pair(a.yaw, "--yaw");
    base.yaw = {lo, hi};
  }
  if (a.frames < 0) throw Error(ErrorCode::BadArgument, "--frames must be >= 0");
  base.validate();

  Manifest m;
  m.subcommand = "synth";
  m.seed = a.seed;
  m.config = {{"objects", a.objects}, {"frames", a.frames},   {"width", a.width},
              {"height", a.height},   {"density", a.density}, {"noise_vis", a.noise_vis},
              {"noise_att", a.noise_att}, {"yaw", {base.yaw.lo, base.yaw.hi}}};

  for (int f = 0; f < a.frames; ++f) {
    const std::string id = frame_name(std::size_t(f));
    SceneConfig cfg = base;
    cfg.seed = mix_seed(a.seed) + std::uint64_t(f);
    const Scene scene = synth::generate_scene(cfg);

    files::write_text(out / "calib" / (id + ".txt"), kitti::write_calibration(scene.calib));
    files::write_text(out / "label_2" / (id + ".txt"),
                      kitti::serialize_label_file(scene.objects, kitti::Precision::Exact));
    files::write_binary(out / "velodyne" / (id + ".bin"), kitti::write_point_cloud(scene.cloud));

    records::UncertaintyFile unc;
    unc.frame_id = id;
    for (std::size_t k = 0; k < scene.objects.size(); ++k) {
      unc.objects.push_back({k, {std::max(cfg.noise_vis, kMinUncertainty)},
                             {std::max(cfg.noise_att, kMinUncertainty)}, 1.0});
    }
    files::write_text(out / "uncertainty" / (id + ".json"), records::dump(records::uncertainty_record(unc)));
    m.outputs.push_back(id);
    log.info("synth frame {}: {} objects, {} points", id, scene.objects.size(), scene.cloud.points.size());
  }
  Json meta;
  meta["width"] = a.width;
  meta["height"] = a.height;
  meta["cloud_frame"] = "camera";
  files::write_text(out / "meta.json", records::dump(meta));
  return m;
}

// ---- gen-labels ----------------------------------------------------------

struct GenLabelsArgs {
  std::string data;
  std::string out;
  std::string grid = "7x7";
  double rmax = labels::kDefaultMaxRadius;
  int width = 0;
  int height = 0;
  int jobs = 1;
};

Manifest run_gen_labels(const GenLabelsArgs& a, spdlog::logger& log) {
  const fs::path data = a.data;
  const fs::path out = a.out;
  const auto [m, n] = parse_grid(a.grid);
  if (!(a.rmax > 0.0)) throw Error(ErrorCode::BadArgument, "--rmax must be positive");

  int width = a.width;
  int height = a.height;
  if ((width <= 0 || height <= 0) && fs::exists(data / "meta.json")) {
    const auto meta = records::parse(files::read_text(data / "meta.json"));
    width = meta.value("width", 0);
    height = meta.value("height", 0);
  }
  if (width <= 0 || height <= 0) {
    width = 1242;
    height = 375;
  }

  const auto ids = list_frames(data / "label_2", ".txt");
  Manifest manifest;
  manifest.subcommand = "gen-labels";
  manifest.config = {{"grid", fmt::format("{}x{}", m, n)}, {"rmax", a.rmax}, {"width", width}, {"height", height}};
  manifest.inputs = {data.string()};
  manifest.outputs = ids;

  const labels::LabelOptions options{m, n, a.rmax};
  for_each_frame(ids.size(), a.jobs, [&](std::size_t i) {
    const std::string& id = ids[i];
    with_context("frame " + id, [&] {
      const auto calib = kitti::parse_calibration(files::read_text(data / "calib" / (id + ".txt")));
      const auto objects = kitti::parse_label_file(files::read_text(data / "label_2" / (id + ".txt")));
      const auto raw = kitti::read_point_cloud(files::read_binary(data / "velodyne" / (id + ".bin")));
      const auto cloud = labels::to_camera_frame(raw, calib);
      const auto frame_labels = labels::generate_frame_labels(cloud, calib, width, height, objects, options);

      AnnotatedFrame frame;
      frame.frame_id = id;
      frame.width = width;
      frame.height = height;
      frame.calib = calib;
      frame.warnings = frame_labels.skipped;
      for (std::size_t k = 0; k < frame_labels.grids.size(); ++k) {
        const auto& label = objects[frame_labels.object_indices[k]];
        frame.objects.push_back({frame_labels.object_indices[k], label, synth::center_projection(calib, label),
                                 frame_labels.grids[k]});
      }
      for (const auto& w : frame.warnings) log.warn("frame {}: {}", id, w);
      files::write_text(out / (id + ".json"), records::dump(records::frame_bundle(frame)));
    });
  });
  log.info("gen-labels: {} frames", ids.size());
  return manifest;
}

// ---- augment -------------------------------------------------------------

struct AugmentArgs {
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  std::string scale = "0.6,1.4";
  double shift = aug::kDefaultShift;
  double flip_prob = 0.0;
  double min_visible = aug::kDefaultMinVisible;
  int jobs = 1;
};

std::uint64_t frame_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : id) h = (h ^ c) * 1099511628211ull;
  return mix_seed(seed ^ h);
}

Manifest run_augment(const AugmentArgs& a, spdlog::logger& log) {
  const fs::path in = a.in;
  const fs::path out = a.out;
  const auto [lo, hi] = parse_pair(a.scale, "--scale");
  if (!(a.flip_prob >= 0.0 && a.flip_prob <= 1.0)) throw Error(ErrorCode::BadArgument, "--flip-prob outside [0,1]");

  const auto ids = list_frames(in, ".json");
  Manifest manifest;
  manifest.subcommand = "augment";
  manifest.seed = a.seed;
  manifest.config = {{"scale", {lo, hi}}, {"shift", a.shift}, {"flip_prob", a.flip_prob},
                     {"min_visible", a.min_visible}};
  manifest.inputs = {in.string()};
  manifest.outputs = ids;

  for_each_frame(ids.size(), a.jobs, [&](std::size_t i) {
    const std::string& id = ids[i];
    with_context("frame " + id, [&] {
      const auto frame = records::frame_from_bundle(records::parse(files::read_text(in / (id + ".json"))));
      const std::uint64_t fs = frame_seed(a.seed, frame.frame_id);
      const auto t = aug::make_crop_scale(fs, frame.width, frame.height, lo, hi, a.shift);
      auto result = aug::transform_frame(frame, t, a.min_visible);
      Rng flip_rng(mix_seed(fs));
      if (flip_rng.uniform() < a.flip_prob) result = aug::horizontal_flip(result);
      for (std::size_t w = frame.warnings.size(); w < result.warnings.size(); ++w) {
        log.warn("frame {}: {}", id, result.warnings[w]);
      }
      files::write_text(out / (id + ".json"), records::dump(records::frame_bundle(result)));
    });
  });
  return manifest;
}

// ---- fuse ----------------------------------------------------------------

struct FuseArgs {
  std::string labels;
  std::string uncertainty;
  std::string out;
  int jobs = 1;
};

std::vector<double> broadcast(const std::vector<double>& v, std::size_t cells, const char* what) {
  if (v.size() == 1) return std::vector<double>(cells, v[0]);
  if (v.size() != cells) {
    throw Error(ErrorCode::WrongArity, fmt::format("{} has {} values for {} cells", what, v.size(), cells));
  }
  return v;
}

Manifest run_fuse(const FuseArgs& a, spdlog::logger& log) {
  const fs::path labels_dir = a.labels;
  const fs::path unc_dir = a.uncertainty;
  const fs::path out = a.out;
  const auto ids = list_frames(labels_dir, ".json");

  Manifest manifest;
  manifest.subcommand = "fuse";
  manifest.inputs = {labels_dir.string(), unc_dir.string()};
  manifest.outputs = ids;

  for_each_frame(ids.size(), a.jobs, [&](std::size_t i) {
    const std::string& id = ids[i];
    with_context("frame " + id, [&] {
      const auto frame = records::frame_from_bundle(records::parse(files::read_text(labels_dir / (id + ".json"))));
      const auto unc = records::uncertainty_from_record(records::parse(files::read_text(unc_dir / (id + ".json"))));

      Json fused = Json::array();
      std::vector<ObjectLabel> detections;
      for (const auto& obj : frame.objects) {
        const auto it = std::find_if(unc.objects.begin(), unc.objects.end(),
                                     [&](const auto& u) { return u.object_index == obj.object_index; });
        if (it == unc.objects.end()) {
          throw Error(ErrorCode::InvalidValue, fmt::format("no uncertainty for object {}", obj.object_index));
        }
        const auto cells = obj.grid.size();
        const auto u_vis = broadcast(it->u_vis, cells, "u_vis");
        const auto u_att = broadcast(it->u_att, cells, "u_att");
        std::vector<DepthBelief> vis, att;
        for (std::size_t c = 0; c < cells; ++c) {
          vis.emplace_back(obj.grid.visual[c], u_vis[c]);
          att.emplace_back(obj.grid.attribute[c], u_att[c]);
        }
        const InstancePatch patch(obj.grid.m, obj.grid.n, std::move(vis), std::move(att), obj.grid.valid);
        if (patch.valid_count() == 0) {
          log.warn("frame {}: object {} has no valid cells, skipped", id, obj.object_index);
          continue;
        }
        records::FusedObject f;
        f.frame_id = id;
        f.object_index = obj.object_index;
        f.d_ins = fusion::aggregate_depth(patch);
        f.u_summary = fusion::summarize_uncertainty(patch);
        f.p_ins = fusion::instance_confidence(patch);
        f.score = fusion::final_score(it->p_2d, f.p_ins);
        fused.push_back(records::fused_record(f));

        const auto box = geom::recover_box(frame.calib, obj.center_projection, f.d_ins, obj.label.dims,
                                           obj.label.alpha);
        ObjectLabel det = obj.label;
        det.location = box.location;
        det.ry = box.ry;
        det.score = f.score;
        detections.push_back(std::move(det));
      }
      files::write_text(out / (id + ".json"), records::dump(fused));
      std::string lines;
      for (const auto& d : detections) lines += kitti::serialize_detection(d) + '\n';
      files::write_text(out / (id + ".txt"), lines);
    });
  });
  return manifest;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string det;
  std::optional<double> iou;
  std::string metric = "bev,3d";
  std::string json;
  std::string out;
};

FrameSet load_frames(const fs::path& dir) {
  FrameSet frames;
  for (const auto& id : list_frames(dir, ".txt")) {
    frames[id] = with_context(fmt::format("{}/{}.txt", dir.string(), id),
                              [&] { return kitti::parse_label_file(files::read_text(dir / (id + ".txt"))); });
  }
  return frames;
}

Json report_json(const EvalReport& report) {
  Json slices = Json::array();
  for (const auto& s : report.slices) {
    Json j;
    j["category"] = s.category;
    j["difficulty"] = std::string(to_string(s.difficulty));
    j["metric"] = std::string(to_string(s.metric));
    j["iou_threshold"] = s.iou_threshold;
    j["ap40"] = s.ap;
    j["defined"] = s.defined;
    j["num_gt"] = s.num_gt;
    j["num_tp"] = s.num_tp;
    j["num_fp"] = s.num_fp;
    j["precision"] = s.precision;
    slices.push_back(std::move(j));
  }
  Json j;
  j["slices"] = std::move(slices);
  return j;
}

Manifest run_eval(const EvalArgs& a, std::ostream& out) {
  EvalConfig config;
  config.iou_threshold = a.iou;
  if (a.iou && !(*a.iou > 0.0 && *a.iou <= 1.0)) throw Error(ErrorCode::BadArgument, "--iou must be in (0, 1]");
  config.metrics.clear();
  std::string rest = a.metric;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string tok = rest.substr(0, comma);
    if (tok == "bev") config.metrics.push_back(Metric::Bev);
    else if (tok == "3d") config.metrics.push_back(Metric::Box3D);
    else throw Error(ErrorCode::BadArgument, fmt::format("unknown metric '{}'", tok));
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
  }

  const auto gt = load_frames(a.gt);
  const auto det = load_frames(a.det);
  const auto report = eval::evaluate(gt, det, config);
  out << eval::format_report(report);

  Manifest m;
  m.subcommand = "eval";
  m.config = {{"iou", a.iou ? Json(*a.iou) : Json(nullptr)}, {"metric", a.metric}};
  m.inputs = {a.gt, a.det};
  const Json j = report_json(report);
  if (!a.json.empty()) {
    files::write_text(a.json, records::dump(j));
    m.outputs.push_back(a.json);
  }
  if (!a.out.empty()) {
    files::write_text(fs::path(a.out) / "report.json", records::dump(j));
    files::write_text(fs::path(a.out) / "report.txt", eval::format_report(report));
    m.outputs.push_back((fs::path(a.out) / "report.json").string());
  }
  return m;
}

// ---- gradcheck -----------------------------------------------------------

struct GradcheckArgs {
  int samples = 1000;
  double tol = 1e-5;
  double step = 1e-6;
  std::uint64_t seed = 0;
  std::string out;
};

constexpr double kOptimumTolerance = 1e-12;

}  // namespace

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  int m = 0, n = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_m = 0, used_n = 0;
    const std::string a = text.substr(0, x);
    const std::string b = text.substr(x + 1);
    m = std::stoi(a, &used_m);
    n = std::stoi(b, &used_n);
    if (used_m != a.size() || used_n != b.size()) throw std::invalid_argument(text);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::BadArgument, fmt::format("--grid expects MxN (got '{}')", text));
  }
  if (m < 1 || m > 32 || n < 1 || n > 32) {
    throw Error(ErrorCode::BadArgument, fmt::format("--grid {}x{} outside [1, 32]", m, n));
  }
  return {m, n};
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  const auto started = std::chrono::steady_clock::now();

  CLI::App app{"Decoupled instance depth geometry toolkit", "didgeom"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate synthetic KITTI-format scenes");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--objects", synth_args.objects, "objects per frame");
  synth->add_option("--frames", synth_args.frames, "number of frames");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--width", synth_args.width, "image width (px)");
  synth->add_option("--height", synth_args.height, "image height (px)");
  synth->add_option("--density", synth_args.density, "points per m^2 of visible face");
  synth->add_option("--noise-vis", synth_args.noise_vis, "visual depth Laplace scale");
  synth->add_option("--noise-att", synth_args.noise_att, "attribute depth Laplace scale");
  synth->add_option("--yaw", synth_args.yaw, "yaw range lo,hi (rad)");

  GenLabelsArgs gen_args;
  int jobs = 1;
  auto* gen = app.add_subcommand("gen-labels", "build visual/attribute depth grids");
  gen->add_option("--data", gen_args.data, "KITTI-layout dataset directory")->required();
  gen->add_option("--out", gen_args.out, "output directory")->required();
  gen->add_option("--grid", gen_args.grid, "grid size MxN");
  gen->add_option("--rmax", gen_args.rmax, "completion cutoff radius (px)");
  gen->add_option("--width", gen_args.width, "image width (px)");
  gen->add_option("--height", gen_args.height, "image height (px)");
  gen->add_option("--jobs", jobs, "frame-parallel workers");

  AugmentArgs aug_args;
  auto* augment = app.add_subcommand("augment", "affine augmentation of frame bundles");
  augment->add_option("--in", aug_args.in, "input bundle directory")->required();
  augment->add_option("--out", aug_args.out, "output directory")->required();
  augment->add_option("--seed", aug_args.seed, "random seed");
  augment->add_option("--scale", aug_args.scale, "scale range lo,hi");
  augment->add_option("--shift", aug_args.shift, "centre shift fraction");
  augment->add_option("--flip-prob", aug_args.flip_prob, "horizontal flip probability");
  augment->add_option("--min-visible", aug_args.min_visible, "culling threshold");
  augment->add_option("--jobs", jobs, "frame-parallel workers");

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "aggregate instance depth and recover 3D boxes");
  fuse->add_option("--labels", fuse_args.labels, "frame bundle directory")->required();
  fuse->add_option("--uncertainty", fuse_args.uncertainty, "uncertainty directory")->required();
  fuse->add_option("--out", fuse_args.out, "output directory")->required();
  fuse->add_option("--jobs", jobs, "frame-parallel workers");

  EvalArgs eval_args;
  auto* evaluate = app.add_subcommand("eval", "BEV / 3D AP40 evaluation");
  evaluate->add_option("--gt", eval_args.gt, "ground-truth label directory")->required();
  evaluate->add_option("--det", eval_args.det, "detection directory")->required();
  evaluate->add_option("--iou", eval_args.iou, "IoU threshold for every category");
  evaluate->add_option("--metric", eval_args.metric, "bev,3d");
  evaluate->add_option("--json", eval_args.json, "write the JSON report here");
  evaluate->add_option("--out", eval_args.out, "report + manifest directory");

  GradcheckArgs grad_args;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the depth losses");
  gradcheck->add_option("--samples", grad_args.samples, "number of random samples");
  gradcheck->add_option("--tol", grad_args.tol, "relative tolerance");
  gradcheck->add_option("--step", grad_args.step, "finite-difference step");
  gradcheck->add_option("--seed", grad_args.seed, "random seed");
  gradcheck->add_option("--out", grad_args.out, "manifest directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (!args.empty() && app.get_subcommands().empty() && args[0].rfind("-", 0) != 0) {
      err << to_string(ErrorCode::UnknownSubcommand) << ": " << args[0] << '\n';
    } else {
      err << to_string(ErrorCode::BadArgument) << ": " << e.what() << '\n';
    }
    return kValidationError;
  }

  try {
    Manifest manifest;
    fs::path manifest_dir;
    int code = kOk;
    if (synth->parsed()) {
      manifest = run_synth(synth_args, *log);
      manifest_dir = synth_args.out;
    } else if (gen->parsed()) {
      gen_args.jobs = jobs;
      manifest = run_gen_labels(gen_args, *log);
      manifest_dir = gen_args.out;
    } else if (augment->parsed()) {
      aug_args.jobs = jobs;
      manifest = run_augment(aug_args, *log);
      manifest_dir = aug_args.out;
    } else if (fuse->parsed()) {
      fuse_args.jobs = jobs;
      manifest = run_fuse(fuse_args, *log);
      manifest_dir = fuse_args.out;
    } else if (evaluate->parsed()) {
      manifest = run_eval(eval_args, out);
      manifest_dir = eval_args.out;
    } else if (gradcheck->parsed()) {
      if (grad_args.samples < 1 || !(grad_args.step > 0.0)) {
        throw Error(ErrorCode::BadArgument, "--samples and --step must be positive");
      }
      const auto r = fusion::gradient_check(grad_args.samples, grad_args.seed, grad_args.step);
      out << fmt::format("samples                      {}\n", r.samples);
      out << fmt::format("max rel error dL/dd (laplace) {:.3e}\n", r.max_rel_error_nll_d);
      out << fmt::format("max rel error dL/du (laplace) {:.3e}\n", r.max_rel_error_nll_u);
      out << fmt::format("max rel error smooth-l1      {:.3e}\n", r.max_rel_error_smooth_l1);
      out << fmt::format("max |dL/du| at optimum       {:.3e}\n", r.max_abs_grad_at_optimum);
      const bool ok = r.max_rel_error() <= grad_args.tol && r.max_abs_grad_at_optimum <= kOptimumTolerance;
      out << (ok ? "PASS" : "FAIL") << fmt::format(" (tol {:.1e})\n", grad_args.tol);
      manifest.subcommand = "gradcheck";
      manifest.seed = grad_args.seed;
      manifest.config = {{"samples", grad_args.samples}, {"tol", grad_args.tol}, {"step", grad_args.step},
                         {"max_rel_error", r.max_rel_error()}};
      manifest_dir = grad_args.out;
      code = ok ? kOk : kValidationError;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (!manifest_dir.empty()) {
      write_manifest(manifest, manifest_dir / "manifest.json", seconds);
    } else {
      log->info("{} finished in {:.3f}s", manifest.subcommand, seconds);
    }
    return code;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.code() == ErrorCode::IoError ? kIoError : kValidationError;
  } catch (const fs::filesystem_error& e) {
    err << to_string(ErrorCode::IoError) << ": " << e.what() << '\n';
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    err << to_string(ErrorCode::InvalidValue) << ": " << e.what() << '\n';
    return kValidationError;
  }
}

}  // namespace didgeom::cli
