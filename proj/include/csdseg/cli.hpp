#ifndef CSDSEG_CLI_HPP_
#define CSDSEG_CLI_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "csdseg/chan_vese.hpp"
#include "csdseg/distmap.hpp"
#include "csdseg/io.hpp"
#include "csdseg/localsim.hpp"
#include "csdseg/metrics.hpp"
#include "csdseg/optimizer.hpp"
#include "csdseg/pipeline.hpp"
#include "csdseg/synth.hpp"
#include "json.hpp"

namespace csdseg {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a command needs. Loaded from a JSON file, then overridden by
/// command-line flags.
struct RunConfig {
  std::optional<fs::path> image;
  std::optional<fs::path> init;
  std::optional<fs::path> truth;
  std::optional<fs::path> seg;       // eval: precomputed segmentation
  std::optional<fs::path> manifest;  // batch input written by `synth`
  std::optional<fs::path> out;
  std::optional<int> channel;
  bool dump_fields = false;
  int workers = 1;
  std::uint64_t seed = 1;
  int count = 20;
  LsmParams lsm;
  DistanceMapConfig distmap;
  ChanVeseParams chan_vese;
  SynthConfig synth;

  void validate() const {
    lsm.validate();
    distmap.validate();
    chan_vese.validate();
    if (workers < 1) throw InvalidArgument("workers must be >= 1");
    if (count < 1) throw InvalidArgument("count must be >= 1");
  }
};

namespace cli_detail {

using nlohmann::json;

inline void check_keys(const json& j, const char* section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InvalidArgument(std::string(section) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) ==
        keys.end()) {
      throw InvalidArgument("unknown key \"" + k + "\" in " + section);
    }
  }
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

inline json to_json(const LsmParams& p) {
  return {{"window", p.window},       {"mask_radius", p.mask_radius}, {"band_width", p.band_width},
          {"lambda1", p.lambda1},     {"lambda2", p.lambda2},         {"max_iters", p.max_iters},
          {"tol", p.tol}};
}

inline void from_json(const json& j, LsmParams& p) {
  check_keys(j, "lsm",
             {"window", "mask_radius", "band_width", "lambda1", "lambda2", "max_iters", "tol"});
  take(j, "window", p.window);
  take(j, "mask_radius", p.mask_radius);
  take(j, "band_width", p.band_width);
  take(j, "lambda1", p.lambda1);
  take(j, "lambda2", p.lambda2);
  take(j, "max_iters", p.max_iters);
  take(j, "tol", p.tol);
}

inline json to_json(const DistanceMapConfig& c) {
  json j = {{"median_kernel", c.median_kernel}, {"geodesic_epsilon", c.geodesic_epsilon}};
  j["geodesic_sigma"] = c.geodesic_sigma ? json(*c.geodesic_sigma) : json(nullptr);
  return j;
}

inline void from_json(const json& j, DistanceMapConfig& c) {
  check_keys(j, "distmap", {"median_kernel", "geodesic_sigma", "geodesic_epsilon"});
  take(j, "median_kernel", c.median_kernel);
  take(j, "geodesic_epsilon", c.geodesic_epsilon);
  if (j.contains("geodesic_sigma")) {
    const auto& s = j.at("geodesic_sigma");
    c.geodesic_sigma = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
  }
}

inline json to_json(const ChanVeseParams& p) {
  return {{"mu_smooth", p.mu_smooth}, {"lambda_in", p.lambda_in}, {"lambda_out", p.lambda_out},
          {"iters", p.iters},         {"dt", p.dt},               {"epsilon_h", p.epsilon_h}};
}

inline void from_json(const json& j, ChanVeseParams& p) {
  check_keys(j, "chan_vese", {"mu_smooth", "lambda_in", "lambda_out", "iters", "dt", "epsilon_h"});
  take(j, "mu_smooth", p.mu_smooth);
  take(j, "lambda_in", p.lambda_in);
  take(j, "lambda_out", p.lambda_out);
  take(j, "iters", p.iters);
  take(j, "dt", p.dt);
  take(j, "epsilon_h", p.epsilon_h);
}

inline json to_json(const SynthConfig& c) {
  return {{"width", c.width},
          {"height", c.height},
          {"front_amplitude", c.front_amplitude},
          {"front_offset", c.front_offset},
          {"inside_level", c.inside_level},
          {"outside_level", c.outside_level},
          {"shading_strength", c.shading_strength},
          {"noise_sigma", c.noise_sigma},
          {"n_occlusions", c.n_occlusions},
          {"occlusion_width", c.occlusion_width},
          {"init_displacement", c.init_displacement}};
}

inline void from_json(const json& j, SynthConfig& c) {
  check_keys(j, "synth",
             {"width", "height", "front_amplitude", "front_offset", "inside_level",
              "outside_level", "shading_strength", "noise_sigma", "n_occlusions",
              "occlusion_width", "init_displacement"});
  take(j, "width", c.width);
  take(j, "height", c.height);
  take(j, "front_amplitude", c.front_amplitude);
  take(j, "front_offset", c.front_offset);
  take(j, "inside_level", c.inside_level);
  take(j, "outside_level", c.outside_level);
  take(j, "shading_strength", c.shading_strength);
  take(j, "noise_sigma", c.noise_sigma);
  take(j, "n_occlusions", c.n_occlusions);
  take(j, "occlusion_width", c.occlusion_width);
  take(j, "init_displacement", c.init_displacement);
}

inline void take_path(const json& j, const char* key, const fs::path& base,
                      std::optional<fs::path>& dst) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  fs::path p = j.at(key).get<std::string>();
  dst = p.is_absolute() ? p : base / p;
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace cli_detail

/// Resolved configuration as JSON, with absolute paths.
inline nlohmann::json run_config_to_json(const RunConfig& c) {
  using cli_detail::to_json;
  nlohmann::json j;
  auto path = [](const std::optional<fs::path>& p) {
    return p ? nlohmann::json(fs::absolute(*p).lexically_normal().string())
             : nlohmann::json(nullptr);
  };
  j["image"] = path(c.image);
  j["init"] = path(c.init);
  j["truth"] = path(c.truth);
  j["seg"] = path(c.seg);
  j["manifest"] = path(c.manifest);
  j["channel"] = c.channel ? nlohmann::json(*c.channel) : nlohmann::json(nullptr);
  j["dump_fields"] = c.dump_fields;
  j["seed"] = c.seed;
  j["count"] = c.count;
  j["lsm"] = to_json(c.lsm);
  j["distmap"] = to_json(c.distmap);
  j["chan_vese"] = to_json(c.chan_vese);
  j["synth"] = to_json(c.synth);
  return j;
}

/// Reads a configuration file. Relative paths resolve against the file's
/// directory. Run manifests written by the commands are valid inputs; their
/// bookkeeping keys are ignored.
inline RunConfig load_run_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse config " + path.string() + ": " + e.what());
  }
  cli_detail::check_keys(j, "config",
                         {"image", "init", "truth", "seg", "manifest", "out", "channel",
                          "dump_fields", "workers", "seed", "count", "lsm", "distmap", "chan_vese",
                          "synth", "tool", "version", "command", "entries", "final_T",
                          "converged", "iterations"});
  const fs::path base = path.parent_path();
  RunConfig c;
  try {
    cli_detail::take_path(j, "image", base, c.image);
    cli_detail::take_path(j, "init", base, c.init);
    cli_detail::take_path(j, "truth", base, c.truth);
    cli_detail::take_path(j, "seg", base, c.seg);
    cli_detail::take_path(j, "manifest", base, c.manifest);
    cli_detail::take_path(j, "out", base, c.out);
    if (j.contains("channel") && !j.at("channel").is_null()) c.channel = j.at("channel").get<int>();
    cli_detail::take(j, "dump_fields", c.dump_fields);
    cli_detail::take(j, "workers", c.workers);
    cli_detail::take(j, "seed", c.seed);
    cli_detail::take(j, "count", c.count);
    if (j.contains("lsm")) cli_detail::from_json(j.at("lsm"), c.lsm);
    if (j.contains("distmap")) cli_detail::from_json(j.at("distmap"), c.distmap);
    if (j.contains("chan_vese")) cli_detail::from_json(j.at("chan_vese"), c.chan_vese);
    if (j.contains("synth")) cli_detail::from_json(j.at("synth"), c.synth);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("bad value in config " + path.string() + ": " + e.what());
  }
  return c;
}

inline void write_run_manifest(const fs::path& dir, const RunConfig& c, const char* command,
                               const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j = run_config_to_json(c);
  j["tool"] = "csdseg";
  j["version"] = kVersion;
  j["command"] = command;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  atomic_write_text(dir / "run_manifest.json", j.dump(2) + "\n");
}

/// One image/init/truth triple of a batch.
struct Instance {
  std::string id;
  fs::path image;
  fs::path init;
  std::optional<fs::path> truth;
};

inline std::vector<Instance> load_instances(const fs::path& manifest) {
  const auto j = nlohmann::json::parse(read_text(manifest));
  if (!j.contains("entries") || !j.at("entries").is_array()) {
    throw IoError("manifest has no \"entries\" array: " + manifest.string());
  }
  const fs::path base = manifest.parent_path();
  std::vector<Instance> out;
  for (const auto& e : j.at("entries")) {
    Instance in;
    in.id = e.at("id").get<std::string>();
    in.image = base / e.at("image").get<std::string>();
    in.init = base / e.at("init").get<std::string>();
    if (e.contains("truth") && !e.at("truth").is_null()) {
      in.truth = base / e.at("truth").get<std::string>();
    }
    out.push_back(std::move(in));
  }
  return out;
}

/// Instances of a batch command: the manifest if given, otherwise the single
/// image/init/truth triple.
inline std::vector<Instance> resolve_instances(const RunConfig& c) {
  if (c.manifest) return load_instances(*c.manifest);
  if (!c.image) throw InvalidArgument("missing --image (or a manifest)");
  if (!c.init) throw InvalidArgument("missing --init");
  return {{c.image->stem().string(), *c.image, *c.init, c.truth}};
}

inline fs::path require_out(const RunConfig& c) {
  if (!c.out) throw InvalidArgument("missing --out");
  fs::create_directories(*c.out);
  return *c.out;
}

inline void require_file(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw InvalidArgument(std::string("missing ") + what);
  if (!fs::exists(*p)) throw IoError(std::string(what) + " not found: " + p->string());
}

/// Row of the batch CSV.
struct BatchRow {
  std::string image_id;
  std::string method;
  double dice = std::nan("");
  double rmse = std::nan("");
  int iterations = 0;
  double wall_time_ms = 0.0;
  std::string error;
};

inline std::string batch_csv(const std::vector<BatchRow>& rows) {
  std::string s = "image_id,method,dice,rmse,iterations,wall_time_ms\n";
  for (const auto& r : rows) {
    s += r.image_id + "," + r.method + "," + cli_detail::fmt("%.10g", r.dice) + "," +
         cli_detail::fmt("%.10g", r.rmse) + "," + std::to_string(r.iterations) + "," +
         cli_detail::fmt("%.3f", r.wall_time_ms) + "\n";
  }
  return s;
}

inline std::string report_csv(const EvalReport& r) {
  return "dice,rmse,n_boundary_points\n" + cli_detail::fmt("%.17g", r.dice) + "," +
         cli_detail::fmt("%.17g", r.rmse) + "," + std::to_string(r.n_boundary_points) + "\n";
}

inline std::string trace_csv(const DescentTrace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

/// Runs `job(i)` for i in [0, n) on `workers` threads.
template <typename Job>
void parallel_for(std::size_t n, int workers, Job job) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  const int extra = std::max(0, std::min(workers, static_cast<int>(n)) - 1);
  std::vector<std::thread> pool;
  for (int k = 0; k < extra; ++k) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
}

namespace cli_detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline BatchRow run_method(const Instance& in, const std::string& method, const RunConfig& c,
                           const fs::path& out) {
  BatchRow row;
  row.image_id = in.id;
  row.method = method;
  try {
    const GrayImage image = load_image(in.image, c.channel);
    const ContourPolygon init = load_contour(in.init);
    const auto t0 = std::chrono::steady_clock::now();
    BinaryMask mask;
    if (method == "lsm") {
      const LsmResult r = segment_lsm(image, init, c.distmap, c.lsm);
      mask = r.mask;
      row.iterations = static_cast<int>(r.trace.iterations.size());
      row.wall_time_ms = elapsed_ms(t0);
      atomic_write_text(out / (in.id + "_lsm_trace.csv"), trace_csv(r.trace));
    } else {
      const ChanVeseResult r = chan_vese_run(image, init, c.chan_vese);
      mask = r.mask;
      row.iterations = r.iterations;
      row.wall_time_ms = elapsed_ms(t0);
    }
    save_mask(out / (in.id + "_" + method + "_mask.png"), mask);
    if (in.truth) {
      const EvalReport rep = evaluate(load_mask(*in.truth), mask);
      row.dice = rep.dice;
      row.rmse = rep.rmse;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

inline int run_batch(const RunConfig& c, const std::vector<std::string>& methods,
                     const char* command, const char* csv_name) {
  c.validate();
  const fs::path out = require_out(c);
  const auto instances = resolve_instances(c);
  for (const auto& in : instances) {
    if (!in.truth && std::string(command) == "compare") {
      throw InvalidArgument("compare needs ground truth for " + in.id);
    }
  }
  std::vector<BatchRow> rows(instances.size() * methods.size());
  parallel_for(rows.size(), c.workers, [&](std::size_t k) {
    rows[k] = run_method(instances[k / methods.size()], methods[k % methods.size()], c, out);
  });
  atomic_write_text(out / csv_name, batch_csv(rows));
  write_run_manifest(out, c, command);

  int failures = 0;
  for (const auto& m : methods) {
    double sd = 0.0, sr = 0.0;
    int n = 0;
    for (const auto& r : rows) {
      if (r.method != m || !r.error.empty() || std::isnan(r.dice)) continue;
      sd += r.dice;
      sr += r.rmse;
      ++n;
    }
    if (n > 0) {
      std::printf("%-10s n=%d mean_dice=%.4f mean_rmse=%.2f\n", m.c_str(), n, sd / n, sr / n);
    }
  }
  for (const auto& r : rows) {
    if (r.error.empty()) continue;
    std::fprintf(stderr, "%s/%s: %s\n", r.image_id.c_str(), r.method.c_str(), r.error.c_str());
    ++failures;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace cli_detail

/// LSM on one image: mask, trace, optional report and field dumps.
inline int cmd_segment(const RunConfig& c) {
  c.validate();
  require_file(c.image, "image");
  require_file(c.init, "init polygon");
  if (c.truth) require_file(c.truth, "truth mask");
  const fs::path out = require_out(c);

  const GrayImage image = load_image(*c.image, c.channel);
  const ContourPolygon init = load_contour(*c.init);
  const LsmResult r = segment_lsm(image, init, c.distmap, c.lsm);

  save_mask(out / "mask.png", r.mask);
  atomic_write_text(out / "trace.csv", trace_csv(r.trace));
  if (c.truth) {
    atomic_write_text(out / "report.csv", report_csv(evaluate(load_mask(*c.truth), r.mask)));
  }
  if (c.dump_fields) {
    const fs::path dir = out / "fields";
    fs::create_directories(dir);
    save_field(dir / "d0.png", r.components.euclidean);
    save_field(dir / "g0.png", r.components.geodesic);
    save_field(dir / "DI.png", r.components.map.field);
    const LsmFields f = lsm_fields(image, r.mask, c.lsm);
    save_field(dir / "lc1.png", f.stats.lc1);
    save_field(dir / "lc2.png", f.stats.lc2);
    save_field(dir / "LSF1.png", f.lsf1);
    save_field(dir / "LSF2.png", f.lsf2);
  }
  write_run_manifest(out, c, "segment",
                     {{"final_T", r.trace.final_threshold},
                      {"converged", r.trace.converged},
                      {"iterations", r.trace.iterations.size()}});
  return 0;
}

/// LSM and Chan-Vese from the same initialization, scored against truth.
inline int cmd_compare(const RunConfig& c) {
  return cli_detail::run_batch(c, {"lsm", "chan_vese"}, "compare", "compare.csv");
}

/// Batch evaluation. With `seg` and `truth` set, scores that one mask;
/// otherwise runs LSM over the instances.
inline int cmd_eval(const RunConfig& c) {
  if (c.seg) {
    require_file(c.seg, "segmentation mask");
    require_file(c.truth, "truth mask");
    const fs::path out = require_out(c);
    const EvalReport r = evaluate(load_mask(*c.truth), load_mask(*c.seg));
    atomic_write_text(out / "report.csv", report_csv(r));
    std::printf("dice=%.6f rmse=%.4f n=%zu\n", r.dice, r.rmse, r.n_boundary_points);
    return 0;
  }
  return cli_detail::run_batch(c, {"lsm"}, "eval", "eval.csv");
}

/// Writes `count` synthetic triples (seeds seed, seed+1, ...) and a manifest.
inline int cmd_synth(const RunConfig& c) {
  c.validate();
  c.synth.validate();
  const fs::path out = require_out(c);
  nlohmann::json entries = nlohmann::json::array();
  std::vector<std::string> ids(static_cast<std::size_t>(c.count));
  for (int i = 0; i < c.count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "synth_%04d", i + 1);
    ids[static_cast<std::size_t>(i)] = buf;
  }
  parallel_for(ids.size(), c.workers, [&](std::size_t i) {
    SynthConfig s = c.synth;
    s.seed = c.seed + i;
    const SynthSample smp = generate(s);
    save_image(out / (ids[i] + "_image.png"), smp.image, 16);
    save_mask(out / (ids[i] + "_truth.png"), smp.truth);
    save_contour(out / (ids[i] + "_init.json"), smp.suggested_init);
  });
  for (std::size_t i = 0; i < ids.size(); ++i) {
    entries.push_back({{"id", ids[i]},
                       {"seed", c.seed + i},
                       {"image", ids[i] + "_image.png"},
                       {"truth", ids[i] + "_truth.png"},
                       {"init", ids[i] + "_init.json"}});
  }
  nlohmann::json j = run_config_to_json(c);
  j["tool"] = "csdseg";
  j["version"] = kVersion;
  j["command"] = "synth";
  j["entries"] = entries;
  atomic_write_text(out / "manifest.json", j.dump(2) + "\n");
  return 0;
}

/// d0, g0 and D_I as 16-bit rasters with min/max sidecars.
inline int cmd_dump_distmap(const RunConfig& c) {
  c.validate();
  require_file(c.image, "image");
  require_file(c.init, "init polygon");
  const fs::path out = require_out(c);
  const GrayImage image = load_image(*c.image, c.channel);
  const auto comp = build_distance_map_components(image, load_contour(*c.init), c.distmap);
  save_field(out / "d0.png", comp.euclidean);
  save_field(out / "g0.png", comp.geodesic);
  save_field(out / "DI.png", comp.map.field);
  write_run_manifest(out, c, "dump-distmap");
  return 0;
}

}  // namespace csdseg

#endif  // CSDSEG_CLI_HPP_
