// Command-line driver: segment, compare, synth, eval, dump-distmap.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "csdseg/cli.hpp"

namespace {

struct Flags {
  std::string image, init, truth, seg, manifest, out, config;
  std::optional<int> channel;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;
  bool dump_fields = false;

  // Parameter overrides.
  std::optional<int> max_iters;
  std::optional<double> tol;
  std::optional<int> cv_iters;
  std::optional<int> median_kernel;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration (flags override it)");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--workers", f.workers, "Parallel workers for batch work")->check(CLI::PositiveNumber);
}

void add_inputs(CLI::App* sub, Flags& f) {
  sub->add_option("--image", f.image, "Input image (.png or .pgm)");
  sub->add_option("--init", f.init, "Initial contour JSON");
  sub->add_option("--channel", f.channel, "Channel to use from a multi-channel image");
  sub->add_option("--max-iters", f.max_iters, "LSM iteration cap");
  sub->add_option("--tol", f.tol, "LSM convergence tolerance");
  sub->add_option("--median-kernel", f.median_kernel, "Median filter size for D_I");
}

csdseg::RunConfig resolve(const Flags& f) {
  csdseg::RunConfig c = f.config.empty() ? csdseg::RunConfig{} : csdseg::load_run_config(f.config);
  if (!f.image.empty()) c.image = f.image;
  if (!f.init.empty()) c.init = f.init;
  if (!f.truth.empty()) c.truth = f.truth;
  if (!f.seg.empty()) c.seg = f.seg;
  if (!f.manifest.empty()) c.manifest = f.manifest;
  if (!f.out.empty()) c.out = f.out;
  if (f.channel) c.channel = f.channel;
  if (f.workers) c.workers = *f.workers;
  if (f.seed) c.seed = *f.seed;
  if (f.count) c.count = *f.count;
  if (f.dump_fields) c.dump_fields = true;
  if (f.max_iters) c.lsm.max_iters = *f.max_iters;
  if (f.tol) c.lsm.tol = *f.tol;
  if (f.cv_iters) c.chan_vese.iters = *f.cv_iters;
  if (f.median_kernel) c.distmap.median_kernel = *f.median_kernel;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavefront segmentation by threshold descent on a signed distance map"};
  app.set_version_flag("--version", std::string(csdseg::kVersion));
  app.require_subcommand(1);
  Flags f;

  auto* segment = app.add_subcommand("segment", "Segment one image");
  add_common(segment, f);
  add_inputs(segment, f);
  segment->add_option("--truth", f.truth, "Ground-truth mask; adds report.csv");
  segment->add_flag("--dump-fields", f.dump_fields, "Write d0, g0, D_I, lc1, lc2, LSF1, LSF2");

  auto* compare = app.add_subcommand("compare", "LSM vs Chan-Vese against ground truth");
  add_common(compare, f);
  add_inputs(compare, f);
  compare->add_option("--truth", f.truth, "Ground-truth mask");
  compare->add_option("--manifest", f.manifest, "Batch manifest written by synth");
  compare->add_option("--cv-iters", f.cv_iters, "Chan-Vese iterations");

  auto* synth = app.add_subcommand("synth", "Generate synthetic image/truth/contour triples");
  add_common(synth, f);
  synth->add_option("--seed", f.seed, "Seed of the first instance");
  synth->add_option("--count", f.count, "Number of instances")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Score a mask, or run LSM over a batch");
  add_common(eval, f);
  add_inputs(eval, f);
  eval->add_option("--truth", f.truth, "Ground-truth mask");
  eval->add_option("--seg", f.seg, "Segmentation mask to score");
  eval->add_option("--manifest", f.manifest, "Batch manifest written by synth");

  auto* dump = app.add_subcommand("dump-distmap", "Write d0, g0 and D_I as 16-bit rasters");
  add_common(dump, f);
  add_inputs(dump, f);

  CLI11_PARSE(app, argc, argv);

  try {
    const csdseg::RunConfig c = resolve(f);
    if (segment->parsed()) return csdseg::cmd_segment(c);
    if (compare->parsed()) return csdseg::cmd_compare(c);
    if (synth->parsed()) return csdseg::cmd_synth(c);
    if (eval->parsed()) return csdseg::cmd_eval(c);
    if (dump->parsed()) return csdseg::cmd_dump_distmap(c);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "csdseg: %s\n", e.what());
    return 1;
  }
  return 1;
}
