// Command-line front-end for the rate allocation toolkit.
//
// Subcommands: convert (PNG <-> raw 4:2:0), sweep (qp sweeps into a cache),
// allocate (max-min budget allocation + manifest/report), bdrate (curve
// deltas), metrics (pairwise scoring), report (re-render manifests).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ratekit/ratekit.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
namespace rk = ratekit;

namespace {

std::string fmt_score(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared pipeline flags. A config file fills the baseline; any flag given on
// the command line wins over the file value.

struct PipelineFlags {
  std::string config_path, corpus, adapter, metric, cache;
  int qp_lo = 0, qp_hi = 0, workers = 0;
  std::string vmaf_exe, vmaf_args, vmaf_pointer, vmaf_version;

  CLI::Option *o_config = nullptr, *o_corpus = nullptr, *o_adapter = nullptr,
              *o_metric = nullptr, *o_cache = nullptr, *o_qp_lo = nullptr, *o_qp_hi = nullptr,
              *o_workers = nullptr, *o_vmaf_exe = nullptr, *o_vmaf_args = nullptr,
              *o_vmaf_pointer = nullptr, *o_vmaf_version = nullptr;

  void add_to(CLI::App* sub) {
    o_config = sub->add_option("--config", config_path, "JSON pipeline config file");
    o_corpus = sub->add_option("--corpus", corpus, "directory of source PNG images");
    o_adapter =
        sub->add_option("--adapter", adapter, "encoder adapter preset JSON, or 'toy' (default)");
    o_qp_lo = sub->add_option("--qp-lo", qp_lo, "lowest qp of the sweep (default 27)");
    o_qp_hi = sub->add_option("--qp-hi", qp_hi, "highest qp of the sweep (default 47)");
    o_metric =
        sub->add_option("--metric", metric, "allocation metric: psnr, xpsnr, msssim, vmaf");
    o_cache = sub->add_option("--cache", cache, "cache directory (default ratekit-cache)");
    o_workers = sub->add_option("--workers", workers, "parallel jobs, 0 = one per core");
    o_vmaf_exe = sub->add_option("--vmaf-exe", vmaf_exe, "external score tool executable");
    o_vmaf_args = sub->add_option("--vmaf-args", vmaf_args, "score tool argument template");
    o_vmaf_pointer =
        sub->add_option("--vmaf-pointer", vmaf_pointer, "JSON pointer to the pooled score");
    o_vmaf_version = sub->add_option("--vmaf-version", vmaf_version, "score tool version tag");
  }

  rk::PipelineConfig resolve() const {
    rk::PipelineConfig c;
    if (o_config->count()) c = rk::load_pipeline_config(config_path);
    if (o_corpus->count()) c.corpus_dir = corpus;
    if (o_adapter->count()) c.adapter_preset = adapter;
    if (o_qp_lo->count()) c.qp_lo = qp_lo;
    if (o_qp_hi->count()) c.qp_hi = qp_hi;
    if (o_metric->count()) c.metric = metric;
    if (o_cache->count()) c.cache_dir = cache;
    if (o_workers->count()) c.workers = workers;
    if (o_vmaf_exe->count()) c.vmaf.executable = vmaf_exe;
    if (o_vmaf_args->count()) c.vmaf.args_template = vmaf_args;
    if (o_vmaf_pointer->count()) c.vmaf.score_pointer = vmaf_pointer;
    if (o_vmaf_version->count()) c.vmaf.version_tag = vmaf_version;
    rk::validate_config(c);
    return c;
  }
};

std::unique_ptr<rk::CodecBackend> make_backend(const rk::PipelineConfig& config) {
  if (config.adapter_preset.empty() || config.adapter_preset == "toy")
    return std::make_unique<rk::ToyCodecBackend>();
  return std::make_unique<rk::ExternalCodecBackend>(
      rk::load_adapter_preset(config.adapter_preset));
}

rk::SweepOptions sweep_options(const rk::PipelineConfig& config) {
  rk::SweepOptions opts;
  opts.qps = rk::config_qps(config);
  opts.quality = rk::parse_metric_kind(config.metric);
  opts.cache_dir = config.cache_dir;
  opts.workers = rk::effective_workers(config);
  opts.vmaf = config.vmaf;
  return opts;
}

std::vector<rk::SweepInput> load_corpus(const std::string& dir) {
  if (dir.empty()) throw rk::ConfigError("no corpus directory configured (--corpus)");
  if (!fs::is_directory(dir)) throw rk::ConfigError("corpus directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw rk::ConfigError("corpus " + dir + " contains no .png files");

  std::vector<rk::SweepInput> inputs;
  for (const fs::path& f : files)
    inputs.push_back({f.stem().string(), rk::rgb_to_yuv420(rk::load_png(f))});
  return inputs;
}

// ---------------------------------------------------------------------------
// Raw-file sidecar: dimensions that a headerless .yuv needs to be read back.

void write_sidecar(const std::string& yuv_path, const rk::Yuv420Picture& pic) {
  nlohmann::json j;
  j["width"] = pic.y.width;
  j["height"] = pic.y.height;
  j["orig_width"] = pic.orig_width;
  j["orig_height"] = pic.orig_height;
  j["bit_depth"] = pic.bit_depth();
  rk::write_file_atomic(yuv_path + ".json", j.dump(2) + "\n");
}

rk::Yuv420Picture load_picture_any(const std::string& path, int width, int height,
                                   int orig_width, int orig_height) {
  const fs::path p(path);
  if (p.extension() == ".png") return rk::rgb_to_yuv420(rk::load_png(p));

  if (width <= 0 || height <= 0) {
    const std::string sidecar = path + ".json";
    if (!fs::exists(sidecar))
      throw rk::ConfigError("raw input " + path + " needs --width/--height or a " + sidecar +
                            " sidecar");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(rk::read_text_file(sidecar));
      width = j.at("width").get<int>();
      height = j.at("height").get<int>();
      orig_width = j.value("orig_width", width);
      orig_height = j.value("orig_height", height);
    } catch (const nlohmann::json::exception& e) {
      throw rk::FormatError("sidecar " + sidecar + " is malformed: " + e.what());
    }
  }
  return rk::read_yuv_raw(p, width, height, orig_width, orig_height);
}

// ---------------------------------------------------------------------------
// convert

struct ConvertArgs {
  std::string input, output, direction = "auto";
  int width = -1, height = -1, orig_width = -1, orig_height = -1;
};

void run_convert(const ConvertArgs& a) {
  std::string dir = a.direction;
  if (dir == "auto") {
    const std::string ext = fs::path(a.input).extension().string();
    if (ext == ".png")
      dir = "forward";
    else if (ext == ".yuv")
      dir = "inverse";
    else
      throw rk::ConfigError("cannot infer direction from '" + a.input +
                            "'; pass --direction forward|inverse");
  }

  if (dir == "forward") {
    const rk::RgbImage img = rk::load_png(a.input);
    const rk::Yuv420Picture pic = rk::rgb_to_yuv420(img);
    rk::write_yuv_raw(pic, a.output);
    write_sidecar(a.output, pic);
    std::printf("%s: %dx%d -> %s (%dx%d padded) + sidecar\n", a.input.c_str(), img.width,
                img.height, a.output.c_str(), pic.y.width, pic.y.height);
  } else if (dir == "inverse") {
    const rk::Yuv420Picture pic =
        load_picture_any(a.input, a.width, a.height, a.orig_width, a.orig_height);
    const rk::RgbImage img = rk::yuv420_to_rgb(pic);
    rk::save_png(img, a.output);
    std::printf("%s: %dx%d -> %s (%dx%d)\n", a.input.c_str(), pic.y.width, pic.y.height,
                a.output.c_str(), img.width, img.height);
  } else {
    throw rk::ConfigError("direction must be forward, inverse, or auto");
  }
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string export_curves, export_rd, plot_csv;
};

void print_curve_summaries(const std::vector<rk::RateQualityCurve>& curves,
                           const std::string& metric) {
  for (const rk::RateQualityCurve& c : curves) {
    std::printf("%s: %zu points, %llu..%llu bytes, %s %s..%s\n", c.image_id.c_str(),
                c.points.size(), (unsigned long long)c.points.front().bytes,
                (unsigned long long)c.points.back().bytes, metric.c_str(),
                fmt_score(c.points.front().quality).c_str(),
                fmt_score(c.points.back().quality).c_str());
  }
}

void run_sweep_cmd(const PipelineFlags& flags, const SweepArgs& a) {
  const rk::PipelineConfig config = flags.resolve();
  const std::vector<rk::SweepInput> inputs = load_corpus(config.corpus_dir);
  const std::unique_ptr<rk::CodecBackend> backend = make_backend(config);

  rk::SweepStats stats;
  const std::vector<rk::RateQualityCurve> curves =
      rk::run_sweep(*backend, inputs, sweep_options(config), &stats);

  print_curve_summaries(curves, config.metric);
  std::printf("%d encodes executed\n", stats.encodes_executed);

  if (!a.export_curves.empty()) {
    fs::create_directories(a.export_curves);
    for (const rk::RateQualityCurve& c : curves)
      rk::save_curve(c, (fs::path(a.export_curves) / (c.image_id + ".curve.json")).string());
  }
  if (!a.export_rd.empty()) {
    fs::create_directories(a.export_rd);
    for (const rk::RateQualityCurve& c : curves)
      rk::save_rd_curve(rk::rd_curve_from_sweep(c),
                        (fs::path(a.export_rd) / (c.image_id + ".rd.json")).string());
  }
  if (!a.plot_csv.empty()) rk::write_plot_csv(curves, a.plot_csv);
}

// ---------------------------------------------------------------------------
// allocate

struct AllocateArgs {
  std::vector<std::string> bpp_targets;
  std::string out_dir = ".";
};

void run_allocate(const PipelineFlags& flags, const AllocateArgs& a) {
  const rk::PipelineConfig config = flags.resolve();
  const std::vector<rk::SweepInput> inputs = load_corpus(config.corpus_dir);
  const std::unique_ptr<rk::CodecBackend> backend = make_backend(config);

  rk::SweepStats stats;
  const std::vector<rk::RateQualityCurve> curves =
      rk::run_sweep(*backend, inputs, sweep_options(config), &stats);
  std::printf("%d encodes executed\n", stats.encodes_executed);

  std::uint64_t total_pixels = 0;
  std::map<std::string, std::string> digests;
  for (const rk::SweepInput& in : inputs) {
    total_pixels += std::uint64_t(in.pic.orig_width) * std::uint64_t(in.pic.orig_height);
    digests[in.image_id] = rk::digest_picture(in.pic);
  }

  const std::vector<std::string> targets =
      a.bpp_targets.empty() ? config.bpp_targets : a.bpp_targets;
  fs::create_directories(a.out_dir);

  std::vector<rk::Manifest> manifests;
  for (const std::string& bpp : targets) {
    const rk::BudgetSpec spec = rk::compute_budget(bpp, total_pixels);
    const rk::AllocationResult alloc = rk::allocate_greedy(curves, spec.budget_bytes);

    std::map<std::string, std::string> bitstreams;
    for (const auto& [image_id, sel] : alloc.selection)
      bitstreams[image_id] =
          rk::sweep_bitstream_name(digests.at(image_id), backend->id(), sel.qp);

    rk::Manifest manifest = rk::make_manifest(config.metric, backend->id(), bpp, spec, alloc,
                                              curves, bitstreams);
    manifest.config = rk::config_to_json(config);
    const std::string path = (fs::path(a.out_dir) / ("manifest_" + bpp + ".json")).string();
    rk::save_manifest(manifest, path);
    std::printf("bpp %s: budget %llu bytes, spent %llu, min %s %s, mean %s -> %s\n",
                bpp.c_str(), (unsigned long long)spec.budget_bytes,
                (unsigned long long)alloc.total_bytes, config.metric.c_str(),
                fmt_score(alloc.min_quality).c_str(), fmt_score(alloc.mean_quality).c_str(),
                path.c_str());
    manifests.push_back(std::move(manifest));
  }

  const rk::Report report = rk::make_report(manifests);
  rk::save_report(report, (fs::path(a.out_dir) / "report.json").string());
  const std::string text = rk::render_report_text(report);
  rk::write_file_atomic((fs::path(a.out_dir) / "report.txt").string(), text);
  std::printf("%s", text.c_str());
}

// ---------------------------------------------------------------------------
// bdrate

void run_bdrate(const std::string& path_ref, const std::string& path_test) {
  const rk::RdCurve ref = rk::load_rd_curve(path_ref);
  const rk::RdCurve test = rk::load_rd_curve(path_test);
  const rk::BdResult rate = rk::bd_rate(ref, test);
  const rk::BdResult quality = rk::bd_quality(ref, test);
  std::printf("bd_rate    %+.6f%%  (quality overlap [%.6f, %.6f])\n", rate.value,
              rate.overlap_lo, rate.overlap_hi);
  std::printf("bd_quality %+.6f  (log10-rate overlap [%.6f, %.6f])\n", quality.value,
              quality.overlap_lo, quality.overlap_hi);
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::string ref, deg;
  int width = -1, height = -1, orig_width = -1, orig_height = -1;
  bool with_vmaf = false;
  std::string cache_path;
};

void run_metrics(const PipelineFlags& flags, const MetricsArgs& a) {
  const rk::Yuv420Picture ref =
      load_picture_any(a.ref, a.width, a.height, a.orig_width, a.orig_height);
  const rk::Yuv420Picture deg =
      load_picture_any(a.deg, a.width, a.height, a.orig_width, a.orig_height);

  std::printf("psnr = %s\n", fmt_score(rk::psnr_yuv(ref, deg)).c_str());
  std::printf("xpsnr = %s\n", fmt_score(rk::xpsnr(ref.y, deg.y)).c_str());
  const rk::MsSsimParams ms;
  bool fits = true;
  for (int level = 0, w = ref.y.width, h = ref.y.height; level < ms.scales; ++level, w /= 2, h /= 2)
    if (w < ms.window || h < ms.window) fits = false;
  if (fits)
    std::printf("msssim = %s\n", fmt_score(rk::ms_ssim(ref.y, deg.y, ms)).c_str());
  else
    std::printf("msssim = n/a (needs at least %d pixels per axis)\n", ms.window << (ms.scales - 1));

  if (a.with_vmaf) {
    rk::VmafConfig vconf;
    if (flags.o_vmaf_exe->count()) vconf.executable = flags.vmaf_exe;
    if (flags.o_vmaf_args->count()) vconf.args_template = flags.vmaf_args;
    if (flags.o_vmaf_pointer->count()) vconf.score_pointer = flags.vmaf_pointer;
    if (flags.o_vmaf_version->count()) vconf.version_tag = flags.vmaf_version;

    double value = 0.0;
    if (!a.cache_path.empty()) {
      rk::ScoreCache cache(a.cache_path);
      const std::string key = rk::ScoreCache::make_key(
          rk::digest_picture(ref), rk::digest_picture(deg), "vmaf", vconf.version_tag);
      if (const auto hit = cache.lookup(key)) {
        value = *hit;
      } else {
        value = rk::score_vmaf_pair(ref, deg, vconf);
        cache.store(key, value);
      }
    } else {
      value = rk::score_vmaf_pair(ref, deg, vconf);
    }
    std::printf("vmaf = %s\n", fmt_score(value).c_str());
  }
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> manifests;
  std::string text_out, json_out;
};

void run_report(const ReportArgs& a) {
  std::vector<rk::Manifest> manifests;
  for (const std::string& path : a.manifests) manifests.push_back(rk::load_manifest(path));
  const rk::Report report = rk::make_report(manifests);
  const std::string text = rk::render_report_text(report);
  if (!a.text_out.empty()) rk::write_file_atomic(a.text_out, text);
  if (!a.json_out.empty()) rk::save_report(report, a.json_out);
  std::printf("%s", text.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"codec-agnostic perceptual rate allocation toolkit"};
  app.require_subcommand(1);

  ConvertArgs convert_args;
  CLI::App* convert = app.add_subcommand("convert", "PNG to raw 4:2:0 10-bit, or back");
  convert->add_option("input", convert_args.input, "source file (.png or .yuv)")->required();
  convert->add_option("output", convert_args.output, "destination file")->required();
  convert->add_option("--direction", convert_args.direction,
                      "forward (png->yuv), inverse (yuv->png), auto (by extension)");
  convert->add_option("--width", convert_args.width, "padded width of a raw input");
  convert->add_option("--height", convert_args.height, "padded height of a raw input");
  convert->add_option("--orig-width", convert_args.orig_width, "pre-padding width");
  convert->add_option("--orig-height", convert_args.orig_height, "pre-padding height");

  PipelineFlags sweep_flags;
  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "encode the corpus over the qp range");
  sweep_flags.add_to(sweep);
  sweep->add_option("--export-curves", sweep_args.export_curves,
                    "directory for per-image curve JSON files");
  sweep->add_option("--export-rd", sweep_args.export_rd,
                    "directory for per-image rate-quality JSON files (bdrate input)");
  sweep->add_option("--plot-csv", sweep_args.plot_csv, "CSV file with every curve point");

  PipelineFlags alloc_flags;
  AllocateArgs alloc_args;
  CLI::App* allocate = app.add_subcommand("allocate", "spend byte budgets across the corpus");
  alloc_flags.add_to(allocate);
  allocate->add_option("--bpp", alloc_args.bpp_targets,
                       "bits-per-pixel target(s), decimal strings; default from config");
  allocate->add_option("--out", alloc_args.out_dir, "output directory for manifests + report");

  std::string bd_ref, bd_test;
  CLI::App* bdrate = app.add_subcommand("bdrate", "delta between two exported rd curves");
  bdrate->add_option("reference", bd_ref, "reference rd curve JSON")->required();
  bdrate->add_option("tested", bd_test, "tested rd curve JSON")->required();

  PipelineFlags metrics_flags;
  MetricsArgs metrics_args;
  CLI::App* metrics = app.add_subcommand("metrics", "score a (reference, degraded) pair");
  metrics->add_option("--ref", metrics_args.ref, "reference image (.png or .yuv)")->required();
  metrics->add_option("--deg", metrics_args.deg, "degraded image (.png or .yuv)")->required();
  metrics->add_option("--width", metrics_args.width, "padded width for raw inputs");
  metrics->add_option("--height", metrics_args.height, "padded height for raw inputs");
  metrics->add_option("--orig-width", metrics_args.orig_width, "pre-padding width");
  metrics->add_option("--orig-height", metrics_args.orig_height, "pre-padding height");
  metrics->add_flag("--vmaf", metrics_args.with_vmaf, "also run the external score tool");
  metrics->add_option("--score-cache", metrics_args.cache_path,
                      "score cache JSON file for external tool results");
  metrics_flags.add_to(metrics);

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "render a report from saved manifests");
  report->add_option("manifests", report_args.manifests, "allocation manifest JSON file(s)")
      ->required();
  report->add_option("--text", report_args.text_out, "also write the text report here");
  report->add_option("--json", report_args.json_out, "also write the JSON report here");

  convert->callback([&] { run_convert(convert_args); });
  sweep->callback([&] { run_sweep_cmd(sweep_flags, sweep_args); });
  allocate->callback([&] { run_allocate(alloc_flags, alloc_args); });
  bdrate->callback([&] { run_bdrate(bd_ref, bd_test); });
  metrics->callback([&] { run_metrics(metrics_flags, metrics_args); });
  report->callback([&] { run_report(report_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const rk::InfeasibleBudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const rk::ToolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const rk::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
