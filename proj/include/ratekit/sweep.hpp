#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ratekit/curve.hpp"
#include "ratekit/digest.hpp"
#include "ratekit/errors.hpp"
#include "ratekit/external_codec.hpp"
#include "ratekit/fileio.hpp"
#include "ratekit/image.hpp"
#include "ratekit/metrics.hpp"
#include "ratekit/ms_ssim.hpp"
#include "ratekit/toy_codec.hpp"
#include "ratekit/vmaf.hpp"

#include "json.hpp"

namespace ratekit {

struct EncodeOutput {
  std::uint64_t bytes = 0;
  Yuv420Picture recon;
};

/// One compressor the sweep can drive. `id` keys the cache, so distinct
/// configurations must yield distinct ids.
class CodecBackend {
 public:
  virtual ~CodecBackend() = default;
  virtual std::string id() const = 0;
  /// Encode at qp, leave the bitstream at `bitstream_path`, return its size
  /// and the decoded reconstruction.
  virtual EncodeOutput encode_to(const Yuv420Picture& pic, int qp,
                                 const std::string& bitstream_path) = 0;
  /// Reconstruct from a bitstream previously produced for a picture with
  /// `shape`'s dimensions.
  virtual Yuv420Picture decode_file(const std::string& bitstream_path,
                                    const Yuv420Picture& shape) = 0;
};

class ToyCodecBackend : public CodecBackend {
 public:
  std::string id() const override { return "toy1"; }

  EncodeOutput encode_to(const Yuv420Picture& pic, int qp,
                         const std::string& bitstream_path) override {
    const std::vector<std::uint8_t> bits = toy_encode(pic, qp);
    write_file_atomic(bitstream_path,
                      std::string(reinterpret_cast<const char*>(bits.data()), bits.size()));
    return EncodeOutput{bits.size(), toy_decode(bits)};
  }

  Yuv420Picture decode_file(const std::string& bitstream_path, const Yuv420Picture&) override {
    const std::string raw = read_text_file(bitstream_path);
    return toy_decode(std::vector<std::uint8_t>(raw.begin(), raw.end()));
  }
};

class ExternalCodecBackend : public CodecBackend {
 public:
  explicit ExternalCodecBackend(EncoderAdapter adapter) : adapter_(std::move(adapter)) {}

  std::string id() const override { return "ext-" + adapter_id(adapter_).substr(0, 16); }

  EncodeOutput encode_to(const Yuv420Picture& pic, int qp,
                         const std::string& bitstream_path) override {
    const EncodeResult r = encode_external(adapter_, pic, qp, bitstream_path);
    Yuv420Picture recon = decode_external(adapter_, bitstream_path, pic.y.width, pic.y.height,
                                          pic.orig_width, pic.orig_height);
    return EncodeOutput{r.bitstream_bytes, std::move(recon)};
  }

  Yuv420Picture decode_file(const std::string& bitstream_path,
                            const Yuv420Picture& shape) override {
    return decode_external(adapter_, bitstream_path, shape.y.width, shape.y.height,
                           shape.orig_width, shape.orig_height);
  }

  const EncoderAdapter& adapter() const { return adapter_; }

 private:
  EncoderAdapter adapter_;
};

/// Content identity of a picture, independent of its file name.
inline std::string digest_picture(const Yuv420Picture& pic) {
  Digest d;
  const auto mix_plane = [&](const Plane& p) {
    d.update(std::to_string(p.width) + "x" + std::to_string(p.height) + ":" +
             std::to_string(p.bit_depth) + ";");
    d.update(p.data.data(), p.data.size() * sizeof(std::uint16_t));
  };
  d.update(std::to_string(pic.orig_width) + "x" + std::to_string(pic.orig_height) + ";");
  mix_plane(pic.y);
  mix_plane(pic.cb);
  mix_plane(pic.cr);
  return d.hex();
}

inline std::vector<int> default_qp_range() {
  std::vector<int> qps;
  for (int qp = 27; qp <= 47; ++qp) qps.push_back(qp);
  return qps;
}

struct SweepOptions {
  std::vector<int> qps = default_qp_range();
  MetricKind quality = MetricKind::vmaf;
  std::string cache_dir;
  int workers = 1;
  VmafConfig vmaf;
  XpsnrParams xpsnr;
  MsSsimParams msssim;
};

struct SweepStats {
  int encodes_executed = 0;
};

struct SweepInput {
  std::string image_id;
  Yuv420Picture pic;
};

/// Cache key of one (picture, backend, qp) evaluation and the bitstream path
/// relative to the cache dir. Manifests reference bitstreams by these names.
inline std::string sweep_record_key(const std::string& image_digest,
                                    const std::string& backend_id, int qp) {
  const std::string tag = qp < 10 ? "qp0" + std::to_string(qp) : "qp" + std::to_string(qp);
  return image_digest + "-" + backend_id + "-" + tag;
}

inline std::string sweep_bitstream_name(const std::string& image_digest,
                                        const std::string& backend_id, int qp) {
  return "bitstreams/" + sweep_record_key(image_digest, backend_id, qp) + ".bin";
}

namespace detail {

/// Metric values serialize as numbers, with identical-input infinities spelled
/// out so they survive JSON.
inline nlohmann::json metric_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

inline double metric_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw FormatError("cache record holds an unrecognized metric value");
  }
  return j.get<double>();
}

inline bool msssim_fits(const Plane& p, const MsSsimParams& params) {
  int w = p.width, h = p.height;
  for (int level = 0; level < params.scales; ++level) {
    if (w < params.window || h < params.window) return false;
    w /= 2;
    h /= 2;
  }
  return true;
}

[[noreturn]] inline void rethrow_annotated(std::exception_ptr ep, const std::string& prefix) {
  try {
    std::rethrow_exception(ep);
  } catch (const ToolMissingError& e) {
    throw ToolMissingError(prefix + e.what());
  } catch (const ToolOutputError& e) {
    throw ToolOutputError(prefix + e.what());
  } catch (const ToolError& e) {
    throw ToolError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const FormatError& e) {
    throw FormatError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace detail

/// Local metrics for one (source, reconstruction) pair: combined-plane psnr,
/// luma activity-weighted psnr, luma multi-scale similarity when the picture
/// is large enough.
inline std::map<std::string, double> compute_local_metrics(const Yuv420Picture& ref,
                                                           const Yuv420Picture& recon,
                                                           const SweepOptions& opts) {
  std::map<std::string, double> m;
  m["psnr"] = psnr_yuv(ref, recon);
  m["xpsnr"] = xpsnr(ref.y, recon.y, opts.xpsnr);
  if (detail::msssim_fits(ref.y, opts.msssim))
    m["msssim"] = ms_ssim(ref.y, recon.y, opts.msssim);
  return m;
}

/// Scores a pair with the external tool by materializing both pictures as raw
/// files in a private temp dir.
inline double score_vmaf_pair(const Yuv420Picture& ref, const Yuv420Picture& recon,
                              const VmafConfig& config) {
  detail::TempDir dir;
  const std::string ref_path = (dir.path() / "ref.yuv").string();
  const std::string deg_path = (dir.path() / "deg.yuv").string();
  write_yuv_raw(ref, ref_path);
  write_yuv_raw(recon, deg_path);
  return vmaf_external(ref_path, deg_path, config, ref.y.width, ref.y.height).value;
}

namespace detail {

struct SweepJob {
  std::size_t input_index;
  int qp;
};

/// One (image, qp) evaluation with cache lookup. Only a cache miss invokes
/// the encoder; a hit lacking some metric decodes the cached bitstream and
/// fills in what is missing.
inline RateQualityPoint run_sweep_job(CodecBackend& backend, const SweepInput& input,
                                      const std::string& image_digest, int qp,
                                      const SweepOptions& opts,
                                      std::atomic<int>& encodes_executed) {
  namespace fs = std::filesystem;
  const std::string key = sweep_record_key(image_digest, backend.id(), qp);
  const fs::path record_path = fs::path(opts.cache_dir) / "records" / (key + ".json");
  const std::string bitstream_rel = sweep_bitstream_name(image_digest, backend.id(), qp);
  const fs::path bitstream_path = fs::path(opts.cache_dir) / bitstream_rel;

  const bool want_vmaf = opts.quality == MetricKind::vmaf;

  nlohmann::json record;
  bool have_record = false;
  if (fs::exists(record_path) && fs::exists(bitstream_path)) {
    try {
      record = nlohmann::json::parse(read_text_file(record_path));
      have_record = record.is_object() && record.contains("bytes") && record.contains("metrics");
    } catch (const std::exception&) {
      have_record = false;  // unreadable record: redo the work
    }
  }

  std::map<std::string, double> metrics;
  std::uint64_t bytes = 0;
  std::optional<Yuv420Picture> recon;

  if (have_record) {
    bytes = record.at("bytes").get<std::uint64_t>();
    for (const auto& [name, value] : record.at("metrics").items())
      metrics[name] = metric_from_json(value);
    const bool vmaf_current =
        record.contains("tools") && record.at("tools").contains("vmaf") &&
        record.at("tools").at("vmaf").get<std::string>() == opts.vmaf.version_tag;
    if (!vmaf_current) metrics.erase("vmaf");
  } else {
    encodes_executed.fetch_add(1, std::memory_order_relaxed);
    EncodeOutput out = backend.encode_to(input.pic, qp, bitstream_path.string());
    bytes = out.bytes;
    recon = std::move(out.recon);
    metrics = compute_local_metrics(input.pic, *recon, opts);
  }

  const bool missing_local = !metrics.count("psnr") || !metrics.count("xpsnr") ||
                             (msssim_fits(input.pic.y, opts.msssim) && !metrics.count("msssim"));
  const bool missing_vmaf = want_vmaf && !metrics.count("vmaf");
  if (missing_local || missing_vmaf) {
    if (!recon) recon = backend.decode_file(bitstream_path.string(), input.pic);
    if (missing_local) {
      std::map<std::string, double> local = compute_local_metrics(input.pic, *recon, opts);
      for (auto& [name, value] : local) metrics.emplace(name, value);
    }
    if (missing_vmaf) metrics["vmaf"] = score_vmaf_pair(input.pic, *recon, opts.vmaf);
  }

  const bool dirty = !have_record || missing_local || missing_vmaf;
  if (dirty) {
    nlohmann::json out;
    out["image_digest"] = image_digest;
    out["backend"] = backend.id();
    out["qp"] = qp;
    out["bytes"] = bytes;
    out["bitstream"] = bitstream_rel;
    nlohmann::json jm = nlohmann::json::object();
    for (const auto& [name, value] : metrics) jm[name] = metric_to_json(value);
    out["metrics"] = jm;
    if (metrics.count("vmaf")) out["tools"] = {{"vmaf", opts.vmaf.version_tag}};
    write_file_atomic(record_path.string(), out.dump(2) + "\n");
  }

  RateQualityPoint point;
  point.qp = qp;
  point.bytes = bytes;
  point.aux = metrics;
  const auto it = metrics.find(metric_name(opts.quality));
  if (it == metrics.end())
    throw ConfigError(std::string("metric '") + metric_name(opts.quality) +
                      "' is not available for this picture (too small for it?)");
  point.quality = it->second;
  return point;
}

}  // namespace detail

/// Sweeps every input over every qp with a bounded worker pool, returning one
/// pruned curve per input in input order. Results are cached under
/// `opts.cache_dir` keyed by (content digest, backend id, qp).
inline std::vector<RateQualityCurve> run_sweep(CodecBackend& backend,
                                               const std::vector<SweepInput>& inputs,
                                               const SweepOptions& opts,
                                               SweepStats* stats = nullptr) {
  namespace fs = std::filesystem;
  if (inputs.empty()) throw ConfigError("sweep needs at least one input picture");
  if (opts.qps.empty()) throw ConfigError("sweep needs a non-empty qp list");
  if (opts.cache_dir.empty()) throw ConfigError("sweep needs a cache directory");
  {
    std::set<std::string> seen;
    for (const SweepInput& in : inputs)
      if (!seen.insert(in.image_id).second)
        throw ConfigError("duplicate sweep input id '" + in.image_id + "'");
  }
  fs::create_directories(fs::path(opts.cache_dir) / "records");
  fs::create_directories(fs::path(opts.cache_dir) / "bitstreams");

  std::vector<std::string> digests;
  digests.reserve(inputs.size());
  for (const SweepInput& in : inputs) {
    validate_picture(in.pic);
    digests.push_back(digest_picture(in.pic));
  }

  std::vector<detail::SweepJob> jobs;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (int qp : opts.qps) jobs.push_back({i, qp});

  std::vector<RateQualityPoint> points(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> encodes{0};

  const int pool = std::max(1, std::min<int>(opts.workers, int(jobs.size())));
  const auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1, std::memory_order_relaxed);
      if (j >= jobs.size()) return;
      try {
        points[j] = detail::run_sweep_job(backend, inputs[jobs[j].input_index],
                                          digests[jobs[j].input_index], jobs[j].qp, opts,
                                          encodes);
      } catch (...) {
        failures[j] = std::current_exception();
      }
    }
  };

  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  if (stats) stats->encodes_executed += encodes.load();

  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (failures[j])
      detail::rethrow_annotated(failures[j],
                                "image '" + inputs[jobs[j].input_index].image_id + "' qp " +
                                    std::to_string(jobs[j].qp) + ": ");

  std::vector<RateQualityCurve> curves;
  curves.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<RateQualityPoint> raw;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].input_index == i) raw.push_back(points[j]);
    curves.push_back(build_curve(inputs[i].image_id,
                                 std::uint64_t(inputs[i].pic.orig_width) *
                                     std::uint64_t(inputs[i].pic.orig_height),
                                 std::move(raw)));
  }
  return curves;
}

inline RateQualityCurve sweep_image(CodecBackend& backend, const std::string& image_id,
                                    const Yuv420Picture& pic, const SweepOptions& opts,
                                    SweepStats* stats = nullptr) {
  return run_sweep(backend, {{image_id, pic}}, opts, stats).front();
}

/// Curve files: JSON with image_id, pixels, and the pruned point list.
inline void save_curve(const RateQualityCurve& curve, const std::string& path) {
  nlohmann::json points = nlohmann::json::array();
  for (const RateQualityPoint& p : curve.points) {
    nlohmann::json jp;
    jp["qp"] = p.qp;
    jp["bytes"] = p.bytes;
    jp["quality"] = detail::metric_to_json(p.quality);
    nlohmann::json aux = nlohmann::json::object();
    for (const auto& [name, value] : p.aux) aux[name] = detail::metric_to_json(value);
    jp["aux"] = aux;
    points.push_back(jp);
  }
  nlohmann::json j;
  j["image_id"] = curve.image_id;
  j["pixels"] = curve.pixels;
  j["points"] = points;
  write_file_atomic(path, j.dump(2) + "\n");
}

inline RateQualityCurve load_curve(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("curve file " + path + " is not valid JSON: " + e.what());
  }
  try {
    RateQualityCurve curve;
    curve.image_id = j.at("image_id").get<std::string>();
    curve.pixels = j.at("pixels").get<std::uint64_t>();
    for (const nlohmann::json& jp : j.at("points")) {
      RateQualityPoint p;
      p.qp = jp.at("qp").get<int>();
      p.bytes = jp.at("bytes").get<std::uint64_t>();
      p.quality = detail::metric_from_json(jp.at("quality"));
      if (jp.contains("aux"))
        for (const auto& [name, value] : jp.at("aux").items())
          p.aux[name] = detail::metric_from_json(value);
      curve.points.push_back(std::move(p));
    }
    return curve;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("curve file " + path + " is missing required fields: " + e.what());
  }
}

}  // namespace ratekit
