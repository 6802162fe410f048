#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "ratekit/sweep.hpp"
#include "testutil.hpp"

using namespace ratekit;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

SweepOptions toy_options(const TempDir& dir, std::vector<int> qps,
                         MetricKind quality = MetricKind::psnr) {
  SweepOptions opts;
  opts.qps = std::move(qps);
  opts.quality = quality;
  opts.cache_dir = (dir.path() / "cache").string();
  return opts;
}

std::map<std::string, std::string> slurp_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    files[entry.path().filename().string()] = read_text_file(entry.path().string());
  return files;
}

std::size_t count_dir(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("a toy sweep yields a monotone curve with qps in rate order", "[sweep]") {
  TempDir dir;
  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, {20, 30, 40});
  Yuv420Picture pic = testutil::test_picture(48, 32, 0x51EE9);

  SweepStats stats;
  RateQualityCurve curve = sweep_image(backend, "lake", pic, opts, &stats);
  REQUIRE(stats.encodes_executed == 3);
  REQUIRE(curve.image_id == "lake");
  REQUIRE(curve.pixels == 48 * 32);
  REQUIRE(curve.points.size() == 3);
  REQUIRE_NOTHROW(validate_curve(curve));
  // Cheapest point comes from the coarsest qp
  REQUIRE(curve.points.front().qp == 40);
  REQUIRE(curve.points.back().qp == 20);
  for (const RateQualityPoint& p : curve.points) {
    REQUIRE(p.aux.count("psnr"));
    REQUIRE(p.aux.count("xpsnr"));
    REQUIRE_FALSE(p.aux.count("msssim"));  // 48x32 is far below the size floor
  }
}

TEST_CASE("a second run is served entirely from cache", "[sweep]") {
  TempDir dir;
  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, {22, 30, 38});
  Yuv420Picture pic = testutil::test_picture(40, 24, 0xCACE);

  SweepStats first;
  RateQualityCurve original = sweep_image(backend, "img", pic, opts, &first);
  REQUIRE(first.encodes_executed == 3);

  SweepStats second;
  RateQualityCurve cached = sweep_image(backend, "img", pic, opts, &second);
  REQUIRE(second.encodes_executed == 0);
  REQUIRE(cached.points == original.points);
  REQUIRE(cached.pixels == original.pixels);
}

TEST_CASE("the default qp range covers 27 through 47", "[sweep]") {
  const std::vector<int> qps = default_qp_range();
  REQUIRE(qps.size() == 21);
  REQUIRE(qps.front() == 27);
  REQUIRE(qps.back() == 47);

  TempDir dir;
  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, qps);
  Yuv420Picture pic = testutil::test_picture(32, 32, 0xFADE);
  sweep_image(backend, "img", pic, opts);
  // One cache record and one bitstream per qp, before any pruning
  REQUIRE(count_dir(fs::path(opts.cache_dir) / "records") == 21);
  REQUIRE(count_dir(fs::path(opts.cache_dir) / "bitstreams") == 21);
}

TEST_CASE("parallel and serial sweeps agree bit for bit", "[sweep]") {
  Yuv420Picture a = testutil::test_picture(48, 32, 0xAAA);
  Yuv420Picture b = testutil::test_picture(32, 48, 0xBBB);
  const std::vector<SweepInput> inputs = {{"a", a}, {"b", b}};
  const std::vector<int> qps = {24, 28, 32, 36, 40};

  TempDir serial_dir, parallel_dir;
  ToyCodecBackend backend;
  SweepOptions serial = toy_options(serial_dir, qps);
  SweepOptions parallel = toy_options(parallel_dir, qps);
  parallel.workers = 4;

  std::vector<RateQualityCurve> s = run_sweep(backend, inputs, serial);
  std::vector<RateQualityCurve> p = run_sweep(backend, inputs, parallel);
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    REQUIRE(s[i].image_id == p[i].image_id);
    REQUIRE(s[i].points == p[i].points);
  }

  REQUIRE(slurp_dir(fs::path(serial.cache_dir) / "records") ==
          slurp_dir(fs::path(parallel.cache_dir) / "records"));
}

TEST_CASE("records list their key fields", "[sweep]") {
  TempDir dir;
  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, {30});
  Yuv420Picture pic = testutil::test_picture(32, 32, 0x4EC);
  sweep_image(backend, "img", pic, opts);

  const std::string digest = digest_picture(pic);
  const std::string key = sweep_record_key(digest, backend.id(), 30);
  REQUIRE(key == digest + "-toy1-qp30");
  const fs::path record_path = fs::path(opts.cache_dir) / "records" / (key + ".json");
  REQUIRE(fs::exists(record_path));

  nlohmann::json record = nlohmann::json::parse(read_text_file(record_path.string()));
  REQUIRE(record.at("image_digest") == digest);
  REQUIRE(record.at("backend") == "toy1");
  REQUIRE(record.at("qp") == 30);
  REQUIRE(record.at("bitstream") == sweep_bitstream_name(digest, backend.id(), 30));
  REQUIRE(record.at("metrics").contains("psnr"));
  REQUIRE_FALSE(record.contains("tools"));  // no external score requested

  const fs::path bs = fs::path(opts.cache_dir) / sweep_bitstream_name(digest, backend.id(), 30);
  REQUIRE(fs::file_size(bs) == record.at("bytes").get<std::uint64_t>());
}

TEST_CASE("a cached record missing one metric is filled by decoding", "[sweep]") {
  TempDir dir;
  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, {32}, MetricKind::xpsnr);
  Yuv420Picture pic = testutil::test_picture(48, 48, 0xF111);

  RateQualityCurve original = sweep_image(backend, "img", pic, opts);
  const double expected_xpsnr = original.points.at(0).quality;

  // Age the record: strip the metric the next run will ask for.
  const std::string key = sweep_record_key(digest_picture(pic), backend.id(), 32);
  const fs::path record_path = fs::path(opts.cache_dir) / "records" / (key + ".json");
  nlohmann::json record = nlohmann::json::parse(read_text_file(record_path.string()));
  record["metrics"].erase("xpsnr");
  write_file_atomic(record_path.string(), record.dump(2) + "\n");

  SweepStats stats;
  RateQualityCurve refreshed = sweep_image(backend, "img", pic, opts, &stats);
  REQUIRE(stats.encodes_executed == 0);  // decode-and-fill, not re-encode
  REQUIRE(refreshed.points.at(0).quality == expected_xpsnr);

  nlohmann::json rewritten = nlohmann::json::parse(read_text_file(record_path.string()));
  REQUIRE(rewritten.at("metrics").contains("xpsnr"));
}

TEST_CASE("a stale score-tool tag forces a rescore from the cached bitstream", "[sweep]") {
  TempDir dir;

  // Stand-in score tool: writes a fixed pooled score keyed by its version.
  const std::string tool = testutil::tmp_file(dir, "fakescore.sh");
  write_file_atomic(tool,
                    "#!/bin/sh\n"
                    "printf '{\"pooled_metrics\":{\"vmaf\":{\"mean\":%s}}}' \"$6\" > \"$5\"\n");
  fs::permissions(tool, fs::perms::owner_all | fs::perms::group_read | fs::perms::others_read);

  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, {30}, MetricKind::vmaf);
  opts.vmaf.executable = tool;
  opts.vmaf.args_template = "{ref} {deg} {width} {height} {out} 81.25";
  opts.vmaf.version_tag = "fake-1";

  Yuv420Picture pic = testutil::test_picture(32, 32, 0x5C04E);
  SweepStats stats;
  RateQualityCurve first = sweep_image(backend, "img", pic, opts, &stats);
  REQUIRE(stats.encodes_executed == 1);
  REQUIRE(first.points.at(0).quality == 81.25);

  // Same tag: the cached score is reused even though the tool would now
  // report a different value.
  opts.vmaf.args_template = "{ref} {deg} {width} {height} {out} 50";
  SweepStats cached;
  RateQualityCurve second = sweep_image(backend, "img", pic, opts, &cached);
  REQUIRE(cached.encodes_executed == 0);
  REQUIRE(second.points.at(0).quality == 81.25);

  // New tag: the stale score is discarded and the tool consulted again.
  opts.vmaf.version_tag = "fake-2";
  SweepStats rescored;
  RateQualityCurve third = sweep_image(backend, "img", pic, opts, &rescored);
  REQUIRE(rescored.encodes_executed == 0);
  REQUIRE(third.points.at(0).quality == 50.0);
}

TEST_CASE("metric unavailable for the picture is a configuration error", "[sweep]") {
  TempDir dir;
  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, {30}, MetricKind::msssim);
  Yuv420Picture pic = testutil::test_picture(48, 48, 0x22);  // too small for msssim
  try {
    sweep_image(backend, "img", pic, opts);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("image 'img' qp 30") != std::string::npos);
    REQUIRE(msg.find("msssim") != std::string::npos);
  }
}

TEST_CASE("backend failures carry the image and qp context", "[sweep]") {
  TempDir dir;
  EncoderAdapter broken("broken", "false {input} {bitstream} {qp}", "cp {bitstream} {recon}");
  ExternalCodecBackend backend(broken);
  SweepOptions opts = toy_options(dir, {30});
  Yuv420Picture pic = testutil::test_picture(16, 16, 0x33);
  try {
    sweep_image(backend, "beach", pic, opts);
    FAIL("expected ToolError");
  } catch (const ToolError& e) {
    REQUIRE(std::string(e.what()).find("image 'beach' qp 30: ") != std::string::npos);
  }
}

TEST_CASE("sweep input validation", "[sweep]") {
  TempDir dir;
  ToyCodecBackend backend;
  Yuv420Picture pic = testutil::test_picture(16, 16, 0x44);

  SweepOptions opts = toy_options(dir, {30});
  REQUIRE_THROWS_AS(run_sweep(backend, {}, opts), ConfigError);
  REQUIRE_THROWS_AS(run_sweep(backend, {{"a", pic}, {"a", pic}}, opts), ConfigError);

  SweepOptions noqp = toy_options(dir, {});
  REQUIRE_THROWS_AS(run_sweep(backend, {{"a", pic}}, noqp), ConfigError);

  SweepOptions nocache = toy_options(dir, {30});
  nocache.cache_dir.clear();
  REQUIRE_THROWS_AS(run_sweep(backend, {{"a", pic}}, nocache), ConfigError);
}

TEST_CASE("curves round trip through their JSON files", "[sweep]") {
  RateQualityCurve curve;
  curve.image_id = "forest";
  curve.pixels = 825;  // 33x25
  RateQualityPoint p1;
  p1.qp = 40;
  p1.bytes = 1024;
  p1.quality = 31.25;
  p1.aux = {{"psnr", 31.25}, {"xpsnr", std::numeric_limits<double>::infinity()}};
  RateQualityPoint p2;
  p2.qp = 30;
  p2.bytes = 4096;
  p2.quality = 38.0625;
  p2.aux = {{"psnr", 38.0625}};
  curve.points = {p1, p2};

  TempDir dir;
  const std::string path = testutil::tmp_file(dir, "curve.json");
  save_curve(curve, path);
  RateQualityCurve back = load_curve(path);
  REQUIRE(back.image_id == curve.image_id);
  REQUIRE(back.pixels == curve.pixels);
  REQUIRE(back.points == curve.points);

  write_file_atomic(path, "{]");
  REQUIRE_THROWS_AS(load_curve(path), FormatError);
  write_file_atomic(path, R"({"image_id": "x"})");
  REQUIRE_THROWS_AS(load_curve(path), FormatError);
  REQUIRE_THROWS_AS(load_curve(testutil::tmp_file(dir, "none.json")), IoError);
}

TEST_CASE("odd-size inputs record their true pixel count", "[sweep]") {
  TempDir dir;
  ToyCodecBackend backend;
  SweepOptions opts = toy_options(dir, {30, 40});
  Yuv420Picture pic = testutil::test_picture(33, 25, 0x0DD2);
  RateQualityCurve curve = sweep_image(backend, "odd", pic, opts);
  REQUIRE(curve.pixels == 33 * 25);
}
