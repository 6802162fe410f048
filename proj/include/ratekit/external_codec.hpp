#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "ratekit/digest.hpp"
#include "ratekit/errors.hpp"
#include "ratekit/image.hpp"
#include "ratekit/subprocess.hpp"

#include "json.hpp"

namespace ratekit {

/// Shell command templates for an out-of-process encoder/decoder pair.
/// Placeholders are substituted verbatim: {input}, {bitstream}, {width},
/// {height}, {qp} for encoding and {bitstream}, {recon} for decoding.
/// `fixed_args` are appended to the rendered encode command.
struct EncoderAdapter {
  std::string name;
  std::string encode_template;
  std::string decode_template;
  std::vector<std::string> fixed_args;

  EncoderAdapter(std::string name_, std::string encode_template_, std::string decode_template_,
                 std::vector<std::string> fixed_args_ = {})
      : name(std::move(name_)),
        encode_template(std::move(encode_template_)),
        decode_template(std::move(decode_template_)),
        fixed_args(std::move(fixed_args_)) {
    for (const char* ph : {"{input}", "{bitstream}", "{qp}"})
      if (encode_template.find(ph) == std::string::npos)
        throw ConfigError("encode template for '" + name + "' is missing " + ph);
    for (const char* ph : {"{bitstream}", "{recon}"})
      if (decode_template.find(ph) == std::string::npos)
        throw ConfigError("decode template for '" + name + "' is missing " + ph);
  }
};

struct EncodeResult {
  std::uint64_t bitstream_bytes = 0;
  std::string bitstream_path;
  int qp = 0;
  double wall_time = 0.0;
};

namespace detail {

inline void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "ratekit-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr)
      throw IoError("failed to create temporary directory under " +
                    std::filesystem::temp_directory_path().string());
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace detail

inline std::string render_encode_command(const EncoderAdapter& adapter, const std::string& input,
                                         const std::string& bitstream, int width, int height,
                                         int qp) {
  std::string cmd = adapter.encode_template;
  detail::replace_all(cmd, "{input}", input);
  detail::replace_all(cmd, "{bitstream}", bitstream);
  detail::replace_all(cmd, "{width}", std::to_string(width));
  detail::replace_all(cmd, "{height}", std::to_string(height));
  detail::replace_all(cmd, "{qp}", std::to_string(qp));
  for (const std::string& arg : adapter.fixed_args) {
    cmd += ' ';
    cmd += arg;
  }
  return cmd;
}

inline std::string render_decode_command(const EncoderAdapter& adapter,
                                         const std::string& bitstream, const std::string& recon) {
  std::string cmd = adapter.decode_template;
  detail::replace_all(cmd, "{bitstream}", bitstream);
  detail::replace_all(cmd, "{recon}", recon);
  return cmd;
}

/// Stable identity of an adapter configuration, used as a cache key component.
inline std::string adapter_id(const EncoderAdapter& adapter) {
  Digest d;
  d.update(adapter.name);
  d.update("\n");
  d.update(adapter.encode_template);
  d.update("\n");
  d.update(adapter.decode_template);
  for (const std::string& arg : adapter.fixed_args) {
    d.update("\n");
    d.update(arg);
  }
  return d.hex();
}

/// Runs the adapter's encoder on `pic` at the given qp, leaving the bitstream
/// at `bitstream_path`. The raw input lives in a fresh private temp dir for
/// the duration of the call.
inline EncodeResult encode_external(const EncoderAdapter& adapter, const Yuv420Picture& pic,
                                    int qp, const std::string& bitstream_path) {
  validate_picture(pic);
  require_executable(command_executable(adapter.encode_template));

  detail::TempDir dir;
  const std::string input = (dir.path() / "input.yuv").string();
  write_yuv_raw(pic, input);

  const std::string cmd =
      render_encode_command(adapter, input, bitstream_path, pic.y.width, pic.y.height, qp);
  const auto start = std::chrono::steady_clock::now();
  const CommandResult run = run_command(cmd);
  const auto stop = std::chrono::steady_clock::now();
  if (run.exit_code != 0)
    throw ToolError("encoder '" + adapter.name + "' exited with code " +
                    std::to_string(run.exit_code) + "\ncommand: " + cmd + "\noutput:\n" +
                    run.output);

  std::error_code ec;
  const auto size = std::filesystem::file_size(bitstream_path, ec);
  if (ec) throw ToolOutputError("encoder '" + adapter.name + "' produced no bitstream at " +
                                bitstream_path);
  if (size == 0)
    throw ToolOutputError("encoder '" + adapter.name + "' produced an empty bitstream");

  EncodeResult result;
  result.bitstream_bytes = size;
  result.bitstream_path = bitstream_path;
  result.qp = qp;
  result.wall_time = std::chrono::duration<double>(stop - start).count();
  return result;
}

/// Runs the adapter's decoder and reads back the raw reconstruction with the
/// given padded dimensions.
inline Yuv420Picture decode_external(const EncoderAdapter& adapter,
                                     const std::string& bitstream_path, int width, int height,
                                     int orig_width = -1, int orig_height = -1) {
  if (!std::filesystem::exists(bitstream_path))
    throw IoError("bitstream not found: " + bitstream_path);
  require_executable(command_executable(adapter.decode_template));

  detail::TempDir dir;
  const std::string recon = (dir.path() / "recon.yuv").string();
  const std::string cmd = render_decode_command(adapter, bitstream_path, recon);
  const CommandResult run = run_command(cmd);
  if (run.exit_code != 0)
    throw ToolError("decoder '" + adapter.name + "' exited with code " +
                    std::to_string(run.exit_code) + "\ncommand: " + cmd + "\noutput:\n" +
                    run.output);
  return read_yuv_raw(recon, width, height, orig_width, orig_height);
}

/// Adapter description file: JSON object with name, encode_template,
/// decode_template, and optional fixed_args array.
inline EncoderAdapter load_adapter_preset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open adapter preset: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("adapter preset " + path + " is not valid JSON: " + e.what());
  }
  try {
    std::vector<std::string> fixed;
    if (j.contains("fixed_args"))
      fixed = j.at("fixed_args").get<std::vector<std::string>>();
    return EncoderAdapter(j.at("name").get<std::string>(),
                          j.at("encode_template").get<std::string>(),
                          j.at("decode_template").get<std::string>(), std::move(fixed));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("adapter preset " + path + " is missing required fields: " + e.what());
  }
}

}  // namespace ratekit
