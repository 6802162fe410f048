#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "ratekit/errors.hpp"
#include "ratekit/external_codec.hpp"
#include "ratekit/fileio.hpp"
#include "ratekit/metrics.hpp"
#include "ratekit/subprocess.hpp"

#include "json.hpp"

namespace ratekit {

/// External perceptual-score tool invocation. The argument template takes
/// {ref}, {deg}, {width}, {height}, {out}; the tool must write a JSON file at
/// {out} from which `score_pointer` extracts the pooled score.
struct VmafConfig {
  std::string executable = "vmaf";
  std::string args_template =
      "-r {ref} -d {deg} -w {width} -h {height} -p 420 -b 10 --json -o {out}";
  std::string score_pointer = "/pooled_metrics/vmaf/mean";
  std::string version_tag = "vmaf";
};

inline std::string render_vmaf_command(const VmafConfig& config, const std::string& ref_path,
                                       const std::string& deg_path, int width, int height,
                                       const std::string& out_path) {
  std::string args = config.args_template;
  detail::replace_all(args, "{ref}", ref_path);
  detail::replace_all(args, "{deg}", deg_path);
  detail::replace_all(args, "{width}", std::to_string(width));
  detail::replace_all(args, "{height}", std::to_string(height));
  detail::replace_all(args, "{out}", out_path);
  return config.executable + " " + args;
}

/// Scores a (reference, degraded) pair of raw files with the external tool.
/// Missing binary, nonzero exit, and unusable output are distinct errors.
inline MetricScore vmaf_external(const std::string& ref_path, const std::string& deg_path,
                                 const VmafConfig& config, int width, int height) {
  require_executable(config.executable);
  detail::TempDir dir;
  const std::string out_path = (dir.path() / "scores.json").string();
  const std::string cmd = render_vmaf_command(config, ref_path, deg_path, width, height, out_path);
  const CommandResult run = run_command(cmd);
  if (run.exit_code != 0)
    throw ToolError("score tool exited with code " + std::to_string(run.exit_code) +
                    "\ncommand: " + cmd + "\noutput:\n" + run.output);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(out_path));
  } catch (const Error&) {
    throw ToolOutputError("score tool wrote no output file at " + out_path);
  } catch (const nlohmann::json::exception& e) {
    throw ToolOutputError(std::string("score tool output is not valid JSON: ") + e.what());
  }

  double value = 0.0;
  try {
    value = j.at(nlohmann::json::json_pointer(config.score_pointer)).get<double>();
  } catch (const nlohmann::json::exception&) {
    throw ToolOutputError("score tool output has no numeric value at pointer '" +
                          config.score_pointer + "'");
  }
  if (!(value >= 0.0 && value <= 100.0))
    throw ToolOutputError("score " + std::to_string(value) + " is outside [0, 100]");
  return MetricScore::of(MetricKind::vmaf, value);
}

/// Persistent score cache: a JSON object file mapping composite keys to
/// scores. Writes are serialized and atomic; keys sort lexicographically so
/// identical contents produce identical files.
class ScoreCache {
 public:
  explicit ScoreCache(std::string path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(path_));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("score cache " + path_ + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError("score cache " + path_ + " is not a JSON object");
    for (const auto& [key, value] : j.items()) entries_[key] = value.get<double>();
  }

  static std::string make_key(const std::string& ref_digest, const std::string& deg_digest,
                              const std::string& metric, const std::string& tool_version) {
    return ref_digest + ":" + deg_digest + ":" + metric + ":" + tool_version;
  }

  std::optional<double> lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(const std::string& key, double value) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_[key] = value;
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : entries_) j[k] = v;
    write_file_atomic(path_, j.dump(2) + "\n");
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::map<std::string, double> entries_;
};

}  // namespace ratekit
