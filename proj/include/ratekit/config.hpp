#pragma once

#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ratekit/curve.hpp"
#include "ratekit/errors.hpp"
#include "ratekit/fileio.hpp"
#include "ratekit/metrics.hpp"
#include "ratekit/vmaf.hpp"

#include "json.hpp"

namespace ratekit {

/// Everything a pipeline run needs. A config file provides any subset of the
/// fields; command-line flags override file values.
struct PipelineConfig {
  std::string corpus_dir;
  std::string adapter_preset;  // empty or "toy": built-in toy codec
  int qp_lo = 27;
  int qp_hi = 47;
  std::vector<std::string> bpp_targets = {"0.075", "0.150", "0.300"};
  std::string metric = "vmaf";
  std::string cache_dir = "ratekit-cache";
  int workers = 0;  // 0: one per hardware thread
  VmafConfig vmaf;
};

inline void validate_config(const PipelineConfig& config) {
  if (config.qp_lo > config.qp_hi)
    throw ConfigError("qp range is empty (" + std::to_string(config.qp_lo) + ".." +
                      std::to_string(config.qp_hi) + ")");
  if (config.bpp_targets.empty()) throw ConfigError("no bits-per-pixel targets configured");
  for (const std::string& bpp : config.bpp_targets)
    if (parse_decimal(bpp).num == 0)
      throw ConfigError("bits-per-pixel target '" + bpp + "' must be positive");
  parse_metric_kind(config.metric);
  if (config.workers < 0) throw ConfigError("worker count must be non-negative");
  if (config.cache_dir.empty()) throw ConfigError("cache directory must be set");
}

inline std::vector<int> config_qps(const PipelineConfig& config) {
  std::vector<int> qps;
  for (int qp = config.qp_lo; qp <= config.qp_hi; ++qp) qps.push_back(qp);
  return qps;
}

inline int effective_workers(const PipelineConfig& config) {
  if (config.workers > 0) return config.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

inline nlohmann::json config_to_json(const PipelineConfig& config) {
  nlohmann::json j;
  j["corpus_dir"] = config.corpus_dir;
  j["adapter_preset"] = config.adapter_preset;
  j["qp_lo"] = config.qp_lo;
  j["qp_hi"] = config.qp_hi;
  j["bpp_targets"] = config.bpp_targets;
  j["metric"] = config.metric;
  j["cache_dir"] = config.cache_dir;
  j["workers"] = config.workers;
  j["vmaf"] = {{"executable", config.vmaf.executable},
               {"args_template", config.vmaf.args_template},
               {"score_pointer", config.vmaf.score_pointer},
               {"version_tag", config.vmaf.version_tag}};
  return j;
}

/// Reads a config file; every field is optional, unknown keys are rejected.
inline PipelineConfig load_pipeline_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file " + path + " is not a JSON object");

  static const std::set<std::string> known = {"corpus_dir", "adapter_preset", "qp_lo",
                                              "qp_hi",      "bpp_targets",    "metric",
                                              "cache_dir",  "workers",        "vmaf"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw ConfigError("config file " + path + " has unknown key '" + key + "'");

  PipelineConfig config;
  try {
    if (j.contains("corpus_dir")) config.corpus_dir = j["corpus_dir"].get<std::string>();
    if (j.contains("adapter_preset"))
      config.adapter_preset = j["adapter_preset"].get<std::string>();
    if (j.contains("qp_lo")) config.qp_lo = j["qp_lo"].get<int>();
    if (j.contains("qp_hi")) config.qp_hi = j["qp_hi"].get<int>();
    if (j.contains("bpp_targets")) {
      config.bpp_targets.clear();
      for (const nlohmann::json& t : j["bpp_targets"]) {
        if (!t.is_string())
          throw ConfigError("config file " + path +
                            ": bpp_targets must be decimal strings (e.g. \"0.075\") so the "
                            "budget stays exact");
        config.bpp_targets.push_back(t.get<std::string>());
      }
    }
    if (j.contains("metric")) config.metric = j["metric"].get<std::string>();
    if (j.contains("cache_dir")) config.cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("workers")) config.workers = j["workers"].get<int>();
    if (j.contains("vmaf")) {
      const nlohmann::json& v = j["vmaf"];
      if (v.contains("executable")) config.vmaf.executable = v["executable"].get<std::string>();
      if (v.contains("args_template"))
        config.vmaf.args_template = v["args_template"].get<std::string>();
      if (v.contains("score_pointer"))
        config.vmaf.score_pointer = v["score_pointer"].get<std::string>();
      if (v.contains("version_tag"))
        config.vmaf.version_tag = v["version_tag"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " has a wrongly typed field: " + e.what());
  }
  validate_config(config);
  return config;
}

}  // namespace ratekit
