#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "ratekit/allocate.hpp"
#include "ratekit/bd.hpp"
#include "ratekit/curve.hpp"
#include "ratekit/errors.hpp"
#include "ratekit/fileio.hpp"
#include "ratekit/sweep.hpp"

#include "json.hpp"

namespace ratekit {

/// One image's line in an allocation manifest: the chosen operating point and
/// where its bitstream lives (relative to the cache dir).
struct ManifestEntry {
  std::string image_id;
  int qp = 0;
  std::uint64_t bytes = 0;
  double quality = 0.0;
  std::string bitstream;
  std::map<std::string, double> aux;
};

/// Full record of one allocation run; self-describing and reproducible.
struct Manifest {
  std::string metric;
  std::string backend;
  std::string bpp_text;
  std::uint64_t total_pixels = 0;
  std::uint64_t budget_bytes = 0;
  std::uint64_t total_bytes = 0;
  double min_quality = 0.0;
  double mean_quality = 0.0;
  std::vector<ManifestEntry> entries;  // sorted by image_id
  nlohmann::json config = nlohmann::json::object();
};

inline Manifest make_manifest(const std::string& metric, const std::string& backend_id,
                              const std::string& bpp_text, const BudgetSpec& budget,
                              const AllocationResult& alloc,
                              const std::vector<RateQualityCurve>& curves,
                              const std::map<std::string, std::string>& bitstream_paths) {
  std::map<std::string, const RateQualityCurve*> by_id;
  for (const RateQualityCurve& c : curves) by_id[c.image_id] = &c;

  Manifest m;
  m.metric = metric;
  m.backend = backend_id;
  m.bpp_text = bpp_text;
  m.total_pixels = budget.total_pixels;
  m.budget_bytes = budget.budget_bytes;
  m.total_bytes = alloc.total_bytes;
  m.min_quality = alloc.min_quality;
  m.mean_quality = alloc.mean_quality;

  for (const auto& [image_id, sel] : alloc.selection) {
    const auto cit = by_id.find(image_id);
    if (cit == by_id.end())
      throw ConfigError("allocation selects image '" + image_id + "' with no curve");
    const RateQualityCurve& curve = *cit->second;
    if (sel.point_index >= curve.points.size())
      throw ConfigError("allocation for '" + image_id + "' points outside its curve");

    ManifestEntry e;
    e.image_id = image_id;
    e.qp = sel.qp;
    e.bytes = sel.bytes;
    e.quality = sel.quality;
    e.aux = curve.points[sel.point_index].aux;
    const auto bit = bitstream_paths.find(image_id);
    if (bit != bitstream_paths.end()) e.bitstream = bit->second;
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline void save_manifest(const Manifest& m, const std::string& path) {
  nlohmann::json entries = nlohmann::json::array();
  for (const ManifestEntry& e : m.entries) {
    nlohmann::json je;
    je["image_id"] = e.image_id;
    je["qp"] = e.qp;
    je["bytes"] = e.bytes;
    je["quality"] = detail::metric_to_json(e.quality);
    je["bitstream"] = e.bitstream;
    nlohmann::json aux = nlohmann::json::object();
    for (const auto& [name, value] : e.aux) aux[name] = detail::metric_to_json(value);
    je["aux"] = aux;
    entries.push_back(je);
  }
  nlohmann::json j;
  j["metric"] = m.metric;
  j["backend"] = m.backend;
  j["budget"] = {{"bpp", m.bpp_text},
                 {"total_pixels", m.total_pixels},
                 {"budget_bytes", m.budget_bytes}};
  j["total_bytes"] = m.total_bytes;
  j["min_quality"] = detail::metric_to_json(m.min_quality);
  j["mean_quality"] = detail::metric_to_json(m.mean_quality);
  j["entries"] = entries;
  j["config"] = m.config;
  write_file_atomic(path, j.dump(2) + "\n");
}

inline Manifest load_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path + " is not valid JSON: " + e.what());
  }
  try {
    Manifest m;
    m.metric = j.at("metric").get<std::string>();
    m.backend = j.at("backend").get<std::string>();
    m.bpp_text = j.at("budget").at("bpp").get<std::string>();
    m.total_pixels = j.at("budget").at("total_pixels").get<std::uint64_t>();
    m.budget_bytes = j.at("budget").at("budget_bytes").get<std::uint64_t>();
    m.total_bytes = j.at("total_bytes").get<std::uint64_t>();
    m.min_quality = detail::metric_from_json(j.at("min_quality"));
    m.mean_quality = detail::metric_from_json(j.at("mean_quality"));
    for (const nlohmann::json& je : j.at("entries")) {
      ManifestEntry e;
      e.image_id = je.at("image_id").get<std::string>();
      e.qp = je.at("qp").get<int>();
      e.bytes = je.at("bytes").get<std::uint64_t>();
      e.quality = detail::metric_from_json(je.at("quality"));
      e.bitstream = je.at("bitstream").get<std::string>();
      if (je.contains("aux"))
        for (const auto& [name, value] : je.at("aux").items())
          e.aux[name] = detail::metric_from_json(value);
      m.entries.push_back(std::move(e));
    }
    if (j.contains("config")) m.config = j.at("config");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path + " is missing required fields: " + e.what());
  }
}

/// One report line per byte-budget target.
struct ReportRow {
  std::string bpp_text;
  std::uint64_t budget_bytes = 0;
  std::uint64_t total_bytes = 0;
  double mean_quality = 0.0;
  double min_quality = 0.0;
  double mean_psnr = 0.0;
  double mean_msssim = 0.0;
};

struct Report {
  std::string metric;
  std::vector<ReportRow> rows;
};

namespace detail {

inline double mean_aux(const Manifest& m, const std::string& name) {
  double sum = 0.0;
  for (const ManifestEntry& e : m.entries) {
    const auto it = e.aux.find(name);
    if (it == e.aux.end())
      throw FormatError("manifest entry '" + e.image_id + "' lacks metric '" + name + "'");
    sum += it->second;
  }
  return sum / double(m.entries.size());
}

inline std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

inline ReportRow make_report_row(const Manifest& m) {
  if (m.entries.empty()) throw ConfigError("manifest has no entries");
  ReportRow row;
  row.bpp_text = m.bpp_text;
  row.budget_bytes = m.budget_bytes;
  row.total_bytes = m.total_bytes;
  row.mean_quality = m.mean_quality;
  row.min_quality = m.min_quality;
  row.mean_psnr = detail::mean_aux(m, "psnr");
  row.mean_msssim = detail::mean_aux(m, "msssim");
  return row;
}

/// One row per manifest, all sharing the allocation metric.
inline Report make_report(const std::vector<Manifest>& manifests) {
  if (manifests.empty()) throw ConfigError("report needs at least one manifest");
  Report report;
  report.metric = manifests.front().metric;
  for (const Manifest& m : manifests) {
    if (m.metric != report.metric)
      throw ConfigError("manifests mix allocation metrics ('" + report.metric + "' vs '" +
                        m.metric + "')");
    report.rows.push_back(make_report_row(m));
  }
  return report;
}

inline std::string render_report_text(const Report& report) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"bpp", "budget_bytes", "data_size", "avg_" + report.metric,
                   "worst_" + report.metric, "mean_psnr", "mean_msssim"});
  for (const ReportRow& r : report.rows)
    cells.push_back({r.bpp_text, std::to_string(r.budget_bytes), std::to_string(r.total_bytes),
                     detail::fmt_fixed(r.mean_quality, 3), detail::fmt_fixed(r.min_quality, 3),
                     detail::fmt_fixed(r.mean_psnr, 3), detail::fmt_fixed(r.mean_msssim, 3)});

  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += row[c];
      out.append(widths[c] - row[c].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

inline void save_report(const Report& report, const std::string& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ReportRow& r : report.rows)
    rows.push_back({{"bpp", r.bpp_text},
                    {"budget_bytes", r.budget_bytes},
                    {"total_bytes", r.total_bytes},
                    {"mean_quality", detail::metric_to_json(r.mean_quality)},
                    {"min_quality", detail::metric_to_json(r.min_quality)},
                    {"mean_psnr", detail::metric_to_json(r.mean_psnr)},
                    {"mean_msssim", detail::metric_to_json(r.mean_msssim)}});
  nlohmann::json j;
  j["metric"] = report.metric;
  j["rows"] = rows;
  write_file_atomic(path, j.dump(2) + "\n");
}

/// Per-point plot data for external tooling: one CSV row per curve point.
inline void write_plot_csv(const std::vector<RateQualityCurve>& curves, const std::string& path) {
  std::string out = "image_id,qp,bytes,bpp,quality,psnr,xpsnr,msssim,vmaf\n";
  const auto aux_cell = [](const RateQualityPoint& p, const char* name) {
    const auto it = p.aux.find(name);
    return it == p.aux.end() ? std::string() : detail::fmt_fixed(it->second, 6);
  };
  for (const RateQualityCurve& c : curves) {
    for (const RateQualityPoint& p : c.points) {
      const double bpp = double(p.bytes) * 8.0 / double(c.pixels);
      out += c.image_id + "," + std::to_string(p.qp) + "," + std::to_string(p.bytes) + "," +
             detail::fmt_fixed(bpp, 6) + "," + detail::fmt_fixed(p.quality, 6) + "," +
             aux_cell(p, "psnr") + "," + aux_cell(p, "xpsnr") + "," + aux_cell(p, "msssim") +
             "," + aux_cell(p, "vmaf") + "\n";
    }
  }
  write_file_atomic(path, out);
}

/// An image's sweep curve as an RD curve (bits per pixel against quality),
/// ready for delta analysis.
inline RdCurve rd_curve_from_sweep(const RateQualityCurve& curve) {
  RdCurve rd;
  rd.label = curve.image_id;
  for (const RateQualityPoint& p : curve.points)
    rd.points.push_back({double(p.bytes) * 8.0 / double(curve.pixels), p.quality});
  return rd;
}

}  // namespace ratekit
