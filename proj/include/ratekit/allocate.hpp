#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ratekit/curve.hpp"
#include "ratekit/errors.hpp"

namespace ratekit {

/// When the lowest-quality image cannot afford its next curve point, the
/// default policy tries progressively better-off images so leftover budget is
/// still spent; disabling the skip stops the allocation at that moment.
struct AllocatorPolicy {
  bool skip_unaffordable = true;
};

struct SelectedPoint {
  std::size_t point_index = 0;
  int qp = 0;
  std::uint64_t bytes = 0;
  double quality = 0.0;

  friend bool operator==(const SelectedPoint&, const SelectedPoint&) = default;
};

struct AllocationResult {
  std::map<std::string, SelectedPoint> selection;
  std::uint64_t total_bytes = 0;
  double min_quality = 0.0;
  double mean_quality = 0.0;

  friend bool operator==(const AllocationResult&, const AllocationResult&) = default;
};

/// Max-min budget allocation. Every image starts at its cheapest point; each
/// iteration walks images from worst current quality upward (ties broken by
/// image id) and applies the first single-point upgrade that fits the
/// remaining budget. Stops when nothing fits. Deterministic.
inline AllocationResult allocate_greedy(const std::vector<RateQualityCurve>& curves,
                                        std::uint64_t budget_bytes,
                                        const AllocatorPolicy& policy = {}) {
  if (curves.empty()) throw ConfigError("allocation needs at least one curve");
  std::set<std::string> seen;
  std::uint64_t cheapest_total = 0;
  for (const RateQualityCurve& c : curves) {
    validate_curve(c);
    if (!seen.insert(c.image_id).second)
      throw ConfigError("duplicate curve for image '" + c.image_id + "'");
    cheapest_total += c.points.front().bytes;
  }
  if (cheapest_total > budget_bytes) throw InfeasibleBudgetError(budget_bytes, cheapest_total);

  const std::size_t n = curves.size();
  std::vector<std::size_t> chosen(n, 0);
  std::uint64_t remaining = budget_bytes - cheapest_total;

  std::vector<std::size_t> order(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double qa = curves[a].points[chosen[a]].quality;
      const double qb = curves[b].points[chosen[b]].quality;
      if (qa != qb) return qa < qb;
      return curves[a].image_id < curves[b].image_id;
    });

    bool upgraded = false;
    for (std::size_t i : order) {
      if (chosen[i] + 1 >= curves[i].points.size()) continue;
      const std::uint64_t step =
          curves[i].points[chosen[i] + 1].bytes - curves[i].points[chosen[i]].bytes;
      if (step <= remaining) {
        remaining -= step;
        ++chosen[i];
        upgraded = true;
        break;
      }
      if (!policy.skip_unaffordable) break;
    }
    if (!upgraded) break;
  }

  AllocationResult result;
  result.total_bytes = 0;
  double quality_sum = 0.0;
  double min_q = curves[0].points[chosen[0]].quality;
  for (std::size_t i = 0; i < n; ++i) {
    const RateQualityPoint& p = curves[i].points[chosen[i]];
    result.selection[curves[i].image_id] =
        SelectedPoint{chosen[i], p.qp, p.bytes, p.quality};
    result.total_bytes += p.bytes;
    quality_sum += p.quality;
    min_q = std::min(min_q, p.quality);
  }
  result.min_quality = min_q;
  result.mean_quality = quality_sum / double(n);
  return result;
}

}  // namespace ratekit
