#include <cmath>

#include "speedhist/errors.hpp"
#include "speedhist/graph.hpp"

namespace speedhist::graph {

SpeedHistogram bucketize(std::span<const double> speeds_mps, int k, double width) {
  if (k < 1) throw ArgumentError("bucket count must be positive");
  if (!(width > 0.0)) throw ArgumentError("bucket width must be positive");
  SpeedHistogram h;
  h.bucket_width = width;
  h.buckets.assign(static_cast<std::size_t>(k), 0.0);
  const double top = k * width;
  for (double s : speeds_mps) {
    if (!std::isfinite(s) || s < 0.0 || s >= top) continue;
    auto b = static_cast<std::size_t>(std::floor(s / width));
    if (b >= h.buckets.size()) b = h.buckets.size() - 1;  // rounding at the upper edge
    h.buckets[b] += 1.0;
    ++h.retained;
  }
  if (h.retained == 0) throw InsufficientDataError("no observations inside the histogram support");
  for (auto& b : h.buckets) b /= static_cast<double>(h.retained);
  return h;
}

}  // namespace speedhist::graph
