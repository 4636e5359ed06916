#include "features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace mshr {

Moments region_moments(std::span<const std::int64_t> pixels,
                       std::int32_t width) {
  if (pixels.empty()) fail(ErrorCode::EmptyRegion, "region_moments: empty region");
  Moments m;
  for (const std::int64_t p : pixels) {
    const std::int64_t r = p / width, c = p % width;
    m.m00 += 1;
    m.m10 += r;
    m.m01 += c;
    m.m20 += r * r;
    m.m02 += c * c;
    m.m11 += r * c;
  }
  return m;
}

EllipseParams ellipse_params(const Moments& m) {
  if (m.m00 < 1) fail(ErrorCode::EmptyRegion, "ellipse_params: empty region");
  using i128 = __int128;
  const i128 M20 = static_cast<i128>(m.m00) * m.m20 - static_cast<i128>(m.m10) * m.m10;
  const i128 M02 = static_cast<i128>(m.m00) * m.m02 - static_cast<i128>(m.m01) * m.m01;
  const i128 M11 = static_cast<i128>(m.m00) * m.m11 - static_cast<i128>(m.m10) * m.m01;

  const i128 trace = M20 + M02;
  const i128 diff = M20 - M02;
  const i128 disc = diff * diff + 4 * M11 * M11;

  const double n2 = static_cast<double>(m.m00) * static_cast<double>(m.m00);
  const double root = std::sqrt(static_cast<double>(disc));
  const double lam1 = (static_cast<double>(trace) + root) / (2.0 * n2);
  const double lam2 = (static_cast<double>(trace) - root) / (2.0 * n2);

  EllipseParams e;
  e.r1 = 2.0 * std::sqrt(std::max(lam1, 0.0));
  e.r2 = 2.0 * std::sqrt(std::max(lam2, 0.0));
  e.theta = 0.5 * std::atan2(2.0 * static_cast<double>(M11),
                             static_cast<double>(M02 - M20));
  return e;
}

void channel_stats(std::int64_t sum, std::int64_t sumsq, std::int64_t area,
                   double* mean, double* deviation) {
  if (area < 1) fail(ErrorCode::EmptyRegion, "channel_stats: empty region");
  const double mu = static_cast<double>(sum) / static_cast<double>(area);
  const double var = static_cast<double>(sumsq) / static_cast<double>(area) - mu * mu;
  *mean = mu;
  *deviation = std::sqrt(std::max(var, 0.0));
}

FeatureVector node_features(const ComponentTree& tree, std::int32_t node,
                            std::int32_t origin_row, std::int32_t origin_col) {
  tree.check_node(node);
  const Moments m{tree.area[node], tree.m10[node], tree.m01[node],
                  tree.m20[node], tree.m02[node], tree.m11[node]};
  const EllipseParams e = ellipse_params(m);

  FeatureVector f;
  f.area = static_cast<double>(m.m00);
  f.centroid_row = static_cast<double>(m.m10) / static_cast<double>(m.m00) + origin_row;
  f.centroid_col = static_cast<double>(m.m01) / static_cast<double>(m.m00) + origin_col;
  f.r1 = e.r1;
  f.r2 = e.r2;
  f.theta = e.theta;
  f.channel_mean.resize(tree.channels);
  f.channel_dev.resize(tree.channels);
  for (std::int32_t ch = 0; ch < tree.channels; ++ch) {
    channel_stats(tree.channel_sum[static_cast<std::size_t>(node) * tree.channels + ch],
                  tree.channel_sumsq[static_cast<std::size_t>(node) * tree.channels + ch],
                  m.m00, &f.channel_mean[ch], &f.channel_dev[ch]);
  }
  return f;
}

namespace {

inline double rel_diff(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / denom;
}

}  // namespace

double feature_distance(const FeatureVector& a, const FeatureVector& b,
                        const FeatureWeights& w) {
  if (a.channel_mean.size() != b.channel_mean.size())
    fail(ErrorCode::DimensionMismatch, "feature_distance: channel count mismatch");

  if (w.centroid_gate_radius > 0.0) {
    const double dr = a.centroid_row - b.centroid_row;
    const double dc = a.centroid_col - b.centroid_col;
    if (dr * dr + dc * dc > w.centroid_gate_radius * w.centroid_gate_radius)
      return std::numeric_limits<double>::infinity();
  }

  double d = w.w_area * rel_diff(a.area, b.area);
  d += w.w_axes * (rel_diff(a.r1, b.r1) + rel_diff(a.r2, b.r2));
  for (std::size_t ch = 0; ch < a.channel_mean.size(); ++ch) {
    d += w.w_channel_mean * rel_diff(a.channel_mean[ch], b.channel_mean[ch]);
    d += w.w_channel_dev * rel_diff(a.channel_dev[ch], b.channel_dev[ch]);
  }
  return d;
}

FeatureVector update_features(const FeatureVector& prev,
                              const FeatureVector& next, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    fail(ErrorCode::InvalidArgument, "update_features: lambda must be in [0, 1]");
  if (prev.channel_mean.size() != next.channel_mean.size())
    fail(ErrorCode::DimensionMismatch, "update_features: channel count mismatch");

  const double keep = 1.0 - lambda;
  auto blend = [&](double p, double n) { return keep * p + lambda * n; };

  FeatureVector f;
  f.area = blend(prev.area, next.area);
  f.centroid_row = blend(prev.centroid_row, next.centroid_row);
  f.centroid_col = blend(prev.centroid_col, next.centroid_col);
  f.r1 = blend(prev.r1, next.r1);
  f.r2 = blend(prev.r2, next.r2);

  const double x = keep * std::cos(2.0 * prev.theta) + lambda * std::cos(2.0 * next.theta);
  const double y = keep * std::sin(2.0 * prev.theta) + lambda * std::sin(2.0 * next.theta);
  f.theta = (x == 0.0 && y == 0.0) ? prev.theta : 0.5 * std::atan2(y, x);

  f.channel_mean.resize(prev.channel_mean.size());
  f.channel_dev.resize(prev.channel_dev.size());
  for (std::size_t ch = 0; ch < prev.channel_mean.size(); ++ch) {
    f.channel_mean[ch] = blend(prev.channel_mean[ch], next.channel_mean[ch]);
    f.channel_dev[ch] = blend(prev.channel_dev[ch], next.channel_dev[ch]);
  }
  return f;
}

}  // namespace mshr
