#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "component_tree.hpp"

namespace mshr {

struct Moments {
  std::int64_t m00 = 0;
  std::int64_t m10 = 0;  // sum r
  std::int64_t m01 = 0;  // sum c
  std::int64_t m20 = 0;  // sum r^2
  std::int64_t m02 = 0;  // sum c^2
  std::int64_t m11 = 0;  // sum r*c
  bool operator==(const Moments&) const = default;
};

struct EllipseParams {
  double r1 = 0.0;     // major semi-axis
  double r2 = 0.0;     // minor semi-axis
  double theta = 0.0;  // major-axis angle from the column axis, (-pi/2, pi/2]
};

struct FeatureVector {
  double area = 0.0;
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double theta = 0.0;
  std::vector<double> channel_mean;
  std::vector<double> channel_dev;
  bool operator==(const FeatureVector&) const = default;
};

struct FeatureWeights {
  double w_area = 1.0;
  double w_axes = 1.0;
  double w_channel_mean = 1.0;
  double w_channel_dev = 1.0;
  double centroid_gate_radius = 0.0;  // <= 0 disables the gate
};

Moments region_moments(std::span<const std::int64_t> pixels,
                       std::int32_t width);

/// Ellipse with the region's second moments: r = 2*sqrt(eigenvalue) of the
/// centered covariance, computed from exact integer central moments so that
/// 90-degree grid rotations reproduce the axes bit for bit.
EllipseParams ellipse_params(const Moments& m);

void channel_stats(std::int64_t sum, std::int64_t sumsq, std::int64_t area,
                   double* mean, double* deviation);

/// Feature vector of a tree node from its accumulators; the centroid is
/// shifted by the crop origin into full-frame coordinates.
FeatureVector node_features(const ComponentTree& tree, std::int32_t node,
                            std::int32_t origin_row = 0,
                            std::int32_t origin_col = 0);

/// Weighted sum of relative differences over the rotation-invariant subset
/// {area, r1, r2, channel mean/deviation}; centroid only gates (returns
/// +infinity beyond the gate radius), theta is reporting-only.
double feature_distance(const FeatureVector& a, const FeatureVector& b,
                        const FeatureWeights& w);

/// Convex blend prev*(1-lambda) + next*lambda componentwise; theta is blended
/// on the doubled-angle circle.
FeatureVector update_features(const FeatureVector& prev,
                              const FeatureVector& next, double lambda);

}  // namespace mshr
