// Brute-force reference computations for cross-checking the hierarchy,
// stability scores, and accumulators. Everything here works directly on
// pixel sets and recomputes magnitudes from first principles; none of it
// shares code with the library internals under test.
#pragma once

#include <cstdint>
#include <vector>

#include "component_tree.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace oracle {

// Quantized level of the 4-neighbor edge between pixels pa and pb.
int edge_level(const mshr::MultichannelImage& img, std::int64_t pa,
               std::int64_t pb, mshr::EdgeNorm norm, int bins);

// Component labels at threshold t: flood fill over edges with level <= t.
// labels[p] is the smallest pixel id in p's component.
std::vector<std::int64_t> qfz_labels(const mshr::MultichannelImage& img,
                                     mshr::EdgeNorm norm, int bins, int t);

// Pixels of the component containing seed at threshold t, ascending.
std::vector<std::int64_t> qfz_component(const mshr::MultichannelImage& img,
                                        mshr::EdgeNorm norm, int bins,
                                        std::int64_t seed, int t);

// Stability of the region that is a component at `level` and contains
// `seed`, evaluated per the definition on raw pixel sets: grow to the
// component at level+delta, shrink along largest sub-components while
// their level exceeds max(level-delta, 0).
double stability(const mshr::MultichannelImage& img, mshr::EdgeNorm norm,
                 int bins, std::int64_t seed, int level, int delta,
                 bool normalized);

struct MomentSums {
  std::int64_t m00 = 0, m10 = 0, m01 = 0, m20 = 0, m02 = 0, m11 = 0;
};

// Raw moment sums over a pixel set (row = p / width, col = p % width).
MomentSums moments(const std::vector<std::int64_t>& pixels, std::int32_t width);

// Per-channel sum and sum of squares over a pixel set.
void channel_sums(const mshr::MultichannelImage& img,
                  const std::vector<std::int64_t>& pixels, std::int32_t channel,
                  std::int64_t* sum, std::int64_t* sumsq);

// Uniform random test image with values in [0, maxval].
mshr::MultichannelImage random_image(mshr::Rng& rng, std::int32_t width,
                                     std::int32_t height, std::int32_t channels,
                                     std::int32_t maxval);

}  // namespace oracle
