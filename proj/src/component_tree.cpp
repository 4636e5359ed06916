#include "component_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "error.hpp"
#include "json.hpp"

namespace mshr {

double edge_magnitude(const std::int32_t* a, const std::int32_t* b,
                      std::int32_t channels, EdgeNorm norm) {
  switch (norm) {
    case EdgeNorm::L1: {
      std::int64_t sum = 0;
      for (std::int32_t ch = 0; ch < channels; ++ch)
        sum += std::abs(static_cast<std::int64_t>(a[ch]) - b[ch]);
      return static_cast<double>(sum);
    }
    case EdgeNorm::L2: {
      std::int64_t sq = 0;
      for (std::int32_t ch = 0; ch < channels; ++ch) {
        const std::int64_t d = static_cast<std::int64_t>(a[ch]) - b[ch];
        sq += d * d;
      }
      return std::sqrt(static_cast<double>(sq));
    }
    case EdgeNorm::Linf: {
      std::int64_t m = 0;
      for (std::int32_t ch = 0; ch < channels; ++ch)
        m = std::max(m, std::abs(static_cast<std::int64_t>(a[ch]) - b[ch]));
      return static_cast<double>(m);
    }
  }
  fail(ErrorCode::Internal, "unreachable norm");
}

double edge_magnitude(std::span<const std::int32_t> a,
                      std::span<const std::int32_t> b, EdgeNorm norm) {
  if (a.size() != b.size())
    fail(ErrorCode::DimensionMismatch, "edge_magnitude: channel count mismatch");
  if (a.empty())
    fail(ErrorCode::InvalidArgument, "edge_magnitude: empty channel vectors");
  return edge_magnitude(a.data(), b.data(), static_cast<std::int32_t>(a.size()),
                        norm);
}

double max_edge_magnitude(std::int32_t channels, std::int32_t max_value,
                          EdgeNorm norm) {
  switch (norm) {
    case EdgeNorm::L1:
      return static_cast<double>(channels) * max_value;
    case EdgeNorm::L2:
      return std::sqrt(static_cast<double>(channels)) * max_value;
    case EdgeNorm::Linf:
      return static_cast<double>(max_value);
  }
  fail(ErrorCode::Internal, "unreachable norm");
}

std::int32_t quantize_magnitude(double magnitude, double max_magnitude,
                                std::int32_t bins) {
  if (max_magnitude <= 0.0) return 0;
  const auto bin = static_cast<std::int32_t>(
      std::llround(magnitude / max_magnitude * (bins - 1)));
  return std::clamp(bin, 0, bins - 1);
}

namespace {

// -------------------------------------------------------------------------
// Kruskal-style construction. Edge ids encode position: 2p is the edge from
// pixel p to its right neighbor, 2p+1 the edge to the neighbor below; the id
// order is exactly ascending (pixelA, pixelB) order. A counting sort by
// quantized magnitude keeps that order within each bin.
//
// During the sweep, each union-find component carries its current top tree
// node. When an edge at level L joins two tops already at level L, the
// smaller one is folded into the larger (marked as an alias and dropped in
// the compaction pass), so canonical levels are strictly increasing toward
// the root. Moments and channel statistics are filled in afterwards by one
// bottom-up pass, which is valid because canonical parent ids always exceed
// child ids.
// -------------------------------------------------------------------------

struct RawTree {
  std::vector<std::int32_t> parent;
  std::vector<std::int32_t> level;
  std::vector<std::int32_t> area;
  std::vector<std::uint8_t> alias;
  std::int32_t count = 0;
  std::int32_t root = -1;
};

struct NodeAcc {
  std::int64_t min_pixel, best_area, best_min;
  std::int32_t best_id;
  std::int32_t r0, c0, r1, c1;
};

struct Update {
  std::int64_t min_pixel, child_area;
  std::int32_t target, child;
  std::int32_t r0, c0, r1, c1;
};

// Per-thread buffers reused across builds. Capacity follows the largest
// frame seen, so steady-state tracking does no large allocations per frame.
struct BuildScratch {
  RawTree raw;
  std::vector<std::int32_t> edge_lvl, sorted, up, top, quant_table;
  std::vector<std::int32_t> new_id, csr_cursor;
  std::vector<std::int64_t> bucket, cursor64, prefix;
  std::vector<NodeAcc> acc;
  std::vector<std::vector<Update>> pending;
};

BuildScratch& build_scratch() {
  static thread_local BuildScratch s;
  return s;
}

std::int32_t dsu_find(std::vector<std::int32_t>& up, std::int32_t x) {
  while (up[x] != x) {
    up[x] = up[up[x]];
    x = up[x];
  }
  return x;
}

template <class LevelFn>
void sweep_edges(const MultichannelImage& img, std::int32_t bins,
                 LevelFn&& edge_level, BuildScratch& s) {
  const std::int32_t w = img.width, h = img.height;
  const auto n_pixels = static_cast<std::int32_t>(img.pixel_count());
  const std::int64_t n_edges =
      static_cast<std::int64_t>(h) * (w - 1) + static_cast<std::int64_t>(w) * (h - 1);

  RawTree& t = s.raw;
  const std::int32_t cap = 2 * n_pixels;
  t.parent.assign(cap, -1);
  t.level.assign(cap, 0);
  t.area.assign(cap, 0);
  t.alias.assign(cap, 0);
  t.count = n_pixels;
  std::fill_n(t.area.begin(), n_pixels, std::int32_t{1});

  // counting sort of edge ids by level
  auto& edge_lvl = s.edge_lvl;
  edge_lvl.assign(static_cast<std::size_t>(2) * n_pixels, -1);
  auto& bucket = s.bucket;
  bucket.assign(static_cast<std::size_t>(bins) + 1, 0);
  for (std::int32_t r = 0; r < h; ++r) {
    for (std::int32_t c = 0; c < w; ++c) {
      const std::int32_t p = r * w + c;
      if (c + 1 < w) {
        const std::int32_t lv = edge_level(p, p + 1);
        edge_lvl[2 * static_cast<std::size_t>(p)] = lv;
        ++bucket[lv + 1];
      }
      if (r + 1 < h) {
        const std::int32_t lv = edge_level(p, p + w);
        edge_lvl[2 * static_cast<std::size_t>(p) + 1] = lv;
        ++bucket[lv + 1];
      }
    }
  }
  for (std::int32_t b = 0; b < bins; ++b) bucket[b + 1] += bucket[b];
  auto& sorted = s.sorted;
  sorted.resize(static_cast<std::size_t>(n_edges));
  {
    auto& cursor = s.cursor64;
    cursor.assign(bucket.begin(), bucket.end() - 1);
    for (std::size_t e = 0; e < edge_lvl.size(); ++e) {
      const std::int32_t lv = edge_lvl[e];
      if (lv >= 0) sorted[static_cast<std::size_t>(cursor[lv]++)] = static_cast<std::int32_t>(e);
    }
  }

  auto& up = s.up;
  auto& top = s.top;
  up.resize(n_pixels);
  top.resize(n_pixels);
  for (std::int32_t p = 0; p < n_pixels; ++p) up[p] = top[p] = p;

  auto absorb = [&t](std::int32_t dst, std::int32_t src) {
    t.area[dst] += t.area[src];
  };

  for (std::int32_t lv = 0; lv < bins; ++lv) {
    for (std::int64_t k = bucket[lv]; k < bucket[lv + 1]; ++k) {
      const std::int32_t e = sorted[static_cast<std::size_t>(k)];
      const std::int32_t a = e >> 1;
      const std::int32_t b = (e & 1) ? a + w : a + 1;
      std::int32_t ra = dsu_find(up, a);
      std::int32_t rb = dsu_find(up, b);
      if (ra == rb) continue;
      const std::int32_t ta = top[ra], tb = top[rb];
      const std::int32_t sa = t.area[ta], sb = t.area[tb];

      std::int32_t merged;
      if (t.level[ta] == lv && t.level[tb] == lv) {
        std::int32_t s = ta, o = tb;
        if (t.area[o] > t.area[s] || (t.area[o] == t.area[s] && o < s))
          std::swap(s, o);
        absorb(s, o);
        t.parent[o] = s;
        t.alias[o] = 1;
        merged = s;
      } else if (t.level[ta] == lv) {
        t.parent[tb] = ta;
        absorb(ta, tb);
        merged = ta;
      } else if (t.level[tb] == lv) {
        t.parent[ta] = tb;
        absorb(tb, ta);
        merged = tb;
      } else {
        const std::int32_t n = t.count++;
        t.level[n] = lv;
        absorb(n, ta);
        absorb(n, tb);
        t.parent[ta] = n;
        t.parent[tb] = n;
        merged = n;
      }

      if (sa < sb) std::swap(ra, rb);  // union by size
      up[rb] = ra;
      top[ra] = merged;
    }
  }

  t.root = top[dsu_find(up, 0)];
}

}  // namespace

std::int32_t ComponentTree::component_at(std::int64_t pixel,
                                         std::int32_t t) const {
  if (pixel < 0 || pixel >= static_cast<std::int64_t>(width) * height)
    fail(ErrorCode::OutOfRange, "component_at: pixel index out of range");
  if (t < 0 || t >= bins)
    fail(ErrorCode::OutOfRange, "component_at: threshold out of range");
  std::int32_t n = pixel_node[static_cast<std::size_t>(pixel)];
  while (parent[n] != -1 && level[parent[n]] <= t) n = parent[n];
  return n;
}

std::span<const std::int64_t> ComponentTree::region_pixels(
    std::int32_t node) const {
  check_node(node);
  return {pixel_order.data() + pixel_start[node],
          static_cast<std::size_t>(area[node])};
}

SegmentationMask ComponentTree::node_mask(std::int32_t node) const {
  check_node(node);
  SegmentationMask mask(width, height);
  for (const std::int64_t p : region_pixels(node))
    mask.bits[static_cast<std::size_t>(p)] = 1;
  return mask;
}

void ComponentTree::check_node(std::int32_t node) const {
  if (node < 0 || node >= node_count())
    fail(ErrorCode::OutOfRange, "invalid node id " + std::to_string(node));
}

std::string ComponentTree::dump_json() const {
  nlohmann::json doc;
  doc["width"] = width;
  doc["height"] = height;
  doc["channels"] = channels;
  doc["bins"] = bins;
  doc["root"] = root;
  auto& nodes = doc["nodes"] = nlohmann::json::array();
  for (std::int32_t i = 0; i < node_count(); ++i) {
    const Rect b = node_bbox(i);
    nodes.push_back({{"id", i},
                     {"parent", parent[i]},
                     {"level", level[i]},
                     {"area", area[i]},
                     {"bbox", {b.row0, b.col0, b.height, b.width}}});
  }
  return doc.dump(2);
}

namespace {

ComponentTree finalize_tree(const MultichannelImage& img, std::int32_t bins,
                            BuildScratch& s, ComponentTree&& reuse) {
  RawTree& raw = s.raw;
  const std::int32_t w = img.width, nch = img.channels;
  const auto n_pixels = static_cast<std::int32_t>(img.pixel_count());

  // collapse alias chains
  auto resolve = [&raw](std::int32_t x) {
    std::int32_t r = x;
    while (raw.alias[r]) r = raw.parent[r];
    while (raw.alias[x]) {
      const std::int32_t nx = raw.parent[x];
      raw.parent[x] = r;
      x = nx;
    }
    return r;
  };

  auto& new_id = s.new_id;
  new_id.assign(raw.count, -1);
  std::int32_t n_nodes = 0;
  for (std::int32_t i = 0; i < raw.count; ++i)
    if (!raw.alias[i]) new_id[i] = n_nodes++;

  ComponentTree t = std::move(reuse);
  t.width = w;
  t.height = img.height;
  t.channels = nch;
  t.bins = bins;
  t.root = new_id[resolve(raw.root)];

  t.parent.resize(n_nodes);
  t.level.resize(n_nodes);
  t.area.resize(n_nodes);
  t.child_start.assign(static_cast<std::size_t>(n_nodes) + 1, 0);
  for (std::int32_t i = 0; i < raw.count; ++i) {
    if (raw.alias[i]) continue;
    const std::int32_t ni = new_id[i];
    t.level[ni] = raw.level[i];
    t.area[ni] = raw.area[i];
    const std::int32_t pa =
        raw.parent[i] == -1 ? -1 : new_id[resolve(raw.parent[i])];
    t.parent[ni] = pa;
    if (pa != -1) ++t.child_start[pa + 1];
  }

  t.pixel_node.resize(n_pixels);
  for (std::int32_t p = 0; p < n_pixels; ++p) t.pixel_node[p] = new_id[resolve(p)];

  // children CSR, sorted by id because ids are scanned in order
  for (std::int32_t i = 0; i < n_nodes; ++i) t.child_start[i + 1] += t.child_start[i];
  t.child_list.resize(t.child_start[n_nodes]);
  {
    auto& cursor = s.csr_cursor;
    cursor.assign(t.child_start.begin(), t.child_start.end() - 1);
    for (std::int32_t i = 0; i < n_nodes; ++i)
      if (t.parent[i] != -1) t.child_list[static_cast<std::size_t>(cursor[t.parent[i]]++)] = i;
  }

  // flat zones keep the low ids; every pixel maps to one of them
  std::int32_t n_zones = 0;
  while (n_zones < n_nodes && t.child_start[n_zones + 1] == 0) ++n_zones;

  // pre-order pixel ranges: every subtree owns a contiguous range. Walking
  // ids downward, each node splits its own range among its children in child
  // order, which is exactly the order a depth-first walk would assign.
  if (t.area[t.root] != n_pixels)
    fail(ErrorCode::Internal, "tree does not cover the pixel grid");
  t.pixel_start.resize(n_nodes);
  t.pixel_order.resize(n_pixels);
  t.pixel_start[t.root] = 0;
  for (std::int32_t i = n_nodes - 1; i >= 0; --i) {
    std::int64_t cursor = t.pixel_start[i];
    const std::int32_t last = t.child_start[i + 1];
    for (std::int32_t k = t.child_start[i]; k < last; ++k) {
      const std::int32_t c = t.child_list[static_cast<std::size_t>(k)];
      t.pixel_start[c] = cursor;
      cursor += t.area[c];
    }
  }
  {
    auto& cursor = s.cursor64;
    cursor.assign(t.pixel_start.begin(), t.pixel_start.begin() + n_zones);
    for (std::int32_t p = 0; p < n_pixels; ++p)
      t.pixel_order[static_cast<std::size_t>(cursor[t.pixel_node[p]]++)] = p;
  }

  // accumulators. Every subtree owns a contiguous preorder range, so the
  // additive attributes (moments, channel sums) are differences of prefix
  // sums over the ordered pixel sequence. The non-additive ones (extent,
  // smallest pixel, largest child) still need a child-to-parent fold; that
  // fold runs blocked over id windows so the randomly addressed parent
  // records stay cache resident, with contributions that cross a window
  // boundary streamed through per-window buffers. Parent ids always exceed
  // child ids, so node i is final once its window has drained.
  t.m10.resize(n_nodes);
  t.m01.resize(n_nodes);
  t.m20.resize(n_nodes);
  t.m02.resize(n_nodes);
  t.m11.resize(n_nodes);
  t.min_pixel.resize(n_nodes);
  t.bbox_row0.resize(n_nodes);
  t.bbox_col0.resize(n_nodes);
  t.bbox_row1.resize(n_nodes);
  t.bbox_col1.resize(n_nodes);
  t.max_child.resize(n_nodes);
  t.channel_sum.resize(static_cast<std::size_t>(n_nodes) * nch);
  t.channel_sumsq.resize(static_cast<std::size_t>(n_nodes) * nch);

  // Zones are filled by one scan over their own pixels further down. Merge
  // nodes take two gathers each into an interleaved prefix-sum table over
  // the ordered pixel sequence: five raw moments, then (sum, sum of squares)
  // per channel.
  {
    const std::int32_t stride = 5 + 2 * nch;
    auto& pf = s.prefix;
    pf.resize(static_cast<std::size_t>(n_pixels + 1) * stride);
    std::fill_n(pf.begin(), stride, std::int64_t{0});
    const std::int64_t* prev = pf.data();
    std::int64_t* row = pf.data() + stride;
    for (std::int32_t k = 0; k < n_pixels; ++k) {
      const std::int64_t p = t.pixel_order[static_cast<std::size_t>(k)];
      const std::int64_t r = p / w, c = p % w;
      row[0] = prev[0] + r;
      row[1] = prev[1] + c;
      row[2] = prev[2] + r * r;
      row[3] = prev[3] + c * c;
      row[4] = prev[4] + r * c;
      const std::int32_t* px = img.pixel(p);
      for (std::int32_t ch = 0; ch < nch; ++ch) {
        const std::int64_t v = px[ch];
        row[5 + 2 * ch] = prev[5 + 2 * ch] + v;
        row[6 + 2 * ch] = prev[6 + 2 * ch] + v * v;
      }
      prev = row;
      row += stride;
    }
    for (std::int32_t i = n_zones; i < n_nodes; ++i) {
      const std::int64_t a = t.pixel_start[i];
      const std::int64_t b = a + t.area[i];
      const std::int64_t* lo = pf.data() + static_cast<std::size_t>(a) * stride;
      const std::int64_t* hi = pf.data() + static_cast<std::size_t>(b) * stride;
      t.m10[i] = hi[0] - lo[0];
      t.m01[i] = hi[1] - lo[1];
      t.m20[i] = hi[2] - lo[2];
      t.m02[i] = hi[3] - lo[3];
      t.m11[i] = hi[4] - lo[4];
      for (std::int32_t ch = 0; ch < nch; ++ch) {
        t.channel_sum[static_cast<std::size_t>(i) * nch + ch] =
            hi[5 + 2 * ch] - lo[5 + 2 * ch];
        t.channel_sumsq[static_cast<std::size_t>(i) * nch + ch] =
            hi[6 + 2 * ch] - lo[6 + 2 * ch];
      }
    }
  }

  const NodeAcc empty_acc{std::numeric_limits<std::int64_t>::max(), -1,
                          std::numeric_limits<std::int64_t>::max(), -1,
                          std::numeric_limits<std::int32_t>::max(),
                          std::numeric_limits<std::int32_t>::max(), -1, -1};
  auto& acc = s.acc;
  acc.resize(static_cast<std::size_t>(n_nodes));

  // one scan per zone over its contiguous pixel range (ascending, so the
  // first entry is the smallest pixel); extents seed the fold, moments and
  // channel stats go straight to the output
  for (std::int32_t n = 0; n < n_zones; ++n) {
    NodeAcc a = empty_acc;
    const std::int64_t lo = t.pixel_start[n];
    const std::int64_t hi = lo + t.area[n];
    std::int64_t m10 = 0, m01 = 0, m20 = 0, m02 = 0, m11 = 0;
    std::int64_t* cs = t.channel_sum.data() + static_cast<std::size_t>(n) * nch;
    std::int64_t* cq = t.channel_sumsq.data() + static_cast<std::size_t>(n) * nch;
    std::fill_n(cs, nch, std::int64_t{0});
    std::fill_n(cq, nch, std::int64_t{0});
    for (std::int64_t k = lo; k < hi; ++k) {
      const std::int64_t p = t.pixel_order[static_cast<std::size_t>(k)];
      const std::int64_t r = p / w, c = p % w;
      m10 += r;
      m01 += c;
      m20 += r * r;
      m02 += c * c;
      m11 += r * c;
      a.r0 = std::min(a.r0, static_cast<std::int32_t>(r));
      a.c0 = std::min(a.c0, static_cast<std::int32_t>(c));
      a.r1 = std::max(a.r1, static_cast<std::int32_t>(r));
      a.c1 = std::max(a.c1, static_cast<std::int32_t>(c));
      const std::int32_t* px = img.pixel(p);
      for (std::int32_t ch = 0; ch < nch; ++ch) {
        const std::int64_t v = px[ch];
        cs[ch] += v;
        cq[ch] += v * v;
      }
    }
    a.min_pixel = t.pixel_order[static_cast<std::size_t>(lo)];
    acc[static_cast<std::size_t>(n)] = a;
    t.m10[n] = m10;
    t.m01[n] = m01;
    t.m20[n] = m20;
    t.m02[n] = m02;
    t.m11[n] = m11;
  }

  constexpr std::int64_t kWindowBytes = std::int64_t{6} << 20;
  const std::int32_t window = static_cast<std::int32_t>(std::max<std::int64_t>(
      std::int64_t{1} << 14, kWindowBytes / static_cast<std::int64_t>(sizeof(NodeAcc))));
  const std::int32_t n_windows = (n_nodes + window - 1) / window;
  auto& pending = s.pending;
  if (static_cast<std::int32_t>(pending.size()) < n_windows)
    pending.resize(n_windows);
  for (std::int32_t k = 0; k < n_windows; ++k) pending[k].clear();

  auto fold_child = [](NodeAcc& d, std::int64_t min_pixel,
                       std::int64_t child_area, std::int32_t child,
                       std::int32_t r0, std::int32_t c0, std::int32_t r1,
                       std::int32_t c1) {
    d.min_pixel = std::min(d.min_pixel, min_pixel);
    d.r0 = std::min(d.r0, r0);
    d.c0 = std::min(d.c0, c0);
    d.r1 = std::max(d.r1, r1);
    d.c1 = std::max(d.c1, c1);
    if (child_area > d.best_area ||
        (child_area == d.best_area && min_pixel < d.best_min)) {
      d.best_area = child_area;
      d.best_min = min_pixel;
      d.best_id = child;
    }
  };

  for (std::int32_t k = 0; k < n_windows; ++k) {
    const std::int32_t lo = k * window;
    const std::int32_t hi = std::min(n_nodes, lo + window);
    for (std::int32_t i = std::max(lo, n_zones); i < hi; ++i)
      acc[static_cast<std::size_t>(i)] = empty_acc;
    for (const Update& up : pending[k])
      fold_child(acc[static_cast<std::size_t>(up.target)], up.min_pixel,
                 up.child_area, up.child, up.r0, up.c0, up.r1, up.c1);
    pending[k].clear();

    for (std::int32_t i = lo; i < hi; ++i) {
      const NodeAcc& a = acc[static_cast<std::size_t>(i)];
      t.min_pixel[i] = a.min_pixel;
      t.bbox_row0[i] = a.r0;
      t.bbox_col0[i] = a.c0;
      t.bbox_row1[i] = a.r1;
      t.bbox_col1[i] = a.c1;
      t.max_child[i] = a.best_id;

      const std::int32_t pa = t.parent[i];
      if (pa == -1) continue;
      if (pa < hi) {
        fold_child(acc[static_cast<std::size_t>(pa)], a.min_pixel, t.area[i],
                   i, a.r0, a.c0, a.r1, a.c1);
      } else {
        pending[pa / window].push_back(
            Update{a.min_pixel, t.area[i], pa, i, a.r0, a.c0, a.r1, a.c1});
      }
    }
  }

  return t;
}

}  // namespace

ComponentTree build_component_tree(const MultichannelImage& img,
                                   const TreeParams& params) {
  return build_component_tree(img, params, ComponentTree{});
}

ComponentTree build_component_tree(const MultichannelImage& img,
                                   const TreeParams& params,
                                   ComponentTree&& recycle) {
  if (img.width < 1 || img.height < 1 || img.channels < 1 || img.samples.empty())
    fail(ErrorCode::InvalidArgument, "build_component_tree: invalid image");
  const std::int32_t bins = params.quantization_bins;
  if (bins < 2)
    fail(ErrorCode::InvalidArgument, "quantization_bins must be >= 2");

  const std::int32_t nch = img.channels;
  const double max_mag = max_edge_magnitude(nch, img.max_value, params.norm);

  // Integer pre-norms are small, so quantization is memoized per value.
  std::int64_t table_span = 0;
  switch (params.norm) {
    case EdgeNorm::L1:
      table_span = static_cast<std::int64_t>(nch) * img.max_value;
      break;
    case EdgeNorm::L2:
      table_span = static_cast<std::int64_t>(nch) * img.max_value * img.max_value;
      break;
    case EdgeNorm::Linf:
      table_span = img.max_value;
      break;
  }
  BuildScratch& scratch = build_scratch();
  auto& table = scratch.quant_table;
  const bool use_table = table_span <= (std::int64_t{1} << 22);
  if (use_table) {
    table.resize(static_cast<std::size_t>(table_span) + 1);
    for (std::int64_t v = 0; v <= table_span; ++v) {
      const double mag = params.norm == EdgeNorm::L2
                             ? std::sqrt(static_cast<double>(v))
                             : static_cast<double>(v);
      table[static_cast<std::size_t>(v)] = quantize_magnitude(mag, max_mag, bins);
    }
  }

  const std::int32_t* samples = img.samples.data();
  auto edge_level = [&](std::int32_t a, std::int32_t b) -> std::int32_t {
    const std::int32_t* pa = samples + static_cast<std::size_t>(a) * nch;
    const std::int32_t* pb = samples + static_cast<std::size_t>(b) * nch;
    std::int64_t m = 0;
    switch (params.norm) {
      case EdgeNorm::L1:
        for (std::int32_t ch = 0; ch < nch; ++ch)
          m += std::abs(static_cast<std::int64_t>(pa[ch]) - pb[ch]);
        break;
      case EdgeNorm::L2:
        for (std::int32_t ch = 0; ch < nch; ++ch) {
          const std::int64_t d = static_cast<std::int64_t>(pa[ch]) - pb[ch];
          m += d * d;
        }
        break;
      case EdgeNorm::Linf:
        for (std::int32_t ch = 0; ch < nch; ++ch)
          m = std::max(m, std::abs(static_cast<std::int64_t>(pa[ch]) - pb[ch]));
        break;
    }
    if (use_table) return table[static_cast<std::size_t>(m)];
    const double mag = params.norm == EdgeNorm::L2
                           ? std::sqrt(static_cast<double>(m))
                           : static_cast<double>(m);
    return quantize_magnitude(mag, max_mag, bins);
  };

  sweep_edges(img, bins, edge_level, scratch);
  return finalize_tree(img, bins, scratch, std::move(recycle));
}

ComponentTree build_levelset_tree(const MultichannelImage& img,
                                  std::int32_t channel, bool bright) {
  return build_levelset_tree(img, channel, bright, ComponentTree{});
}

ComponentTree build_levelset_tree(const MultichannelImage& img,
                                  std::int32_t channel, bool bright,
                                  ComponentTree&& recycle) {
  if (channel < 0 || channel >= img.channels)
    fail(ErrorCode::OutOfRange, "build_levelset_tree: channel out of range");
  const std::int32_t bins = img.max_value + 1;
  const std::int32_t nch = img.channels;
  const std::int32_t maxval = img.max_value;
  const std::int32_t* samples = img.samples.data();

  auto edge_level = [&](std::int32_t a, std::int32_t b) -> std::int32_t {
    const std::int32_t va = samples[static_cast<std::size_t>(a) * nch + channel];
    const std::int32_t vb = samples[static_cast<std::size_t>(b) * nch + channel];
    const std::int32_t ka = bright ? maxval - va : va;
    const std::int32_t kb = bright ? maxval - vb : vb;
    return std::clamp(std::max(ka, kb), 0, bins - 1);
  };

  BuildScratch& scratch = build_scratch();
  sweep_edges(img, bins, edge_level, scratch);
  return finalize_tree(img, bins, scratch, std::move(recycle));
}

}  // namespace mshr
