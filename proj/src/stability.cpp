#include "stability.hpp"

#include <algorithm>

#include "error.hpp"

namespace mshr {

namespace {

double stability_value(const ComponentTree& t, std::int32_t node,
                       std::int32_t delta, bool normalized) {
  const std::int32_t lvl = t.level[node];

  std::int32_t up = node;
  while (t.parent[up] != -1 && t.level[t.parent[up]] <= lvl + delta)
    up = t.parent[up];

  std::int32_t down = node;
  const std::int32_t lo = std::max(lvl - delta, 0);
  while (t.level[down] > lo && t.max_child[down] != -1)
    down = t.max_child[down];

  const std::int64_t grown = t.area[up] - t.area[down];
  if (normalized) return static_cast<double>(grown) / static_cast<double>(t.area[node]);
  return static_cast<double>(grown - t.area[node]);
}

}  // namespace

double stability(const ComponentTree& tree, std::int32_t node,
                 std::int32_t delta, bool normalized) {
  tree.check_node(node);
  if (delta < 1) fail(ErrorCode::InvalidArgument, "stability: delta must be >= 1");
  return stability_value(tree, node, delta, normalized);
}

std::vector<double> stability_all(const ComponentTree& tree, std::int32_t delta,
                                  bool normalized) {
  if (delta < 1) fail(ErrorCode::InvalidArgument, "stability: delta must be >= 1");
  std::vector<double> s(tree.node_count());
  for (std::int32_t i = 0; i < tree.node_count(); ++i)
    s[i] = stability_value(tree, i, delta, normalized);
  return s;
}

std::vector<MshrDetection> extract_mshr(const ComponentTree& tree,
                                        const StabilityParams& params) {
  if (params.delta < 1)
    fail(ErrorCode::InvalidArgument, "extract_mshr: delta must be >= 1");
  if (params.min_area < 1)
    fail(ErrorCode::InvalidArgument, "extract_mshr: min_area must be >= 1");
  if (params.max_area_fraction <= 0.0 || params.max_area_fraction > 1.0)
    fail(ErrorCode::InvalidArgument,
         "extract_mshr: max_area_fraction must be in (0, 1]");

  const std::vector<double> s =
      stability_all(tree, params.delta, params.normalized);
  const double max_area = params.max_area_fraction *
                          static_cast<double>(tree.width) * tree.height;

  std::vector<MshrDetection> out;
  for (std::int32_t i = 0; i < tree.node_count(); ++i) {
    if (tree.area[i] < params.min_area) continue;
    if (static_cast<double>(tree.area[i]) > max_area) continue;
    const std::int32_t pa = tree.parent[i];
    if (pa != -1 && !(s[i] <= s[pa])) continue;
    const std::int32_t mc = tree.max_child[i];
    if (mc != -1 && !(s[i] <= s[mc])) continue;
    out.push_back({i, tree.level[i], s[i]});
  }

  std::sort(out.begin(), out.end(),
            [&tree](const MshrDetection& a, const MshrDetection& b) {
              if (a.stability != b.stability) return a.stability < b.stability;
              if (tree.area[a.node] != tree.area[b.node])
                return tree.area[a.node] > tree.area[b.node];
              return a.node < b.node;
            });
  return out;
}

}  // namespace mshr
