#include <string>

#include "config.hpp"
#include "doctest.h"
#include "error.hpp"

using namespace mshr;

namespace {

bool throws_mentioning(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("parse_config reads every section") {
  const TrackerConfig c = parse_config(R"json({
    "tree": {"norm": "l1", "quantization_bins": 64},
    "stability": {"delta": 3, "min_area": 40, "max_area_fraction": 0.4,
                  "normalized": true},
    "weights": {"area": 2.0, "axes": 0.5, "channel_mean": 1.5,
                "channel_dev": 0.25, "centroid_gate_radius": 12.0},
    "lambda": 0.3,
    "search_factor": 2.5,
    "max_targets": 3,
    "accept_threshold": 0.7,
    "extremal_baseline": true
  })json");
  CHECK(c.tree.norm == EdgeNorm::L1);
  CHECK(c.tree.quantization_bins == 64);
  CHECK(c.stability.delta == 3);
  CHECK(c.stability.min_area == 40);
  CHECK(c.stability.max_area_fraction == 0.4);
  CHECK(c.stability.normalized);
  CHECK(c.weights.w_area == 2.0);
  CHECK(c.weights.w_axes == 0.5);
  CHECK(c.weights.w_channel_mean == 1.5);
  CHECK(c.weights.w_channel_dev == 0.25);
  CHECK(c.weights.centroid_gate_radius == 12.0);
  CHECK(c.lambda == 0.3);
  CHECK(c.search_factor == 2.5);
  CHECK(c.max_targets == 3);
  CHECK(c.accept_threshold == 0.7);
  CHECK(c.extremal_baseline);
}

TEST_CASE("an empty document keeps the defaults") {
  const TrackerConfig c = parse_config("{}");
  const TrackerConfig d;
  CHECK(c.tree.norm == d.tree.norm);
  CHECK(c.tree.quantization_bins == d.tree.quantization_bins);
  CHECK(c.stability.delta == d.stability.delta);
  CHECK(c.lambda == d.lambda);
  CHECK(c.max_targets == d.max_targets);
}

TEST_CASE("unknown keys are rejected with their full path") {
  CHECK(throws_mentioning(R"({"speling": 1})", "unknown key 'speling'"));
  CHECK(throws_mentioning(R"({"tree": {"bins": 8}})", "unknown key 'tree.bins'"));
  CHECK(throws_mentioning(R"({"stability": {"Delta": 2}})",
                          "unknown key 'stability.Delta'"));
  CHECK(throws_mentioning(R"({"weights": {"theta": 1}})",
                          "unknown key 'weights.theta'"));
}

TEST_CASE("malformed documents and bad values fail to parse") {
  CHECK_THROWS_AS(parse_config("not json"), Error);
  CHECK_THROWS_AS(parse_config("[1,2,3]"), Error);
  CHECK_THROWS_AS(parse_config(R"({"lambda": "high"})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"tree": {"norm": "l3"}})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"max_targets": 2.5})"), Error);
  // Well-formed but out of range: caught by validation.
  CHECK_THROWS_AS(parse_config(R"({"lambda": 1.5})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"stability": {"delta": 0}})"), Error);
}

TEST_CASE("serialized configs parse back to the same values") {
  TrackerConfig c;
  c.tree.norm = EdgeNorm::Linf;
  c.tree.quantization_bins = 128;
  c.stability.normalized = true;
  c.weights.centroid_gate_radius = 33.0;
  c.lambda = 0.75;
  c.max_targets = 2;

  const TrackerConfig back = parse_config(config_to_json(c));
  CHECK(back.tree.norm == EdgeNorm::Linf);
  CHECK(back.tree.quantization_bins == 128);
  CHECK(back.stability.normalized);
  CHECK(back.weights.centroid_gate_radius == 33.0);
  CHECK(back.lambda == 0.75);
  CHECK(back.max_targets == 2);
}

TEST_CASE("overrides route dotted keys into each section") {
  TrackerConfig c;
  apply_override(c, "tree.norm=linf");
  apply_override(c, "tree.quantization_bins=32");
  apply_override(c, "stability.delta=9");
  apply_override(c, "stability.normalized=true");
  apply_override(c, "weights.area=3.5");
  apply_override(c, "lambda=0.25");
  apply_override(c, "max_targets=4");
  apply_override(c, "extremal_baseline=true");
  CHECK(c.tree.norm == EdgeNorm::Linf);
  CHECK(c.tree.quantization_bins == 32);
  CHECK(c.stability.delta == 9);
  CHECK(c.stability.normalized);
  CHECK(c.weights.w_area == 3.5);
  CHECK(c.lambda == 0.25);
  CHECK(c.max_targets == 4);
  CHECK(c.extremal_baseline);

  CHECK_THROWS_AS(apply_override(c, "no_equals_sign"), Error);
  CHECK_THROWS_AS(apply_override(c, "=5"), Error);
  CHECK_THROWS_AS(apply_override(c, "stability.nope=1"), Error);
  CHECK_THROWS_AS(apply_override(c, "lambda=oops"), Error);
  CHECK_THROWS_AS(apply_override(c, "tree.norm=l9"), Error);
}

TEST_CASE("load_config reports a missing file") {
  try {
    load_config("/nonexistent/cfg.json");
    FAIL("load should have thrown");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}
