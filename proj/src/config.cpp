#include "config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "error.hpp"

namespace mshr {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  fail(ErrorCode::Parse, "config: " + msg);
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) bad("'" + key + "' must be a number");
  return j.get<double>();
}

std::int32_t get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) bad("'" + key + "' must be an integer");
  return j.get<std::int32_t>();
}

bool get_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) bad("'" + key + "' must be a boolean");
  return j.get<bool>();
}

EdgeNorm parse_norm(const std::string& s) {
  if (s == "l1") return EdgeNorm::L1;
  if (s == "l2") return EdgeNorm::L2;
  if (s == "linf") return EdgeNorm::Linf;
  bad("'tree.norm' must be one of \"l1\", \"l2\", \"linf\"");
}

std::string norm_name(EdgeNorm n) {
  switch (n) {
    case EdgeNorm::L1: return "l1";
    case EdgeNorm::L2: return "l2";
    case EdgeNorm::Linf: return "linf";
  }
  return "l2";
}

void parse_tree(const json& j, TreeParams& out) {
  if (!j.is_object()) bad("'tree' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "norm") {
      if (!value.is_string()) bad("'tree.norm' must be a string");
      out.norm = parse_norm(value.get<std::string>());
    } else if (key == "quantization_bins") {
      out.quantization_bins = get_int(value, "tree.quantization_bins");
    } else {
      bad("unknown key 'tree." + key + "'");
    }
  }
}

void parse_stability(const json& j, StabilityParams& out) {
  if (!j.is_object()) bad("'stability' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "delta") {
      out.delta = get_int(value, "stability.delta");
    } else if (key == "min_area") {
      if (!value.is_number_integer()) bad("'stability.min_area' must be an integer");
      out.min_area = value.get<std::int64_t>();
    } else if (key == "max_area_fraction") {
      out.max_area_fraction = get_number(value, "stability.max_area_fraction");
    } else if (key == "normalized") {
      out.normalized = get_bool(value, "stability.normalized");
    } else {
      bad("unknown key 'stability." + key + "'");
    }
  }
}

void parse_weights(const json& j, FeatureWeights& out) {
  if (!j.is_object()) bad("'weights' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "area") {
      out.w_area = get_number(value, "weights.area");
    } else if (key == "axes") {
      out.w_axes = get_number(value, "weights.axes");
    } else if (key == "channel_mean") {
      out.w_channel_mean = get_number(value, "weights.channel_mean");
    } else if (key == "channel_dev") {
      out.w_channel_dev = get_number(value, "weights.channel_dev");
    } else if (key == "centroid_gate_radius") {
      out.centroid_gate_radius = get_number(value, "weights.centroid_gate_radius");
    } else {
      bad("unknown key 'weights." + key + "'");
    }
  }
}

}  // namespace

TrackerConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(e.what());
  }
  if (!root.is_object()) bad("top level must be an object");

  TrackerConfig config;
  for (const auto& [key, value] : root.items()) {
    if (key == "tree") {
      parse_tree(value, config.tree);
    } else if (key == "stability") {
      parse_stability(value, config.stability);
    } else if (key == "weights") {
      parse_weights(value, config.weights);
    } else if (key == "lambda") {
      config.lambda = get_number(value, "lambda");
    } else if (key == "search_factor") {
      config.search_factor = get_number(value, "search_factor");
    } else if (key == "max_targets") {
      config.max_targets = get_int(value, "max_targets");
    } else if (key == "accept_threshold") {
      config.accept_threshold = get_number(value, "accept_threshold");
    } else if (key == "extremal_baseline") {
      config.extremal_baseline = get_bool(value, "extremal_baseline");
    } else {
      bad("unknown key '" + key + "'");
    }
  }
  validate_config(config);
  return config;
}

TrackerConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_override(TrackerConfig& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(ErrorCode::InvalidArgument,
         "override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  // Route string-valued keys directly; everything else goes through a
  // one-entry JSON document so type checks match file-based parsing.
  if (key == "tree.norm") {
    config.tree.norm = parse_norm(value);
    return;
  }

  json leaf;
  try {
    leaf = json::parse(value);
  } catch (const json::parse_error&) {
    bad("value for '" + key + "' is not valid JSON: " + value);
  }

  const std::size_t dot = key.find('.');
  const std::string head = key.substr(0, dot);
  const std::string tail =
      dot == std::string::npos ? std::string() : key.substr(dot + 1);

  if (head == "tree") {
    parse_tree(json{{tail, leaf}}, config.tree);
  } else if (head == "stability") {
    parse_stability(json{{tail, leaf}}, config.stability);
  } else if (head == "weights") {
    parse_weights(json{{tail, leaf}}, config.weights);
  } else if (dot == std::string::npos && head == "lambda") {
    config.lambda = get_number(leaf, key);
  } else if (dot == std::string::npos && head == "search_factor") {
    config.search_factor = get_number(leaf, key);
  } else if (dot == std::string::npos && head == "max_targets") {
    config.max_targets = get_int(leaf, key);
  } else if (dot == std::string::npos && head == "accept_threshold") {
    config.accept_threshold = get_number(leaf, key);
  } else if (dot == std::string::npos && head == "extremal_baseline") {
    config.extremal_baseline = get_bool(leaf, key);
  } else {
    bad("unknown key '" + key + "'");
  }
}

std::string config_to_json(const TrackerConfig& c) {
  json root = {
      {"tree",
       {{"norm", norm_name(c.tree.norm)},
        {"quantization_bins", c.tree.quantization_bins}}},
      {"stability",
       {{"delta", c.stability.delta},
        {"min_area", c.stability.min_area},
        {"max_area_fraction", c.stability.max_area_fraction},
        {"normalized", c.stability.normalized}}},
      {"weights",
       {{"area", c.weights.w_area},
        {"axes", c.weights.w_axes},
        {"channel_mean", c.weights.w_channel_mean},
        {"channel_dev", c.weights.w_channel_dev},
        {"centroid_gate_radius", c.weights.centroid_gate_radius}}},
      {"lambda", c.lambda},
      {"search_factor", c.search_factor},
      {"max_targets", c.max_targets},
      {"accept_threshold", c.accept_threshold},
      {"extremal_baseline", c.extremal_baseline},
  };
  return root.dump(2) + "\n";
}

}  // namespace mshr
