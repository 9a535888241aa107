#pragma once

#include <limits>
#include <string>
#include <vector>

#include "geofuse/grid.hpp"
#include "geofuse/prior.hpp"

namespace geofuse {

/// Per-channel normalization applied during stacking.
struct NormRule {
  enum class Kind { byte255, identity, minmax, categorical_rgb };
  Kind kind = Kind::identity;
  // Filled in while stacking a minmax channel; recorded in provenance.
  double recorded_min = 0.0;
  double recorded_max = 0.0;

  static NormRule byte255() { return {Kind::byte255, 0, 0}; }
  static NormRule identity() { return {Kind::identity, 0, 0}; }
  static NormRule minmax() { return {Kind::minmax, 0, 0}; }
  static NormRule categorical_rgb() { return {Kind::categorical_rgb, 0, 0}; }

  static NormRule parse(const std::string& name) {
    if (name == "byte255") return byte255();
    if (name == "identity") return identity();
    if (name == "minmax") return minmax();
    if (name == "categorical_rgb") return categorical_rgb();
    throw parse_error("unknown norm rule '" + name + "'");
  }

  std::string describe() const {
    switch (kind) {
      case Kind::byte255: return "byte255";
      case Kind::identity: return "identity";
      case Kind::categorical_rgb: return "categorical_rgb";
      case Kind::minmax: {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "minmax[%.9g,%.9g]", recorded_min, recorded_max);
        return buf;
      }
    }
    return "identity";
  }
};

struct ChannelProvenance {
  std::string source;
  std::string norm;
};

/// Model-ready channel stack. All channels share shape and transform;
/// provenance has one record per channel. Serialized channel-major (C,H,W).
struct FusedTensor {
  std::vector<Grid> channels;
  std::vector<ChannelProvenance> provenance;

  int width() const { return channels.empty() ? 0 : channels[0].width; }
  int height() const { return channels.empty() ? 0 : channels[0].height; }
  size_t channel_count() const { return channels.size(); }
};

struct ChannelInput {
  Grid grid;
  NormRule rule;
  std::string name;
};

namespace detail {

inline Grid apply_norm_rule(const Grid& g, NormRule& rule, const std::string& name) {
  Grid out = g;
  switch (rule.kind) {
    case NormRule::Kind::identity:
    case NormRule::Kind::categorical_rgb:
      break;  // palette mapping happened upstream for categorical_rgb
    case NormRule::Kind::byte255:
      for (double& v : out.data)
        if (!out.is_nodata(v)) v /= 255.0;
      break;
    case NormRule::Kind::minmax: {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (double v : g.data) {
        if (g.is_nodata(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(lo < hi))
        throw degenerate_error("stack: channel '" + name + "' has a degenerate range for minmax");
      rule.recorded_min = lo;
      rule.recorded_max = hi;
      for (double& v : out.data)
        if (!out.is_nodata(v)) v = (v - lo) / (hi - lo);
      break;
    }
  }
  out.kind = GridKind::continuous;
  return out;
}

}  // namespace detail

/// STACK: normalize each input per its rule and concatenate in input order.
inline FusedTensor stack_channels(const std::vector<ChannelInput>& inputs) {
  if (inputs.empty()) throw parameter_error("stack_channels: need at least one input");
  for (size_t i = 1; i < inputs.size(); ++i)
    if (!inputs[0].grid.same_geometry(inputs[i].grid))
      throw alignment_error("stack_channels: inputs 0 and " + std::to_string(i) +
                            " ('" + inputs[0].name + "' vs '" + inputs[i].name +
                            "') do not share shape and transform");

  FusedTensor tensor;
  for (const ChannelInput& in : inputs) {
    NormRule rule = in.rule;
    tensor.channels.push_back(detail::apply_norm_rule(in.grid, rule, in.name));
    tensor.provenance.push_back({in.name, rule.describe()});
  }
  return tensor;
}

/// PROC-STACK: optical channels, then the generated prior (identity rule --
/// the channels are already probabilities), then any raw extras. Prior
/// channels carry the generation manifest hash in their provenance.
inline FusedTensor proc_stack(const std::vector<ChannelInput>& optical,
                              const PriorStack& prior, const PriorManifest& manifest,
                              const std::vector<ChannelInput>& extras = {}) {
  if (optical.empty()) throw parameter_error("proc_stack: need at least one optical channel");
  if (prior.channels.empty()) throw parameter_error("proc_stack: prior has no channels");

  FusedTensor tensor = stack_channels(optical);
  std::string hash = manifest.hash_hex();
  for (int f = 0; f < prior.n_fine(); ++f) {
    const Grid& ch = prior.channels[f];
    if (!tensor.channels[0].same_geometry(ch))
      throw alignment_error("proc_stack: prior channel " + std::to_string(f) +
                            " is not aligned with the optical input");
    tensor.channels.push_back(ch);
    tensor.provenance.push_back({"prior[" + std::to_string(f) + "] manifest=" + hash, "identity"});
  }
  for (size_t i = 0; i < extras.size(); ++i) {
    const ChannelInput& in = extras[i];
    if (!tensor.channels[0].same_geometry(in.grid))
      throw alignment_error("proc_stack: extra channel '" + in.name +
                            "' is not aligned with the optical input");
    NormRule rule = in.rule;
    tensor.channels.push_back(detail::apply_norm_rule(in.grid, rule, in.name));
    tensor.provenance.push_back({in.name, rule.describe()});
  }
  return tensor;
}

}  // namespace geofuse
