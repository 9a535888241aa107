#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "geofuse/blur.hpp"
#include "geofuse/cooccurrence.hpp"
#include "geofuse/grid.hpp"
#include "geofuse/rasterize.hpp"

namespace geofuse {

/// Per-pixel belief stack over fine classes: channel f holds p_i(f). Every
/// pixel's channel values are >= 0 and sum to 1 after renormalization.
struct PriorStack {
  std::vector<Grid> channels;

  int n_fine() const { return static_cast<int>(channels.size()); }
  int width() const { return channels.empty() ? 0 : channels[0].width; }
  int height() const { return channels.empty() ? 0 : channels[0].height; }

  void validate(double tol = 1e-5) const {
    if (channels.empty()) throw shape_error("prior: no channels");
    for (size_t f = 1; f < channels.size(); ++f)
      require_aligned(channels[0], channels[f], "prior[0]", "prior[" + std::to_string(f) + "]");
    for (int r = 0; r < height(); ++r)
      for (int c = 0; c < width(); ++c) {
        double sum = 0.0;
        for (const Grid& ch : channels) {
          double v = ch.at(c, r);
          if (v < 0.0) throw data_error("prior: negative belief at (" + std::to_string(c) +
                                        "," + std::to_string(r) + ")");
          sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
          throw data_error("prior: pixel (" + std::to_string(c) + "," + std::to_string(r) +
                           ") sums to " + std::to_string(sum));
      }
  }
};

/// One mask-driven class boost: channel `target_class` gains `weight` where
/// the mask is 1.
struct Boost {
  BinaryMask mask;
  int target_class = 0;
  double weight = 1.0;
  std::string source;  // recorded in the manifest
};

using BoostSpec = std::vector<Boost>;

/// Broadcasts P(fine | coarse) to a per-pixel belief stack, then blurs each
/// channel independently. Blurring every channel with one shared kernel keeps
/// each pixel on the simplex. Coarse nodata pixels get the uniform belief.
inline PriorStack prior_from_coarse(const Grid& coarse, const CoOccurrenceMatrix& co,
                                    double blur_sigma) {
  if (coarse.kind != GridKind::categorical)
    throw kind_error("prior_from_coarse: coarse grid must be categorical");
  PriorStack prior;
  prior.channels.reserve(static_cast<size_t>(co.n_fine));
  for (int f = 0; f < co.n_fine; ++f) {
    Grid ch(coarse.width, coarse.height, GridKind::continuous);
    ch.transform = coarse.transform;
    prior.channels.push_back(std::move(ch));
  }
  for (int r = 0; r < coarse.height; ++r) {
    for (int c = 0; c < coarse.width; ++c) {
      double cv = coarse.at(c, r);
      if (coarse.is_nodata(cv)) {
        for (int f = 0; f < co.n_fine; ++f) prior.channels[f].at(c, r) = 1.0 / co.n_fine;
        continue;
      }
      int id = static_cast<int>(cv);
      if (id < 0 || id >= co.n_coarse)
        throw data_error("prior_from_coarse: coarse class " + std::to_string(id) +
                         " not covered by the co-occurrence matrix");
      for (int f = 0; f < co.n_fine; ++f) prior.channels[f].at(c, r) = co.p(id, f);
    }
  }
  if (blur_sigma > 0.0)
    for (auto& ch : prior.channels) ch = gaussian_blur(ch, blur_sigma);
  return prior;
}

/// Adds each boost weight to its target channel where the mask is set, then
/// renormalizes every pixel to sum 1. Pixels whose post-boost sum is zero
/// fall back to the uniform belief instead of dividing by zero.
inline PriorStack boost_and_renormalize(const PriorStack& prior, const BoostSpec& boosts) {
  if (prior.channels.empty()) throw shape_error("boost_and_renormalize: empty prior");
  int n_fine = prior.n_fine();
  PriorStack out = prior;
  for (const Boost& b : boosts) {
    if (b.target_class < 0 || b.target_class >= n_fine)
      throw parameter_error("boost: target class " + std::to_string(b.target_class) +
                            " out of range");
    if (!(b.weight >= 0.0) || !std::isfinite(b.weight))
      throw parameter_error("boost: weight must be finite and >= 0");
    require_aligned(out.channels[0], b.mask.grid, "prior", "boost mask '" + b.source + "'");
    Grid& target = out.channels[b.target_class];
    for (size_t i = 0; i < target.size(); ++i)
      if (b.mask.grid.data[i] != 0.0) target.data[i] += b.weight;
  }
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      double sum = 0.0;
      for (const Grid& ch : out.channels) sum += ch.at(c, r);
      if (sum > 0.0) {
        for (Grid& ch : out.channels) ch.at(c, r) /= sum;
      } else {
        for (Grid& ch : out.channels) ch.at(c, r) = 1.0 / n_fine;
      }
    }
  }
  return out;
}

/// Reproducibility record for one prior run: every parameter that shaped the
/// output, in a stable text form, plus an FNV-1a hash used to tag fused
/// channels downstream.
struct PriorManifest {
  std::string text;

  static std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
  }

  uint64_t hash() const {
    uint64_t h = UINT64_C(0xcbf29ce484222325);
    for (unsigned char ch : text) {
      h ^= ch;
      h *= UINT64_C(0x100000001b3);
    }
    return h;
  }

  std::string hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
  }
};

struct PriorConfig {
  const Grid* coarse = nullptr;
  std::string coarse_name = "coarse";
  CoOccurrenceMatrix cooccurrence;
  std::string cooccurrence_source = "matrix";
  double blur_sigma = 1.0;  // the reference setting: one pixel
  double epsilon = 1e-6;    // recorded; applied when the matrix was estimated here
  BoostSpec boosts;
};

struct PriorResult {
  PriorStack prior;
  PriorManifest manifest;
};

/// Full PROC-STACK prior function f(.): broadcast + blur, then boost masks
/// and renormalize. All masks must align with the coarse grid.
inline PriorResult generate_prior(const PriorConfig& config) {
  if (config.coarse == nullptr) throw parameter_error("generate_prior: missing coarse grid");
  if (!(config.blur_sigma > 0.0)) throw parameter_error("generate_prior: sigma must be > 0");
  for (const Boost& b : config.boosts)
    if (!b.mask.grid.same_geometry(*config.coarse))
      throw alignment_error("generate_prior: boost mask '" + b.source +
                            "' is not aligned with coarse grid '" + config.coarse_name + "'");

  PriorResult result;
  PriorStack broadcast = prior_from_coarse(*config.coarse, config.cooccurrence, config.blur_sigma);
  result.prior = boost_and_renormalize(broadcast, config.boosts);

  std::string m;
  m += "geofuse prior manifest v1\n";
  m += "coarse=" + config.coarse_name + "\n";
  m += "n_coarse=" + std::to_string(config.cooccurrence.n_coarse) + "\n";
  m += "n_fine=" + std::to_string(config.cooccurrence.n_fine) + "\n";
  m += "cooccurrence=" + config.cooccurrence_source + "\n";
  m += "epsilon=" + PriorManifest::format_value(config.epsilon) + "\n";
  m += "sigma=" + PriorManifest::format_value(config.blur_sigma) + "\n";
  m += "order=blur_then_boost\n";
  for (const Boost& b : config.boosts)
    m += "boost=" + b.source + " class=" + std::to_string(b.target_class) +
         " weight=" + PriorManifest::format_value(b.weight) + "\n";
  result.manifest.text = std::move(m);
  return result;
}

}  // namespace geofuse
