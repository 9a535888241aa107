#pragma once

#include <string>
#include <vector>

#include "geofuse/linalg.hpp"
#include "geofuse/location_encoder.hpp"
#include "geofuse/splitmix.hpp"

namespace geofuse {

/// Linear 256 -> D map that turns a location embedding into a token.
struct Projection {
  Mat matrix;                // D x 256
  std::vector<double> bias;  // D

  size_t out_dim() const { return matrix.rows; }

  void validate() const {
    if (matrix.cols != static_cast<size_t>(kLocationEmbeddingDim))
      throw shape_error("projection: matrix must have 256 columns");
    if (matrix.rows == 0) throw shape_error("projection: output dimension must be positive");
    if (bias.size() != matrix.rows) throw shape_error("projection: bias length != output dim");
    for (double v : matrix.a)
      if (!std::isfinite(v)) throw data_error("projection: non-finite matrix entry");
    for (double v : bias)
      if (!std::isfinite(v)) throw data_error("projection: non-finite bias entry");
  }
};

inline std::vector<double> project_embedding(const std::vector<double>& vec, const Projection& proj) {
  if (vec.size() != proj.matrix.cols)
    throw shape_error("project_embedding: vector length " + std::to_string(vec.size()) +
                      " != matrix columns " + std::to_string(proj.matrix.cols));
  std::vector<double> out(proj.matrix.rows);
  for (size_t i = 0; i < proj.matrix.rows; ++i) {
    double s = proj.bias.empty() ? 0.0 : proj.bias[i];
    for (size_t j = 0; j < proj.matrix.cols; ++j) s += proj.matrix(i, j) * vec[j];
    out[i] = s;
  }
  return out;
}

/// Patch embedding weights: each token is embed * flatten(patch) + bias,
/// where a patch flattens channel-major (c, then row, then col).
struct PatchEmbed {
  Mat weights;               // D x (C * patch * patch)
  std::vector<double> bias;  // D
};

/// Splits a C x H x W image into non-overlapping `patch`-sized tiles in
/// raster-scan order and maps each through the linear patch embedding.
/// Returns an N x D token matrix with N = (H/patch) * (W/patch).
inline Mat patchify(const std::vector<Mat>& image_channels, int patch, const PatchEmbed& embed) {
  if (image_channels.empty()) throw shape_error("patchify: image has no channels");
  if (patch <= 0) throw parameter_error("patchify: patch size must be positive");
  size_t h = image_channels[0].rows;
  size_t w = image_channels[0].cols;
  for (const Mat& ch : image_channels)
    if (ch.rows != h || ch.cols != w) throw shape_error("patchify: channels differ in shape");
  if (h % patch != 0 || w % patch != 0)
    throw shape_error("patchify: image dimensions must be divisible by the patch size");

  size_t c_count = image_channels.size();
  size_t flat = c_count * patch * patch;
  if (embed.weights.cols != flat)
    throw shape_error("patchify: embedding expects " + std::to_string(embed.weights.cols) +
                      " inputs, patch provides " + std::to_string(flat));
  size_t d = embed.weights.rows;
  if (!embed.bias.empty() && embed.bias.size() != d)
    throw shape_error("patchify: bias length != embedding dim");

  size_t ph = h / patch, pw = w / patch;
  Mat tokens(ph * pw, d);
  std::vector<double> flat_patch(flat);
  for (size_t py = 0; py < ph; ++py) {
    for (size_t px = 0; px < pw; ++px) {
      size_t k = 0;
      for (size_t c = 0; c < c_count; ++c)
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx)
            flat_patch[k++] = image_channels[c](py * patch + dy, px * patch + dx);
      size_t n = py * pw + px;
      for (size_t i = 0; i < d; ++i) {
        double s = embed.bias.empty() ? 0.0 : embed.bias[i];
        for (size_t j = 0; j < flat; ++j) s += embed.weights(i, j) * flat_patch[j];
        tokens(n, i) = s;
      }
    }
  }
  return tokens;
}

/// Ordered token matrix [cls; loc; patches...; registers...] with learnable
/// positional embeddings already added (z_0 = X_tokens + E_pos). Positional
/// ids: cls = 0, patches = 1..N, loc = N+1 regardless of register count,
/// registers = N+2 onward.
struct TokenSequence {
  Mat rows;                          // (N + 1 + has_loc + R) x D, pos-embedded
  std::vector<size_t> positional_ids;
  Mat pos_embed;                     // the table the ids index into
  size_t n_patches = 0;
  size_t n_registers = 0;
  bool has_location = false;

  size_t length() const { return rows.rows; }
  size_t dim() const { return rows.cols; }
};

/// Seeded unit-variance initializer for register tokens.
inline Mat make_register_tokens(size_t count, size_t dim, uint64_t seed) {
  SplitMix64 rng(seed);
  Mat regs(count, dim);
  for (double& v : regs.a) v = rng.next_normal();
  return regs;
}

/// Assembles z_0 for one image. Passing loc256 = nullptr gives the vanilla
/// sequence [cls; patches] with ids 0..N.
inline TokenSequence build_token_sequence(const Mat& patches, const std::vector<double>& cls,
                                          const std::vector<double>* loc256,
                                          const Projection* proj, const Mat& registers,
                                          const Mat& pos_embed) {
  size_t n = patches.rows;
  size_t d = patches.cols;
  if (cls.size() != d) throw shape_error("build_token_sequence: cls token dim != patch dim");
  if (registers.rows > 0 && registers.cols != d)
    throw shape_error("build_token_sequence: register dim != patch dim");

  bool has_loc = loc256 != nullptr;
  std::vector<double> loc_token;
  if (has_loc) {
    if (proj == nullptr) throw parameter_error("build_token_sequence: location given without projection");
    proj->validate();
    if (proj->out_dim() != d) throw shape_error("build_token_sequence: projection output dim != patch dim");
    loc_token = project_embedding(*loc256, *proj);
  }

  size_t r = registers.rows;
  size_t len = n + 1 + (has_loc ? 1 : 0) + r;
  TokenSequence seq;
  seq.n_patches = n;
  seq.n_registers = r;
  seq.has_location = has_loc;
  seq.rows = Mat(len, d);
  seq.positional_ids.resize(len);

  size_t row = 0;
  auto emit = [&](const double* src, size_t pos_id) {
    seq.positional_ids[row] = pos_id;
    for (size_t j = 0; j < d; ++j) seq.rows(row, j) = src[j];
    ++row;
  };
  emit(cls.data(), 0);
  if (has_loc) emit(loc_token.data(), n + 1);  // the auxiliary token's id is N+1
  for (size_t i = 0; i < n; ++i) emit(&patches.a[i * d], i + 1);
  for (size_t i = 0; i < r; ++i) emit(&registers.a[i * d], n + 2 + i);

  size_t max_id = 0;
  for (size_t id : seq.positional_ids) max_id = std::max(max_id, id);
  if (pos_embed.rows <= max_id || pos_embed.cols != d)
    throw shape_error("build_token_sequence: positional table needs at least " +
                      std::to_string(max_id + 1) + " rows of dim " + std::to_string(d));
  for (size_t i = 0; i < len; ++i)
    for (size_t j = 0; j < d; ++j) seq.rows(i, j) += pos_embed(seq.positional_ids[i], j);
  seq.pos_embed = pos_embed;
  return seq;
}

}  // namespace geofuse
