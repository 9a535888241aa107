#include <catch2/catch_amalgamated.hpp>

#include "geofuse/encoder_block.hpp"
#include "geofuse/location_encoder.hpp"
#include "geofuse/splitmix.hpp"
#include "geofuse/tokens.hpp"
#include "oracles.hpp"

using namespace geofuse;

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

Mat random_mat(size_t r, size_t c, SplitMix64& rng, double scale = 0.5) {
  Mat m(r, c);
  for (double& v : m.a) v = rng.next_normal() * scale;
  return m;
}

std::vector<double> random_vec(size_t n, SplitMix64& rng, double scale = 0.5) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_normal() * scale;
  return v;
}

EncoderBlockWeights random_block(size_t d, size_t hidden, uint64_t seed) {
  SplitMix64 rng(seed);
  EncoderBlockWeights w = EncoderBlockWeights::zeros(d, hidden);
  auto fill_vec = [&](std::vector<double>& v, double scale) {
    for (double& x : v) x = rng.next_normal() * scale;
  };
  auto fill_mat = [&](Mat& m, double scale) {
    for (double& x : m.a) x = rng.next_normal() * scale;
  };
  fill_vec(w.ln1_gamma, 0.5);
  for (double& x : w.ln1_gamma) x += 1.0;  // keep gains away from zero
  fill_vec(w.ln1_beta, 0.2);
  fill_mat(w.wq, 0.5);
  fill_mat(w.wk, 0.5);
  fill_mat(w.wv, 0.5);
  fill_mat(w.wo, 0.5);
  fill_vec(w.bq, 0.2);
  fill_vec(w.bk, 0.2);
  fill_vec(w.bv, 0.2);
  fill_vec(w.bo, 0.2);
  fill_vec(w.ln2_gamma, 0.5);
  for (double& x : w.ln2_gamma) x += 1.0;
  fill_vec(w.ln2_beta, 0.2);
  fill_mat(w.w1, 0.5);
  fill_vec(w.b1, 0.2);
  fill_mat(w.w2, 0.5);
  fill_vec(w.b2, 0.2);
  return w;
}

double loss_sum(const Mat& x, const EncoderBlockWeights& w) {
  Mat out = encoder_block_forward(x, w);
  double s = 0.0;
  for (double v : out.a) s += v;
  return s;
}

}  // namespace

TEST_CASE("location stub is frozen: identical inputs give identical bits") {
  auto a = encode_location_stub(48.2, 16.4, 7);
  auto b = encode_location_stub(48.2, 16.4, 7);
  REQUIRE(a == b);
  REQUIRE(a.size() == 256);

  StubLocationEncoder enc(7);
  REQUIRE(enc.frozen());
  REQUIRE(enc.encode(48.2, 16.4) == a);
  REQUIRE(enc.descriptor().find("seed=7") != std::string::npos);

  double norm = 0.0;
  for (double v : a) norm += v * v;
  REQUIRE(std::sqrt(norm) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("location stub: nearby coordinates embed nearby") {
  for (uint64_t seed : {0ull, 1ull, 42ull}) {
    auto a = encode_location_stub(48.2, 16.4, seed);
    auto b = encode_location_stub(48.2001, 16.4001, seed);
    REQUIRE(cosine(a, b) > 0.99);
  }
}

TEST_CASE("location stub: antipodal points decorrelate") {
  for (uint64_t seed : {0ull, 1ull, 42ull}) {
    auto a = encode_location_stub(48.2, 16.4, seed);
    auto b = encode_location_stub(-48.2, 16.4 - 180.0, seed);
    REQUIRE(cosine(a, b) < 0.5);
  }
}

TEST_CASE("location stub rejects out-of-range coordinates") {
  REQUIRE_THROWS_AS(encode_location_stub(91.0, 0.0, 0), parameter_error);
  REQUIRE_THROWS_AS(encode_location_stub(0.0, -180.0, 0), parameter_error);
  REQUIRE_THROWS_AS(encode_location_stub(0.0, 181.0, 0), parameter_error);
  REQUIRE_NOTHROW(encode_location_stub(90.0, 180.0, 0));
}

TEST_CASE("projection: identity block and pure bias") {
  Projection ident;
  ident.matrix = Mat::identity(256);
  ident.bias.assign(256, 0.0);
  std::vector<double> v(256);
  for (size_t i = 0; i < 256; ++i) v[i] = static_cast<double>(i) * 0.25;
  REQUIRE(project_embedding(v, ident) == v);

  Projection biased;
  biased.matrix = Mat(3, 256);
  biased.bias = {1.5, -2.0, 0.25};
  REQUIRE(project_embedding(v, biased) == biased.bias);
}

TEST_CASE("projection matches the naive matvec oracle") {
  SplitMix64 rng(8);
  Projection proj;
  proj.matrix = random_mat(768, 256, rng);
  proj.bias = random_vec(768, rng);
  std::vector<double> v = random_vec(256, rng);

  auto expected = oracle::matvec(proj.matrix.a, 768, 256, v, proj.bias);
  auto got = project_embedding(v, proj);
  for (size_t i = 0; i < 768; ++i) REQUIRE(got[i] == Catch::Approx(expected[i]).margin(1e-6));

  std::vector<double> wrong(255);
  REQUIRE_THROWS_AS(project_embedding(wrong, proj), shape_error);
}

TEST_CASE("patchify: the 120x120 10-band layout gives 225 tokens") {
  std::vector<Mat> image(10, Mat(120, 120));
  SplitMix64 rng(4);
  for (Mat& ch : image)
    for (double& v : ch.a) v = rng.next_double();
  PatchEmbed embed;
  embed.weights = random_mat(16, 10 * 8 * 8, rng, 0.05);
  embed.bias = random_vec(16, rng, 0.05);
  Mat tokens = patchify(image, 8, embed);
  REQUIRE(tokens.rows == 225);
  REQUIRE(tokens.cols == 16);
}

TEST_CASE("patchify: tiny cases") {
  std::vector<Mat> image(1, Mat(2, 2));
  image[0].a = {1.0, 2.0, 3.0, 4.0};

  PatchEmbed single;
  single.weights = Mat(3, 4);
  single.weights(0, 0) = 1.0;  // picks pixel (0,0) of the patch
  single.bias = {0.0, 0.0, 0.0};
  Mat one = patchify(image, 2, single);
  REQUIRE(one.rows == 1);
  REQUIRE(one(0, 0) == 1.0);

  PatchEmbed ident;
  ident.weights = Mat::identity(1);
  Mat pixels = patchify(image, 1, ident);
  REQUIRE(pixels.rows == 4);
  REQUIRE(pixels(0, 0) == 1.0);
  REQUIRE(pixels(1, 0) == 2.0);  // raster order over the patch grid
  REQUIRE(pixels(2, 0) == 3.0);
  REQUIRE(pixels(3, 0) == 4.0);

  REQUIRE_THROWS_AS(patchify(image, 3, single), shape_error);
}

TEST_CASE("token sequence: rows are verbatim with a zero positional table") {
  size_t n = 4, d = 3;
  SplitMix64 rng(12);
  Mat patches = random_mat(n, d, rng);
  std::vector<double> cls = random_vec(d, rng);
  std::vector<double> loc256 = random_vec(256, rng);
  Projection proj;
  proj.matrix = random_mat(d, 256, rng, 0.1);
  proj.bias = random_vec(d, rng, 0.1);
  Mat pos_embed(n + 2, d);  // zeros

  TokenSequence seq = build_token_sequence(patches, cls, &loc256, &proj, Mat(0, 0), pos_embed);
  REQUIRE(seq.length() == n + 2);
  auto loc_token = project_embedding(loc256, proj);
  for (size_t j = 0; j < d; ++j) {
    REQUIRE(seq.rows(0, j) == cls[j]);
    REQUIRE(seq.rows(1, j) == loc_token[j]);
    for (size_t i = 0; i < n; ++i) REQUIRE(seq.rows(2 + i, j) == patches(i, j));
  }
  REQUIRE(seq.positional_ids[0] == 0);
  REQUIRE(seq.positional_ids[1] == n + 1);
  for (size_t i = 0; i < n; ++i) REQUIRE(seq.positional_ids[2 + i] == i + 1);
}

TEST_CASE("token sequence: vanilla mode is [cls; patches] with ids 0..N") {
  size_t n = 5, d = 4;
  SplitMix64 rng(13);
  Mat patches = random_mat(n, d, rng);
  std::vector<double> cls = random_vec(d, rng);
  Mat pos_embed = random_mat(n + 1, d, rng);

  TokenSequence seq = build_token_sequence(patches, cls, nullptr, nullptr, Mat(0, 0), pos_embed);
  REQUIRE(seq.length() == n + 1);
  REQUIRE_FALSE(seq.has_location);
  for (size_t i = 0; i < seq.length(); ++i) REQUIRE(seq.positional_ids[i] == i);
  for (size_t j = 0; j < d; ++j)
    REQUIRE(seq.rows(0, j) == cls[j] + pos_embed(0, j));
}

TEST_CASE("token sequence: sequence-length and positional-id laws") {
  SplitMix64 rng(14);
  size_t d = 3;
  for (size_t n = 1; n <= 16; ++n) {
    for (size_t r = 0; r <= 3; ++r) {
      Mat patches = random_mat(n, d, rng);
      std::vector<double> cls = random_vec(d, rng);
      std::vector<double> loc256 = random_vec(256, rng);
      Projection proj;
      proj.matrix = random_mat(d, 256, rng, 0.05);
      proj.bias.assign(d, 0.0);
      Mat registers = make_register_tokens(r, d, 99 + r);
      Mat pos_embed = random_mat(n + 2 + r, d, rng);

      TokenSequence seq = build_token_sequence(patches, cls, &loc256, &proj, registers, pos_embed);
      REQUIRE(seq.length() == n + 2 + r);
      REQUIRE(seq.positional_ids[1] == n + 1);  // loc id ignores registers
      for (size_t k = 0; k < r; ++k)
        REQUIRE(seq.positional_ids[2 + n + k] == n + 2 + k);
    }
  }
}

TEST_CASE("token sequence: the 225-patch, one-register layout") {
  size_t n = 225, d = 8, r = 1;
  SplitMix64 rng(15);
  Mat patches = random_mat(n, d, rng, 0.1);
  std::vector<double> cls = random_vec(d, rng, 0.1);
  std::vector<double> loc256 = random_vec(256, rng, 0.1);
  Projection proj;
  proj.matrix = random_mat(d, 256, rng, 0.02);
  proj.bias.assign(d, 0.0);
  TokenSequence seq = build_token_sequence(patches, cls, &loc256, &proj,
                                           make_register_tokens(r, d, 1), random_mat(n + 3, d, rng));
  REQUIRE(seq.length() == 228);
  REQUIRE(seq.positional_ids[1] == 226);
}

TEST_CASE("token sequence: undersized positional table is a shape error") {
  size_t n = 4, d = 2;
  SplitMix64 rng(16);
  Mat patches = random_mat(n, d, rng);
  std::vector<double> cls = random_vec(d, rng);
  std::vector<double> loc256 = random_vec(256, rng);
  Projection proj;
  proj.matrix = random_mat(d, 256, rng);
  proj.bias.assign(d, 0.0);
  Mat too_short(n + 1, d);
  REQUIRE_THROWS_AS(build_token_sequence(patches, cls, &loc256, &proj, Mat(0, 0), too_short),
                    shape_error);
}

TEST_CASE("token sequence: permuting patches permutes z0 rows identically") {
  size_t n = 6, d = 4;
  SplitMix64 rng(17);
  Mat patches = random_mat(n, d, rng);
  std::vector<double> cls = random_vec(d, rng);
  Mat pos_embed = random_mat(n + 1, d, rng);
  TokenSequence base = build_token_sequence(patches, cls, nullptr, nullptr, Mat(0, 0), pos_embed);

  // swap patches 1 and 4 together with their positional rows
  std::vector<size_t> perm = {0, 4, 2, 3, 1, 5};
  Mat patches_p(n, d);
  Mat pos_p = pos_embed;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) {
      patches_p(i, j) = patches(perm[i], j);
      pos_p(1 + i, j) = pos_embed(1 + perm[i], j);
    }
  TokenSequence permuted = build_token_sequence(patches_p, cls, nullptr, nullptr, Mat(0, 0), pos_p);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j)
      REQUIRE(permuted.rows(1 + i, j) == base.rows(1 + perm[i], j));
}

TEST_CASE("encoder block: zero weights reduce to the residual identity") {
  Mat x(3, 4);
  SplitMix64 rng(18);
  for (double& v : x.a) v = rng.next_normal();
  EncoderBlockWeights w = EncoderBlockWeights::zeros(4, 8);
  Mat out = encoder_block_forward(x, w);
  for (size_t i = 0; i < x.a.size(); ++i) REQUIRE(out.a[i] == Catch::Approx(x.a[i]).margin(1e-15));
}

TEST_CASE("encoder block: matches a straight-line dense oracle") {
  // An independent re-derivation of the same block, written without the
  // library's helpers: explicit loops, no Mat type.
  size_t t_count = 3, d = 4, hid = 5;
  EncoderBlockWeights w = random_block(d, hid, 21);
  Mat x(t_count, d);
  SplitMix64 rng(22);
  for (double& v : x.a) v = rng.next_normal();

  auto ln = [&](const std::vector<double>& row, const std::vector<double>& gamma,
                const std::vector<double>& beta) {
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(row.size());
    std::vector<double> out(row.size());
    for (size_t j = 0; j < row.size(); ++j)
      out[j] = gamma[j] * (row[j] - mean) / std::sqrt(var + kLayerNormEps) + beta[j];
    return out;
  };
  auto affine = [&](const std::vector<double>& row, const Mat& m, const std::vector<double>& b) {
    std::vector<double> out(m.cols, 0.0);
    for (size_t j = 0; j < m.cols; ++j) {
      for (size_t k = 0; k < m.rows; ++k) out[j] += row[k] * m(k, j);
      out[j] += b[j];
    }
    return out;
  };

  std::vector<std::vector<double>> n1(t_count), q(t_count), k(t_count), v(t_count);
  for (size_t t = 0; t < t_count; ++t) {
    std::vector<double> row(x.a.begin() + static_cast<std::ptrdiff_t>(t * d),
                            x.a.begin() + static_cast<std::ptrdiff_t>((t + 1) * d));
    n1[t] = ln(row, w.ln1_gamma, w.ln1_beta);
    q[t] = affine(n1[t], w.wq, w.bq);
    k[t] = affine(n1[t], w.wk, w.bk);
    v[t] = affine(n1[t], w.wv, w.bv);
  }
  std::vector<std::vector<double>> attn(t_count, std::vector<double>(t_count));
  for (size_t i = 0; i < t_count; ++i) {
    double denom = 0.0;
    for (size_t j = 0; j < t_count; ++j) {
      double s = 0.0;
      for (size_t kk = 0; kk < d; ++kk) s += q[i][kk] * k[j][kk];
      attn[i][j] = std::exp(s / std::sqrt(static_cast<double>(d)));
      denom += attn[i][j];
    }
    for (size_t j = 0; j < t_count; ++j) attn[i][j] /= denom;
  }
  std::vector<std::vector<double>> expected(t_count, std::vector<double>(d));
  for (size_t i = 0; i < t_count; ++i) {
    std::vector<double> ctx(d, 0.0);
    for (size_t j = 0; j < t_count; ++j)
      for (size_t kk = 0; kk < d; ++kk) ctx[kk] += attn[i][j] * v[j][kk];
    std::vector<double> attn_out = affine(ctx, w.wo, w.bo);
    std::vector<double> h(d);
    for (size_t kk = 0; kk < d; ++kk) h[kk] = x(i, kk) + attn_out[kk];
    std::vector<double> n2 = ln(h, w.ln2_gamma, w.ln2_beta);
    std::vector<double> pre = affine(n2, w.w1, w.b1);
    std::vector<double> act(hid);
    for (size_t kk = 0; kk < hid; ++kk)
      act[kk] = 0.5 * pre[kk] * (1.0 + std::erf(pre[kk] / std::sqrt(2.0)));
    std::vector<double> mlp = affine(act, w.w2, w.b2);
    for (size_t kk = 0; kk < d; ++kk) expected[i][kk] = h[kk] + mlp[kk];
  }

  Mat out = encoder_block_forward(x, w);
  for (size_t i = 0; i < t_count; ++i)
    for (size_t j = 0; j < d; ++j)
      REQUIRE(out(i, j) == Catch::Approx(expected[i][j]).margin(1e-6));
}

TEST_CASE("encoder block: attention rows are a softmax") {
  EncoderBlockWeights w = random_block(4, 6, 30);
  Mat x(5, 4);
  SplitMix64 rng(31);
  for (double& v : x.a) v = rng.next_normal();
  EncoderBlockTrace tr = encoder_block_forward_traced(x, w);
  for (size_t i = 0; i < 5; ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < 5; ++j) {
      REQUIRE(tr.attention(i, j) >= 0.0);
      sum += tr.attention(i, j);
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("encoder block: input validation") {
  EncoderBlockWeights w = random_block(4, 6, 32);
  Mat wrong(3, 5);
  REQUIRE_THROWS_AS(encoder_block_forward(wrong, w), shape_error);
  Mat bad(3, 4);
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(encoder_block_forward(bad, w), data_error);
}

TEST_CASE("encoder block: hand-derived backward matches central finite differences") {
  const size_t t_count = 3, d = 4, hid = 4;
  EncoderBlockWeights w = random_block(d, hid, 1234);
  Mat x(t_count, d);
  SplitMix64 rng(4321);
  for (double& v : x.a) v = rng.next_normal();

  EncoderBlockGradients analytic = encoder_block_backward_sum(x, w);

  const double h = 1e-4;
  auto check = [&](const char* name, double* param, double analytic_grad) {
    double saved = *param;
    *param = saved + h;
    double up = loss_sum(x, w);
    *param = saved - h;
    double down = loss_sum(x, w);
    *param = saved;
    double numeric = (up - down) / (2.0 * h);
    double err = std::abs(analytic_grad - numeric);
    double scale = std::max({std::abs(analytic_grad), std::abs(numeric), 1.0});
    INFO(name << ": analytic=" << analytic_grad << " numeric=" << numeric);
    REQUIRE(err <= 1e-4 * scale);
  };

  auto check_vec = [&](const char* name, std::vector<double>& param, std::vector<double>& grad) {
    for (size_t i = 0; i < param.size(); ++i) check(name, &param[i], grad[i]);
  };
  auto check_mat = [&](const char* name, Mat& param, Mat& grad) {
    for (size_t i = 0; i < param.a.size(); ++i) check(name, &param.a[i], grad.a[i]);
  };

  check_vec("ln1_gamma", w.ln1_gamma, analytic.ln1_gamma);
  check_vec("ln1_beta", w.ln1_beta, analytic.ln1_beta);
  check_mat("wq", w.wq, analytic.wq);
  check_vec("bq", w.bq, analytic.bq);
  check_mat("wk", w.wk, analytic.wk);
  check_vec("bk", w.bk, analytic.bk);
  check_mat("wv", w.wv, analytic.wv);
  check_vec("bv", w.bv, analytic.bv);
  check_mat("wo", w.wo, analytic.wo);
  check_vec("bo", w.bo, analytic.bo);
  check_vec("ln2_gamma", w.ln2_gamma, analytic.ln2_gamma);
  check_vec("ln2_beta", w.ln2_beta, analytic.ln2_beta);
  check_mat("w1", w.w1, analytic.w1);
  check_vec("b1", w.b1, analytic.b1);
  check_mat("w2", w.w2, analytic.w2);
  check_vec("b2", w.b2, analytic.b2);
}

TEST_CASE("register tokens are seed-stable") {
  Mat a = make_register_tokens(3, 8, 5);
  Mat b = make_register_tokens(3, 8, 5);
  Mat c = make_register_tokens(3, 8, 6);
  REQUIRE(a.a == b.a);
  REQUIRE(a.a != c.a);
}

TEST_CASE("frozen encoder makes the token sequence referentially transparent") {
  StubLocationEncoder enc(11);
  size_t n = 3, d = 5;
  SplitMix64 rng(19);
  Mat patches = random_mat(n, d, rng);
  std::vector<double> cls = random_vec(d, rng);
  Projection proj;
  proj.matrix = random_mat(d, 256, rng, 0.05);
  proj.bias.assign(d, 0.0);
  Mat pos_embed = random_mat(n + 2, d, rng);

  auto build = [&] {
    std::vector<double> loc = enc.encode(-33.5, 151.25);
    return build_token_sequence(patches, cls, &loc, &proj, Mat(0, 0), pos_embed);
  };
  TokenSequence a = build();
  TokenSequence b = build();
  REQUIRE(a.rows.a == b.rows.a);
  REQUIRE(a.positional_ids == b.positional_ids);
  REQUIRE(a.pos_embed.a == pos_embed.a);  // sequence carries its table
}
