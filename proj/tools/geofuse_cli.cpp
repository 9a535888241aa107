// geofuse: command-line front end for the fusion pipeline. Each subcommand is
// a thin wrapper over one library module; outputs are written atomically and
// every run is reproducible from its inputs and flags.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geofuse/geofuse.hpp"

namespace fs = std::filesystem;
using namespace geofuse;

namespace {

void note_output(const fs::path& path, const std::string& what) {
  std::cout << "wrote " << path.string() << " (" << what << ")\n";
}

std::vector<double> read_value_list(const fs::path& path) {
  std::string text = read_file(path);
  std::vector<double> out;
  for (auto line : detail::split_lines(text)) {
    for (auto field : detail::split_fields(line)) {
      // allow comma-separated too
      std::string buf(field);
      for (char& ch : buf)
        if (ch == ',') ch = ' ';
      for (auto sub : detail::split_fields(buf)) {
        double v;
        if (!detail::parse_double(sub, v))
          throw parse_error(path.string() + ": bad value '" + std::string(sub) + "'");
        out.push_back(v);
      }
    }
  }
  return out;
}

Mat read_csv_matrix(const fs::path& path) {
  std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  for (auto line : detail::split_lines(text)) {
    if (line.empty()) continue;
    std::string buf(line);
    for (char& ch : buf)
      if (ch == ',') ch = ' ';
    auto fields = detail::split_fields(buf);
    if (fields.empty()) continue;
    std::vector<double> row;
    for (auto f : fields) {
      double v;
      if (!detail::parse_double(f, v))
        throw parse_error(path.string() + ": bad value '" + std::string(f) + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw parse_error(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw parse_error(path.string() + ": empty matrix");
  Mat m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

Mat seeded_matrix(size_t rows, size_t cols, SplitMix64& rng, double scale) {
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.next_normal() * scale;
  return m;
}

struct GlobalFlags {
  uint64_t seed = 0;
  std::string out;
  std::string config;
};

GeoTransform transform_like(const Grid& g) { return g.transform; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geofuse: geographic raster/vector fusion pipeline"};
  app.require_subcommand(1);

  GlobalFlags globals;
  app.add_option("--seed", globals.seed, "seed for seeded operations");
  app.add_option("--out", globals.out, "output path");
  app.add_option("--config", globals.config, "pipeline config path");

  // ------------------------------------------------------------- rasterize
  auto* rasterize_cmd = app.add_subcommand("rasterize", "burn GeoJSON features into a class grid");
  rasterize_cmd->fallthrough();
  std::string ras_geojson, ras_classmap, ras_like;
  rasterize_cmd->add_option("--geojson", ras_geojson, "GeoJSON FeatureCollection")->required();
  rasterize_cmd->add_option("--classmap", ras_classmap, "class map config")->required();
  rasterize_cmd->add_option("--like", ras_like, "ascii grid defining the target geometry")->required();
  rasterize_cmd->callback([&] {
    if (globals.out.empty()) throw parameter_error("rasterize: --out is required");
    VectorLayer layer = parse_geojson(read_file(ras_geojson));
    ClassMap cm = parse_class_map(read_file(ras_classmap));
    Grid tmpl = read_ascii_grid(read_file(ras_like));
    Grid out = rasterize_classes(layer, cm, transform_like(tmpl), tmpl.width, tmpl.height);
    write_file_atomic(globals.out, write_ascii_grid(out));
    note_output(globals.out, std::to_string(out.width) + "x" + std::to_string(out.height) + " class grid");
  });

  // ------------------------------------------------------------------- rgb
  auto* rgb_cmd = app.add_subcommand("rgb", "map a class grid to smoothed RGB channels");
  rgb_cmd->fallthrough();
  std::string rgb_classes, rgb_classmap;
  double rgb_sigma = 0.0;
  rgb_cmd->add_option("--classes", rgb_classes, "categorical ascii grid")->required();
  rgb_cmd->add_option("--classmap", rgb_classmap, "class map config")->required();
  rgb_cmd->add_option("--sigma", rgb_sigma, "smoothing sigma in pixels (0 = none)");
  rgb_cmd->callback([&] {
    if (globals.out.empty()) throw parameter_error("rgb: --out is required");
    Grid classes = read_ascii_grid(read_file(rgb_classes), GridKind::categorical);
    ClassMap cm = parse_class_map(read_file(rgb_classmap));
    std::optional<double> sigma;
    if (rgb_sigma > 0.0) sigma = rgb_sigma;
    auto channels = to_rgb_raster(classes, cm, sigma);
    FusedTensor tensor;
    const char* names[3] = {"r", "g", "b"};
    for (int i = 0; i < 3; ++i) {
      tensor.channels.push_back(channels[i]);
      tensor.provenance.push_back({std::string("rgb[") + names[i] + "]", "categorical_rgb"});
    }
    write_file_atomic(globals.out, write_gft(tensor));
    note_output(globals.out, "3-channel rgb raster");
  });

  // ----------------------------------------------------------------- prior
  auto* prior_cmd = app.add_subcommand("prior", "generate the land-cover prior stack");
  prior_cmd->fallthrough();
  prior_cmd->callback([&] {
    if (globals.config.empty()) throw parameter_error("prior: --config is required");
    PipelineConfig cfg = parse_pipeline_config(read_file(globals.config), globals.config);
    fs::path base = fs::path(globals.config).parent_path();
    PipelineLoader loader(cfg, base);
    LoadedPipeline loaded = loader.load_for_prior();
    // Config-declared outputs are config-relative; --out is cwd-relative.
    fs::path out = !globals.out.empty()
                       ? fs::path(globals.out)
                       : (loaded.prior_out ? detail::resolve(base, *loaded.prior_out) : fs::path());
    if (out.empty()) throw parameter_error("prior: no output path (--out or [prior] out=)");

    const PriorResult& result = *loaded.prior;
    FusedTensor tensor;
    std::string hash = result.manifest.hash_hex();
    for (int f = 0; f < result.prior.n_fine(); ++f) {
      tensor.channels.push_back(result.prior.channels[f]);
      tensor.provenance.push_back({"prior[" + std::to_string(f) + "] manifest=" + hash, "identity"});
    }
    write_file_atomic(out, write_gft(tensor));
    note_output(out, std::to_string(result.prior.n_fine()) + "-channel prior, " +
                         std::to_string(result.prior.width()) + "x" +
                         std::to_string(result.prior.height()));
    fs::path manifest_path = out;
    manifest_path += ".manifest";
    write_file_atomic(manifest_path, result.manifest.text);
    note_output(manifest_path, "manifest " + hash);
  });

  // ----------------------------------------------------------------- stack
  auto* stack_cmd = app.add_subcommand("stack", "assemble a fused tensor per config");
  stack_cmd->fallthrough();
  stack_cmd->callback([&] {
    if (globals.config.empty()) throw parameter_error("stack: --config is required");
    PipelineConfig cfg = parse_pipeline_config(read_file(globals.config), globals.config);
    fs::path base = fs::path(globals.config).parent_path();
    PipelineLoader loader(cfg, base);
    LoadedPipeline loaded = loader.load();
    if (!loaded.stacked) throw parameter_error("stack: config has no [stack] section");
    fs::path out = !globals.out.empty()
                       ? fs::path(globals.out)
                       : (loaded.stack_out ? detail::resolve(base, *loaded.stack_out) : fs::path());
    if (out.empty()) throw parameter_error("stack: no output path (--out or [stack] out=)");
    write_file_atomic(out, write_gft(*loaded.stacked));
    note_output(out, std::to_string(loaded.stacked->channel_count()) + "-channel tensor, " +
                         std::to_string(loaded.stacked->width()) + "x" +
                         std::to_string(loaded.stacked->height()));
  });

  // ---------------------------------------------------------------- tokens
  auto* tokens_cmd = app.add_subcommand("tokens", "build a ViT token sequence from an image tensor");
  tokens_cmd->fallthrough();
  std::string tok_image, tok_proj;
  int tok_patch = 8, tok_dim = 384, tok_registers = 0;
  double tok_lat = 0.0, tok_lon = 0.0;
  bool tok_has_loc = false;
  tokens_cmd->add_option("--image", tok_image, "input image tensor (GFT)")->required();
  tokens_cmd->add_option("--patch", tok_patch, "patch size in pixels");
  tokens_cmd->add_option("--dim", tok_dim, "token dimension D");
  tokens_cmd->add_option("--registers", tok_registers, "number of register tokens");
  auto* lat_opt = tokens_cmd->add_option("--lat", tok_lat, "latitude for the location token");
  tokens_cmd->add_option("--lon", tok_lon, "longitude for the location token")->needs(lat_opt);
  tokens_cmd->add_option("--proj", tok_proj, "projection weight blob (GFT); seeded when absent");
  tokens_cmd->callback([&] {
    if (globals.out.empty()) throw parameter_error("tokens: --out is required");
    tok_has_loc = lat_opt->count() > 0;
    FusedTensor image = read_gft(read_file(tok_image));
    std::vector<Mat> channels;
    for (const Grid& g : image.channels) {
      Mat m(static_cast<size_t>(g.height), static_cast<size_t>(g.width));
      m.a.assign(g.data.begin(), g.data.end());
      channels.push_back(std::move(m));
    }
    size_t d = static_cast<size_t>(tok_dim);
    size_t flat = channels.size() * tok_patch * tok_patch;

    SplitMix64 rng(globals.seed);
    PatchEmbed embed;
    embed.weights = seeded_matrix(d, flat, rng, 1.0 / std::sqrt(static_cast<double>(flat)));
    embed.bias.assign(d, 0.0);
    Mat patches = patchify(channels, tok_patch, embed);
    size_t n = patches.rows;

    std::vector<double> cls(d);
    for (double& v : cls) v = rng.next_normal() * 0.02;
    Mat pos_embed = seeded_matrix(n + 2 + static_cast<size_t>(tok_registers), d, rng, 0.02);
    Mat registers = make_register_tokens(static_cast<size_t>(tok_registers), d, globals.seed + 1);

    std::optional<std::vector<double>> loc;
    Projection proj;
    if (tok_has_loc) {
      loc = encode_location_stub(tok_lat, tok_lon, globals.seed);
      if (!tok_proj.empty()) {
        proj.matrix = read_weight_blob(read_file(tok_proj));
        proj.bias.assign(proj.matrix.rows, 0.0);
      } else {
        proj.matrix = seeded_matrix(d, kLocationEmbeddingDim, rng, 1.0 / 16.0);
        proj.bias.assign(d, 0.0);
      }
    }

    TokenSequence seq = build_token_sequence(patches, cls, loc ? &*loc : nullptr,
                                             loc ? &proj : nullptr, registers, pos_embed);
    std::string ids = "z0 n=" + std::to_string(seq.n_patches) +
                      " registers=" + std::to_string(seq.n_registers) +
                      " loc=" + (seq.has_location ? "1" : "0") +
                      " seed=" + std::to_string(globals.seed);
    write_file_atomic(globals.out, write_weight_blob(seq.rows, ids));
    note_output(globals.out, std::to_string(seq.length()) + " tokens of dim " + std::to_string(d));
  });

  // --------------------------------------------------------------- analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "embedding analytics");
  analyze_cmd->require_subcommand(1);
  analyze_cmd->fallthrough();

  auto* cosine_cmd = analyze_cmd->add_subcommand("cosine", "pairwise cosine similarity of group means");
  cosine_cmd->fallthrough();
  std::string cos_embeddings;
  cosine_cmd->add_option("--embeddings", cos_embeddings, "embedding CSV")->required();
  cosine_cmd->callback([&] {
    EmbeddingSet set = read_embedding_csv(read_file(cos_embeddings));
    GroupSimilarity sim = pairwise_cosine(set);
    std::string out = "group";
    for (const auto& g : sim.groups) out += "," + g;
    out += "\n";
    for (size_t i = 0; i < sim.groups.size(); ++i) {
      out += sim.groups[i];
      for (size_t j = 0; j < sim.groups.size(); ++j) out += "," + fmt(sim.matrix(i, j));
      out += "\n";
    }
    if (globals.out.empty()) {
      std::cout << out;
    } else {
      write_file_atomic(globals.out, out);
      note_output(globals.out, std::to_string(sim.groups.size()) + "x" +
                                   std::to_string(sim.groups.size()) + " similarity matrix");
    }
  });

  auto* distmap_cmd = analyze_cmd->add_subcommand("distmap", "cosine distance to a reference embedding");
  distmap_cmd->fallthrough();
  std::string dist_embeddings, dist_after;
  long dist_ref_row = -1;
  double dist_ref_lat = 0.0, dist_ref_lon = 0.0;
  distmap_cmd->add_option("--embeddings", dist_embeddings, "embedding CSV")->required();
  distmap_cmd->add_option("--after", dist_after, "second aligned CSV: emit |d_before - d_after|");
  distmap_cmd->add_option("--ref-row", dist_ref_row, "row index used as the reference");
  auto* ref_lat_opt = distmap_cmd->add_option("--ref-lat", dist_ref_lat, "reference latitude (stub-encoded)");
  distmap_cmd->add_option("--ref-lon", dist_ref_lon, "reference longitude")->needs(ref_lat_opt);
  distmap_cmd->callback([&] {
    EmbeddingSet set = read_embedding_csv(read_file(dist_embeddings));
    auto reference_for = [&](const EmbeddingSet& s) -> std::vector<double> {
      if (dist_ref_row >= 0) {
        if (static_cast<size_t>(dist_ref_row) >= s.rows.size())
          throw parameter_error("distmap: --ref-row out of range");
        return s.rows[static_cast<size_t>(dist_ref_row)].vec;
      }
      if (ref_lat_opt->count() == 0)
        throw parameter_error("distmap: need --ref-row or --ref-lat/--ref-lon");
      return encode_location_stub(dist_ref_lat, dist_ref_lon, globals.seed);
    };
    std::vector<double> values;
    if (dist_after.empty()) {
      values = cosine_distance_map(set, reference_for(set));
    } else {
      EmbeddingSet after = read_embedding_csv(read_file(dist_after));
      values = cosine_disagreement(set, after, reference_for(set), reference_for(after));
    }
    std::string out = dist_after.empty() ? "lat,lon,group,distance\n" : "lat,lon,group,disagreement\n";
    for (size_t i = 0; i < values.size(); ++i) {
      out += fmt(set.rows[i].lat);
      out += "," + fmt(set.rows[i].lon) + "," + set.rows[i].group + "," + fmt(values[i]) + "\n";
    }
    if (globals.out.empty()) {
      std::cout << out;
    } else {
      write_file_atomic(globals.out, out);
      note_output(globals.out, std::to_string(values.size()) + " rows");
    }
  });

  auto* pca_cmd = analyze_cmd->add_subcommand("pca", "project embeddings to RGB via top-3 PCA");
  pca_cmd->fallthrough();
  std::string pca_embeddings;
  pca_cmd->add_option("--embeddings", pca_embeddings, "embedding CSV")->required();
  pca_cmd->callback([&] {
    EmbeddingSet set = read_embedding_csv(read_file(pca_embeddings));
    PcaRgbResult rgb = pca_rgb(set);
    std::string out;
    if (rgb.degenerate) out += "# degenerate: rank < 3, missing components padded with 0.5\n";
    out += "lat,lon,group,r,g,b\n";
    for (size_t i = 0; i < set.rows.size(); ++i) {
      out += fmt(set.rows[i].lat);
      out += "," + fmt(set.rows[i].lon) + "," + set.rows[i].group;
      for (int c = 0; c < 3; ++c) out += "," + fmt(rgb.colors[i][c]);
      out += "\n";
    }
    if (globals.out.empty()) {
      std::cout << out;
    } else {
      write_file_atomic(globals.out, out);
      note_output(globals.out, std::to_string(set.rows.size()) + " rows");
    }
  });

  // ---------------------------------------------------------------- subset
  auto* subset_cmd = app.add_subcommand("subset", "seeded label-efficiency subset plan");
  subset_cmd->fallthrough();
  size_t subset_n = 0;
  double subset_fraction = 1.0;
  subset_cmd->add_option("--n", subset_n, "dataset size")->required();
  subset_cmd->add_option("--fraction", subset_fraction, "subset fraction in (0,1]")->required();
  subset_cmd->callback([&] {
    SubsetPlan plan = subset_sample(subset_n, subset_fraction, globals.seed);
    std::string csv = write_subset_csv(plan);
    if (globals.out.empty()) {
      std::cout << csv;
    } else {
      write_file_atomic(globals.out, csv);
      note_output(globals.out, std::to_string(plan.indices.size()) + "-row plan, epochs=" +
                                   std::to_string(plan.epochs));
    }
  });

  // ---------------------------------------------------------------- epochs
  auto* epochs_cmd = app.add_subcommand("epochs", "epoch count for a training fraction");
  epochs_cmd->fallthrough();
  double epochs_fraction = 1.0;
  epochs_cmd->add_option("--fraction", epochs_fraction, "training fraction in (0,1]")->required();
  epochs_cmd->callback([&] { std::cout << "epochs=" << epoch_schedule(epochs_fraction) << "\n"; });

  // --------------------------------------------------------------- metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "score predictions");
  metrics_cmd->require_subcommand(1);
  metrics_cmd->fallthrough();

  auto* seg_cmd = metrics_cmd->add_subcommand("seg", "segmentation IoU/Dice/accuracy");
  seg_cmd->fallthrough();
  std::string seg_pred, seg_truth, seg_csv;
  int seg_classes = 0;
  seg_cmd->add_option("--pred", seg_pred, "predicted class grid (ascii)")->required();
  seg_cmd->add_option("--truth", seg_truth, "ground-truth class grid (ascii)")->required();
  seg_cmd->add_option("--classes", seg_classes, "number of classes")->required();
  seg_cmd->add_option("--csv", seg_csv, "also write per-class CSV here");
  seg_cmd->callback([&] {
    Grid pred = read_ascii_grid(read_file(seg_pred), GridKind::categorical);
    Grid truth = read_ascii_grid(read_file(seg_truth), GridKind::categorical);
    SegmentationResult res = segmentation_metrics(pred, truth, seg_classes);
    std::string report = segmentation_report(res);
    if (globals.out.empty()) {
      std::cout << report;
    } else {
      write_file_atomic(globals.out, report);
      note_output(globals.out, "segmentation report");
    }
    if (!seg_csv.empty()) {
      write_file_atomic(seg_csv, segmentation_csv(res));
      note_output(seg_csv, "per-class csv");
    }
  });

  auto* reg_cmd = metrics_cmd->add_subcommand("reg", "regression R^2");
  reg_cmd->fallthrough();
  std::string reg_pred, reg_truth;
  reg_cmd->add_option("--pred", reg_pred, "predicted values, one per line")->required();
  reg_cmd->add_option("--truth", reg_truth, "true values, one per line")->required();
  reg_cmd->callback([&] {
    std::vector<double> pred = read_value_list(reg_pred);
    std::vector<double> truth = read_value_list(reg_truth);
    std::string report = "r_squared=" + fmt(r_squared(pred, truth)) + "\n";
    if (globals.out.empty()) {
      std::cout << report;
    } else {
      write_file_atomic(globals.out, report);
      note_output(globals.out, "regression report");
    }
  });

  auto* ml_cmd = metrics_cmd->add_subcommand("multilabel", "macro F1 and average precision");
  ml_cmd->fallthrough();
  std::string ml_scores, ml_truth, ml_csv;
  double ml_threshold = 0.5;
  ml_cmd->add_option("--scores", ml_scores, "score matrix CSV (n x L)")->required();
  ml_cmd->add_option("--truth", ml_truth, "binary truth matrix CSV (n x L)")->required();
  ml_cmd->add_option("--threshold", ml_threshold, "decision threshold for F1");
  ml_cmd->add_option("--csv", ml_csv, "also write per-label CSV here");
  ml_cmd->callback([&] {
    Mat scores = read_csv_matrix(ml_scores);
    Mat truth = read_csv_matrix(ml_truth);
    if (scores.rows != truth.rows || scores.cols != truth.cols)
      throw shape_error("metrics multilabel: score/truth shapes differ");
    std::vector<std::vector<double>> s(scores.rows);
    std::vector<std::vector<int>> t(truth.rows);
    for (size_t i = 0; i < scores.rows; ++i) {
      s[i].assign(scores.a.begin() + static_cast<std::ptrdiff_t>(i * scores.cols),
                  scores.a.begin() + static_cast<std::ptrdiff_t>((i + 1) * scores.cols));
      t[i].resize(truth.cols);
      for (size_t j = 0; j < truth.cols; ++j) t[i][j] = truth(i, j) != 0.0 ? 1 : 0;
    }
    MultiLabelResult res = multilabel_metrics(s, t, ml_threshold);
    std::string report = multilabel_report(res);
    if (globals.out.empty()) {
      std::cout << report;
    } else {
      write_file_atomic(globals.out, report);
      note_output(globals.out, "multilabel report");
    }
    if (!ml_csv.empty()) {
      write_file_atomic(ml_csv, multilabel_csv(res));
      note_output(ml_csv, "per-label csv");
    }
  });

  // ----------------------------------------------------------------- probe
  auto* probe_cmd = app.add_subcommand("probe", "closed-form ridge probe");
  probe_cmd->fallthrough();
  std::string probe_train_x, probe_train_y, probe_test_x, probe_test_y;
  double probe_lambda = 1e-2;
  bool probe_synthetic = false;
  int probe_seeds = 20, probe_n_train = 32, probe_n_test = 256;
  probe_cmd->add_option("--train-x", probe_train_x, "training feature matrix CSV");
  probe_cmd->add_option("--train-y", probe_train_y, "training targets, one per line");
  probe_cmd->add_option("--test-x", probe_test_x, "test feature matrix CSV");
  probe_cmd->add_option("--test-y", probe_test_y, "test targets, one per line");
  probe_cmd->add_option("--lambda", probe_lambda, "ridge strength (> 0)");
  probe_cmd->add_flag("--synthetic", probe_synthetic,
                      "run the synthetic stacked-vs-optical experiment instead of reading files");
  probe_cmd->add_option("--seeds", probe_seeds, "synthetic mode: number of seeds");
  probe_cmd->add_option("--n-train", probe_n_train, "synthetic mode: training points per seed");
  probe_cmd->add_option("--n-test", probe_n_test, "synthetic mode: test points per seed");
  probe_cmd->callback([&] {
    if (probe_synthetic) {
      // y depends only on the auxiliary feature; the 4 "optical" features are
      // noise. Stacking the auxiliary channel should win at low n_train.
      int wins = 0;
      for (int s = 0; s < probe_seeds; ++s) {
        SplitMix64 rng(globals.seed + static_cast<uint64_t>(s) * 1000003ULL);
        auto draw = [&](int n, Mat& optical, Mat& stacked, std::vector<double>& y) {
          optical = Mat(static_cast<size_t>(n), 4);
          stacked = Mat(static_cast<size_t>(n), 5);
          y.resize(static_cast<size_t>(n));
          for (int i = 0; i < n; ++i) {
            double aux = rng.next_normal();
            for (int j = 0; j < 4; ++j) {
              double v = rng.next_normal();
              optical(static_cast<size_t>(i), static_cast<size_t>(j)) = v;
              stacked(static_cast<size_t>(i), static_cast<size_t>(j)) = v;
            }
            stacked(static_cast<size_t>(i), 4) = aux;
            y[static_cast<size_t>(i)] = 3.0 * aux + 0.5 * rng.next_normal();
          }
        };
        Mat opt_tr, stk_tr, opt_te, stk_te;
        std::vector<double> y_tr, y_te;
        draw(probe_n_train, opt_tr, stk_tr, y_tr);
        draw(probe_n_test, opt_te, stk_te, y_te);
        double r2_opt = ridge_probe(opt_tr, y_tr, opt_te, y_te, probe_lambda).test_r2;
        double r2_stk = ridge_probe(stk_tr, y_tr, stk_te, y_te, probe_lambda).test_r2;
        if (r2_stk > r2_opt) ++wins;
        std::cout << "seed=" << s << " r2_optical=" << fmt(r2_opt)
                  << " r2_stacked=" << fmt(r2_stk) << "\n";
      }
      std::cout << "stacked_wins=" << wins << "/" << probe_seeds << "\n";
      return;
    }
    if (probe_train_x.empty() || probe_train_y.empty() || probe_test_x.empty() || probe_test_y.empty())
      throw parameter_error("probe: need --train-x/--train-y/--test-x/--test-y (or --synthetic)");
    RidgeResult res = ridge_probe(read_csv_matrix(probe_train_x), read_value_list(probe_train_y),
                                  read_csv_matrix(probe_test_x), read_value_list(probe_test_y),
                                  probe_lambda);
    std::string report = "test_r2=" + fmt(res.test_r2) + "\n";
    for (size_t j = 0; j < res.weights.size(); ++j)
      report += "w" + std::to_string(j) + "=" + fmt(res.weights[j]) + "\n";
    if (globals.out.empty()) {
      std::cout << report;
    } else {
      write_file_atomic(globals.out, report);
      note_output(globals.out, "ridge probe report");
    }
  });

  // -------------------------------------------------------------- validate
  auto* validate_cmd = app.add_subcommand("validate", "check a pipeline config without writing outputs");
  validate_cmd->fallthrough();
  validate_cmd->callback([&] {
    if (globals.config.empty()) throw parameter_error("validate: --config is required");
    PipelineConfig cfg = parse_pipeline_config(read_file(globals.config), globals.config);
    ValidationReport report = validate_pipeline(cfg, fs::path(globals.config).parent_path());
    std::cout << report.text(globals.config);
    if (report.has_errors()) throw parameter_error("validation failed");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help goes to stdout, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
