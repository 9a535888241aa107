#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "geofuse/ascii_grid.hpp"
#include "geofuse/fileio.hpp"
#include "geofuse/gft.hpp"
#include "geofuse/subset.hpp"

using namespace geofuse;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

fs::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("geofuse_cli_" + tag + "_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const fs::path& workdir) {
  fs::path log = workdir / "cli_output.txt";
  std::string cmd = std::string("\"") + GEOFUSE_CLI_PATH + "\" " + args + " > \"" +
                    log.string() + "\" 2>&1";
  int status = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  if (fs::exists(log)) res.output = read_file(log);
  return res;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string small_asc(int w, int h, double base) {
  std::string body;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (c) body += ' ';
      body += std::to_string(static_cast<int>(base) + (r * w + c) % 3);
    }
    body += '\n';
  }
  return "ncols " + std::to_string(w) + "\nnrows " + std::to_string(h) +
         "\nxllcorner 0\nyllcorner 0\ncellsize 10\n" + body;
}

void write_prior_inputs(const fs::path& dir) {
  // 6x6 coarse grid with two regions, aligned estimation pair, road geojson
  std::string coarse =
      "ncols 6\nnrows 6\nxllcorner 0\nyllcorner 0\ncellsize 10\n";
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) coarse += (c ? " " : "") + std::to_string(c < 3 ? 0 : 1);
    coarse += "\n";
  }
  write_text(dir / "coarse.asc", coarse);

  std::string fine = "ncols 6\nnrows 6\nxllcorner 0\nyllcorner 0\ncellsize 10\n";
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) fine += (c ? " " : "") + std::to_string((c + r) % 3);
    fine += "\n";
  }
  write_text(dir / "fine.asc", fine);

  write_text(dir / "roads.geojson",
             R"({"type":"FeatureCollection","features":[
               {"type":"Feature","properties":{"highway":"residential"},
                "geometry":{"type":"LineString","coordinates":[[-5,55],[65,55]]}}]})");

  write_text(dir / "prior.cfg",
             "[prior]\n"
             "coarse = coarse.asc\n"
             "pairs = coarse.asc:fine.asc\n"
             "n_coarse = 2\n"
             "n_fine = 3\n"
             "sigma = 1.0\n"
             "epsilon = 1e-6\n"
             "boost = geojson=roads.geojson key=highway value=* class=2 weight=1 radius=10\n"
             "out = prior.gft\n");
}

}  // namespace

TEST_CASE("cli: subset plan for the documented 1572-point case") {
  fs::path dir = fresh_dir("subset");
  fs::path out = dir / "plan.csv";
  CliResult res = run_cli("subset --n 1572 --fraction 0.05 --seed 1 --out " + out.string(), dir);
  REQUIRE(res.exit_code == 0);
  std::string csv = read_file(out);
  REQUIRE(csv.find("# n=1572 fraction=0.05 seed=1 epochs=140") == 0);
  int rows = 0;
  bool seen_header = false;
  for (const auto& line : detail::split_lines(csv)) {
    if (line == "index") {
      seen_header = true;
      continue;
    }
    if (seen_header && !line.empty()) ++rows;
  }
  REQUIRE(rows == 79);  // round(0.05 * 1572)
  fs::remove_all(dir);
}

TEST_CASE("cli: epochs lookup") {
  fs::path dir = fresh_dir("epochs");
  CliResult res = run_cli("epochs --fraction 0.05", dir);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output == "epochs=140\n");
  fs::remove_all(dir);
}

TEST_CASE("cli: segmentation metrics report") {
  fs::path dir = fresh_dir("seg");
  write_text(dir / "pred.asc",
             "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 1\n0 0\n");
  write_text(dir / "truth.asc",
             "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 0\n0 0\n");
  CliResult res = run_cli("metrics seg --pred " + (dir / "pred.asc").string() + " --truth " +
                              (dir / "truth.asc").string() + " --classes 2",
                          dir);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("overall_accuracy=0.75") != std::string::npos);
  REQUIRE(res.output.find("iou_1=0.5") != std::string::npos);
  REQUIRE(res.output.find("dice_1=0.666666667") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: prior pipeline writes a simplex stack and a manifest") {
  fs::path dir = fresh_dir("prior");
  write_prior_inputs(dir);
  CliResult res = run_cli("prior --config " + (dir / "prior.cfg").string(), dir);
  INFO(res.output);
  REQUIRE(res.exit_code == 0);

  FusedTensor prior = read_gft(read_file(dir / "prior.gft"));
  REQUIRE(prior.channel_count() == 3);
  for (int r = 0; r < prior.height(); ++r)
    for (int c = 0; c < prior.width(); ++c) {
      double sum = 0.0;
      for (const auto& ch : prior.channels) sum += ch.at(c, r);
      REQUIRE(sum == Catch::Approx(1.0).margin(1e-5));
    }
  REQUIRE(prior.provenance[0].source.find("manifest=") != std::string::npos);

  std::string manifest = read_file(dir / "prior.gft.manifest");
  REQUIRE(manifest.find("sigma=1") != std::string::npos);
  REQUIRE(manifest.find("boost=roads.geojson") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: validate accepts a consistent config") {
  fs::path dir = fresh_dir("validate_ok");
  write_prior_inputs(dir);
  write_text(dir / "layers.cfg",
             "[layer red]\ngrid = red.asc\nnorm = byte255\n"
             "[layer green]\ngrid = green.asc\nnorm = byte255\n");
  write_text(dir / "red.asc", small_asc(6, 6, 0));
  write_text(dir / "green.asc", small_asc(6, 6, 1));
  CliResult res = run_cli("validate --config " + (dir / "layers.cfg").string(), dir);
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.empty());
  fs::remove_all(dir);
}

TEST_CASE("cli: validate reports misalignment naming both layers") {
  fs::path dir = fresh_dir("validate_misaligned");
  write_text(dir / "red.asc", small_asc(6, 6, 0));
  write_text(dir / "dem.asc", small_asc(4, 4, 0));
  write_text(dir / "bad.cfg",
             "[layer red]\ngrid = red.asc\n"
             "[layer dem]\ngrid = dem.asc\n");
  CliResult res = run_cli("validate --config " + (dir / "bad.cfg").string(), dir);
  REQUIRE(res.exit_code == 1);
  REQUIRE(res.output.find("dem") != std::string::npos);
  REQUIRE(res.output.find("red") != std::string::npos);
  REQUIRE(res.output.find("not aligned") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: validate flags a zero sigma") {
  fs::path dir = fresh_dir("validate_sigma");
  write_prior_inputs(dir);
  write_text(dir / "zero.cfg",
             "[prior]\ncoarse = coarse.asc\ncooccurrence = co.txt\nsigma = 0\n");
  write_text(dir / "co.txt", "2 2\n0.5 0.5\n0.5 0.5\n");
  CliResult res = run_cli("validate --config " + (dir / "zero.cfg").string(), dir);
  REQUIRE(res.exit_code == 1);
  REQUIRE(res.output.find("sigma") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: rasterize and rgb round") {
  fs::path dir = fresh_dir("rasterize");
  write_text(dir / "like.asc", small_asc(4, 4, 0));
  write_text(dir / "water.geojson",
             R"({"type":"FeatureCollection","features":[
               {"type":"Feature","properties":{"landuse":"water"},
                "geometry":{"type":"Polygon","coordinates":[[[0,0],[40,0],[40,40],[0,40],[0,0]]]}}]})");
  write_text(dir / "map.classmap",
             "background class=0 color=#000000\n"
             "landuse=water class=1 color=#0000ff buffer=0\n");
  CliResult res = run_cli("rasterize --geojson " + (dir / "water.geojson").string() +
                              " --classmap " + (dir / "map.classmap").string() + " --like " +
                              (dir / "like.asc").string() + " --out " + (dir / "classes.asc").string(),
                          dir);
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  Grid classes = read_ascii_grid(read_file(dir / "classes.asc"), GridKind::categorical);
  for (double v : classes.data) REQUIRE(v == 1.0);  // polygon covers the tile

  CliResult rgb = run_cli("rgb --classes " + (dir / "classes.asc").string() + " --classmap " +
                              (dir / "map.classmap").string() + " --sigma 1.0 --out " +
                              (dir / "rgb.gft").string(),
                          dir);
  REQUIRE(rgb.exit_code == 0);
  FusedTensor tensor = read_gft(read_file(dir / "rgb.gft"));
  REQUIRE(tensor.channel_count() == 3);
  for (double v : tensor.channels[2].data) REQUIRE(v == Catch::Approx(1.0).margin(1e-6));
  fs::remove_all(dir);
}

TEST_CASE("cli: stack assembles channels per config") {
  fs::path dir = fresh_dir("stack");
  write_text(dir / "red.asc", small_asc(4, 4, 0));
  write_text(dir / "green.asc", small_asc(4, 4, 1));
  write_text(dir / "stack.cfg",
             "[layer red]\ngrid = red.asc\nnorm = byte255\n"
             "[layer green]\ngrid = green.asc\nnorm = byte255\n"
             "[stack]\nmode = stack\nchannels = red, green\nout = fused.gft\n");
  CliResult res = run_cli("stack --config " + (dir / "stack.cfg").string(), dir);
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  FusedTensor tensor = read_gft(read_file(dir / "fused.gft"));
  REQUIRE(tensor.channel_count() == 2);
  REQUIRE(tensor.provenance[0].source == "red");
  REQUIRE(tensor.provenance[0].norm == "byte255");
  fs::remove_all(dir);
}

TEST_CASE("cli: tokens subcommand") {
  fs::path dir = fresh_dir("tokens");
  // 2-channel 16x16 image as GFT
  FusedTensor image;
  for (int c = 0; c < 2; ++c) {
    Grid g(16, 16);
    for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = static_cast<double>((i + c) % 7) / 7.0;
    image.channels.push_back(g);
    image.provenance.push_back({"band" + std::to_string(c), "identity"});
  }
  write_file_atomic(dir / "image.gft", write_gft(image));

  CliResult res = run_cli("tokens --image " + (dir / "image.gft").string() +
                              " --patch 8 --dim 32 --seed 5 --lat 48.2 --lon 16.4 --registers 1 --out " +
                              (dir / "tokens.gft").string(),
                          dir);
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  Mat z0 = read_weight_blob(read_file(dir / "tokens.gft"));
  REQUIRE(z0.rows == 4 + 2 + 1);  // N=4 patches, cls+loc, one register
  REQUIRE(z0.cols == 32);
  fs::remove_all(dir);
}

TEST_CASE("cli: analyze cosine / distmap / pca") {
  fs::path dir = fresh_dir("analyze");
  std::string csv = "lat,lon,group,v0,v1,v2\n";
  csv += "1,1,a,1,0,0\n1,1,a,1,0.1,0\n";
  csv += "2,2,b,0,1,0\n2,2,b,0,1,0.1\n";
  csv += "3,3,c,0,0,1\n3,3,c,0.1,0,1\n";
  write_text(dir / "emb.csv", csv);

  CliResult cos = run_cli("analyze cosine --embeddings " + (dir / "emb.csv").string() +
                              " --out " + (dir / "cos.csv").string(),
                          dir);
  REQUIRE(cos.exit_code == 0);
  std::string cos_out = read_file(dir / "cos.csv");
  REQUIRE(cos_out.find("group,a,b,c") == 0);

  CliResult dist = run_cli("analyze distmap --embeddings " + (dir / "emb.csv").string() +
                               " --ref-row 0",
                           dir);
  REQUIRE(dist.exit_code == 0);
  REQUIRE(dist.output.find("lat,lon,group,distance") == 0);
  REQUIRE(dist.output.find("1,1,a,0\n") != std::string::npos);  // row 0 vs itself

  CliResult pca = run_cli("analyze pca --embeddings " + (dir / "emb.csv").string(), dir);
  REQUIRE(pca.exit_code == 0);
  REQUIRE(pca.output.find("lat,lon,group,r,g,b") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: probe synthetic mode reports the stacked-input advantage") {
  fs::path dir = fresh_dir("probe");
  CliResult res = run_cli("probe --synthetic --seeds 5 --n-train 32 --seed 9", dir);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("stacked_wins=5/5") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: probe scores files with the closed-form solve") {
  fs::path dir = fresh_dir("probe_files");
  write_text(dir / "train_x.csv", "1\n2\n3\n");
  write_text(dir / "train_y.csv", "2\n4\n6\n");
  write_text(dir / "test_x.csv", "1.5\n2.5\n");
  write_text(dir / "test_y.csv", "3\n5\n");
  CliResult res = run_cli("probe --train-x " + (dir / "train_x.csv").string() + " --train-y " +
                              (dir / "train_y.csv").string() + " --test-x " +
                              (dir / "test_x.csv").string() + " --test-y " +
                              (dir / "test_y.csv").string() + " --lambda 1e-8",
                          dir);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("test_r2=") != std::string::npos);
  REQUIRE(res.output.find("w0=2") != std::string::npos);  // y = 2x recovered
  fs::remove_all(dir);
}

TEST_CASE("cli: regression metrics from value lists") {
  fs::path dir = fresh_dir("reg");
  write_text(dir / "pred.csv", "1\n2\n4\n");
  write_text(dir / "truth.csv", "1\n2\n4\n");
  CliResult res = run_cli("metrics reg --pred " + (dir / "pred.csv").string() + " --truth " +
                              (dir / "truth.csv").string(),
                          dir);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output == "r_squared=1\n");
  fs::remove_all(dir);
}

TEST_CASE("cli: multilabel metrics with threshold flag") {
  fs::path dir = fresh_dir("ml");
  write_text(dir / "scores.csv", "0.9,0.1\n0.8,0.2\n0.7,0.3\n0.6,0.4\n");
  write_text(dir / "truth.csv", "1,0\n0,0\n1,1\n0,0\n");
  CliResult res = run_cli("metrics multilabel --scores " + (dir / "scores.csv").string() +
                              " --truth " + (dir / "truth.csv").string() + " --threshold 0.5 --csv " +
                              (dir / "per_label.csv").string(),
                          dir);
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("ap_0=0.833333333") != std::string::npos);  // the 5/6 case
  std::string csv = read_file(dir / "per_label.csv");
  REQUIRE(csv.find("label,precision,recall,f1,average_precision,excluded") == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli: exit codes distinguish validation from I/O failures") {
  fs::path dir = fresh_dir("exitcodes");
  CliResult unknown = run_cli("frobnicate", dir);
  REQUIRE(unknown.exit_code == 1);

  CliResult bad_flag = run_cli("subset --n 10 --fraction 0.5 --bogus", dir);
  REQUIRE(bad_flag.exit_code == 1);

  CliResult missing = run_cli("metrics seg --pred /nonexistent/p.asc --truth /nonexistent/t.asc --classes 2", dir);
  REQUIRE(missing.exit_code == 2);

  CliResult bad_fraction = run_cli("subset --n 10 --fraction 2.0", dir);
  REQUIRE(bad_fraction.exit_code == 1);
  fs::remove_all(dir);
}

TEST_CASE("cli: failed runs leave no partial outputs") {
  fs::path dir = fresh_dir("atomic");
  write_prior_inputs(dir);
  write_text(dir / "broken.cfg",
             "[prior]\ncoarse = coarse.asc\npairs = coarse.asc:missing.asc\n"
             "n_coarse = 2\nn_fine = 3\nout = never.gft\n");
  CliResult res = run_cli("prior --config " + (dir / "broken.cfg").string(), dir);
  REQUIRE(res.exit_code == 2);
  REQUIRE_FALSE(fs::exists(dir / "never.gft"));
  REQUIRE_FALSE(fs::exists(dir / "never.gft.tmp"));
  fs::remove_all(dir);
}
