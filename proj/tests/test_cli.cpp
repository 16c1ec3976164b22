#include <gtest/gtest.h>
#include <sys/wait.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "surfacegrid/dataset.hpp"
#include "surfacegrid/image.hpp"
#include "surfacegrid/metrics.hpp"
#include "test_support.hpp"

using namespace surfacegrid;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const fs::path& cwd) {
  const auto out = cwd / "stdout.txt", err = cwd / "stderr.txt";
  const std::string cmd = "cd '" + cwd.string() + "' && '" SURFACEGRID_CLI "' " + args + " > '" + out.string() +
                          "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  fs::remove(out);
  fs::remove(err);
  return r;
}

std::size_t count_files(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(CliGenFunctions, WritesOneFilePerFunction) {
  const auto dir = test_support::scratch_dir("cli_gen");
  const auto r = cli("gen-functions --preset tiny --out fn", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_files(dir / "fn/functions"), 5u);
  EXPECT_EQ(count_lines(slurp(dir / "fn/functions.jsonl")), 5u);
  EXPECT_TRUE(fs::exists(dir / "fn" / kConfigEcho));
  EXPECT_EQ(load_function(dir / "fn/functions/f0003.txt"), synth_function(7, 3));
}

TEST(CliGenFunctions, SeedAndCountOverrides) {
  const auto dir = test_support::scratch_dir("cli_gen_seed");
  const auto r = cli("gen-functions --preset tiny --seed 99 --functions 3 --out fn", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_files(dir / "fn/functions"), 3u);
  EXPECT_EQ(load_function(dir / "fn/functions/f0002.txt"), synth_function(99, 2));
}

TEST(CliGenFunctions, InvalidFlagsWriteNothing) {
  const auto dir = test_support::scratch_dir("cli_gen_bad");
  EXPECT_NE(cli("gen-functions --preset tiny --functions 0 --out fn", dir).code, 0);
  EXPECT_NE(cli("gen-functions --preset huge --out fn", dir).code, 0);
  EXPECT_NE(cli("gen-functions --preset tiny --out fn --bogus", dir).code, 0);
  EXPECT_FALSE(fs::exists(dir / "fn"));
}

TEST(CliBuild, DryRunBuildsNothing) {
  const auto dir = test_support::scratch_dir("cli_dry");
  const auto r = cli("build --preset standard --out ds --dry-run", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("2000 functions, 20000 depth maps, 78600 surfaces"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir / "ds"));
  const auto j = cli("--json build --preset tiny --dry-run", dir);
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(nlohmann::json::parse(j.out).at("planned").at("surface"), 20);
}

TEST(CliBuild, TinyBuildAndIdempotentRebuild) {
  const auto dir = test_support::scratch_dir("cli_build");
  const auto first = cli("build --preset tiny --out ds", dir);
  ASSERT_EQ(first.code, 0) << first.err;
  const auto manifest = slurp(dir / "ds" / kManifestFile);
  EXPECT_EQ(count_lines(manifest), 36u);
  const auto second = cli("build --preset tiny --out ds", dir);
  ASSERT_EQ(second.code, 0);
  EXPECT_NE(second.out.find("skipped 35"), std::string::npos) << second.out;
  EXPECT_EQ(slurp(dir / "ds" / kManifestFile), manifest);

  // the config echo reproduces the build
  const auto echo = cli("build --config ds/config.json --out ds2", dir);
  ASSERT_EQ(echo.code, 0) << echo.err;
  EXPECT_EQ(slurp(dir / "ds2" / kManifestFile), manifest);

  const auto inspect = cli("inspect ds/manifest.jsonl", dir);
  EXPECT_EQ(inspect.code, 0);
  EXPECT_NE(inspect.out.find("surfaces 20"), std::string::npos);
}

TEST(CliBuild, BadConfigFails) {
  const auto dir = test_support::scratch_dir("cli_badcfg");
  {
    std::ofstream out(dir / "c.json");
    out << R"({"seed": 1, "mystery": 2})";
  }
  const auto r = cli("build --config c.json --out ds", dir);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("mystery"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "ds"));
}

class CliEval : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(test_support::scratch_dir("cli_eval"));
    ASSERT_EQ(cli("build --preset tiny --out ds", *dir_).code, 0);
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path* dir_;
};
fs::path* CliEval::dir_ = nullptr;

TEST_F(CliEval, CopyOfTruthScoresZero) {
  fs::remove_all(*dir_ / "pred");
  fs::create_directories(*dir_ / "pred");
  fs::copy(*dir_ / "ds/depth", *dir_ / "pred/depth", fs::copy_options::recursive);
  const auto r = cli("eval --pred pred --dataset ds --size 2 --tags Base,Full --out rep", *dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Base"), std::string::npos);
  EXPECT_NE(r.out.find("0.000"), std::string::npos);
  const auto reports = reports_from_jsonl(slurp(*dir_ / "rep/report.jsonl"));
  ASSERT_EQ(reports.size(), 2u);
  for (const auto& rep : reports) EXPECT_EQ(rep.mean, 0.0);
  EXPECT_TRUE(fs::exists(*dir_ / "rep/eval_config.json"));
}

TEST_F(CliEval, MatrixOfTwoPredictionSets) {
  fs::remove_all(*dir_ / "half");
  for (const auto& e : fs::recursive_directory_iterator(*dir_ / "ds/depth"))
    if (e.is_regular_file())
      write_depth_png(DepthMap(512, 512, 0.5), *dir_ / "half" / fs::relative(e.path(), *dir_ / "ds"));
  fs::remove_all(*dir_ / "pred");
  fs::create_directories(*dir_ / "pred");
  fs::copy(*dir_ / "ds/depth", *dir_ / "pred/depth", fs::copy_options::recursive);
  const auto r = cli("eval --pred Copy=pred --pred Half=half --dataset ds --size 2 --tags Base", *dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Copy"), std::string::npos);
  EXPECT_NE(r.out.find("Half"), std::string::npos);
}

TEST_F(CliEval, MissingPredictionsExitNonzero) {
  fs::create_directories(*dir_ / "empty");
  const auto r = cli("eval --pred empty --dataset ds --size 2 --tags Base", *dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing prediction"), std::string::npos);
}

TEST_F(CliEval, UnknownTagRejected) {
  const auto r = cli("eval --pred pred --dataset ds --tags Nonsense --out rep2", *dir_);
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists(*dir_ / "rep2"));
}

TEST_F(CliEval, SubsetListing) {
  const auto r = cli("subset --manifest ds/manifest.jsonl --tag Baseline --split train --size 3 --seed 1", *dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 3u);
  const auto again = cli("subset --manifest ds/manifest.jsonl --tag Baseline --split train --size 3 --seed 1", *dir_);
  EXPECT_EQ(again.out, r.out);
  EXPECT_NE(cli("subset --manifest ds/manifest.jsonl --tag Baseline --size 4", *dir_).code, 0);
}

TEST(CliPreprocess, ConstantImageFails) {
  const auto dir = test_support::scratch_dir("cli_pre_const");
  write_gray_pgm(GrayImage(32, 32), dir / "zero.pgm");
  const auto r = cli("preprocess --in zero.pgm --out out.png", dir);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("no structure"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out.png"));
}

TEST(CliPreprocess, BlackOnWhiteScan) {
  const auto dir = test_support::scratch_dir("cli_pre_scan");
  GrayImage img(256, 256);
  for (int r = 0; r < 256; ++r)
    for (int c = 0; c < 256; ++c) img.at(r, c) = (r % 16 < 2 || c % 16 < 2) ? 0 : 230;
  write_gray_png(img, dir / "scan.png");
  const auto r = cli("preprocess --in scan.png --out out.png", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = read_surface_png(dir / "out.png");
  EXPECT_EQ(out.width, 512);
  EXPECT_LT(out.white_fraction(), 0.5);
}

TEST(CliPreprocess, FixedThresholdAndValidation) {
  const auto dir = test_support::scratch_dir("cli_pre_fixed");
  GrayImage img(64, 64);
  for (int c = 0; c < 64; ++c) img.at(10, c) = 200;
  write_gray_png(img, dir / "in.png");
  EXPECT_EQ(cli("preprocess --in in.png --out a.png --threshold 0.5", dir).code, 0);
  EXPECT_NE(cli("preprocess --in in.png --out b.png --threshold high", dir).code, 0);
  EXPECT_NE(cli("preprocess --in in.png --out c.png --threshold 2", dir).code, 0);
  EXPECT_NE(cli("preprocess --in missing.png --out d.png", dir).code, 0);
  EXPECT_TRUE(fs::exists(dir / "a.png"));
  EXPECT_FALSE(fs::exists(dir / "b.png"));
  EXPECT_FALSE(fs::exists(dir / "c.png"));
}

TEST(CliEarlyStop, ReadsTrainingLog) {
  const auto dir = test_support::scratch_dir("cli_es");
  {
    std::ofstream out(dir / "log.jsonl");
    for (int k = 0; k <= 10; ++k) out << R"({"epoch": )" << k << R"(, "val_mae": )" << 10 - k << "}\n";
    for (int k = 1; k <= 50; ++k) out << R"({"epoch": )" << 10 + k << R"(, "val_mae": )" << k << "}\n";
  }
  const auto r = cli("early-stop --log log.jsonl", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("action"), "stop");
  EXPECT_EQ(j.at("rollback_epoch"), 10);
}

TEST(Cli, NoSubcommandIsAnError) {
  const auto dir = test_support::scratch_dir("cli_none");
  EXPECT_NE(cli("", dir).code, 0);
}
