#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dpdisp/io.hpp"
#include "dpdisp/optics.hpp"

using namespace dpdisp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + DPDISP_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpdisp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_camera(CameraParams::from_f_number(0.025, 2.0, 2.0, calibrated_alpha(kDefaultPixelPitch)), f("cam.json"));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& name) const { return "\"" + (dir_ / name).string() + "\""; }
  fs::path f(const std::string& name) const { return dir_ / name; }

  // simulate -> match -> complete -> refine into files prefixed by `tag`.
  void chain(const std::string& tag, const std::string& globals) {
    ASSERT_EQ(run(globals + " simulate --scene two-plane --width 96 --height 80 --camera " + p("cam.json") +
                  " --out-left " + p(tag + "L.pfm") + " --out-right " + p(tag + "R.pfm") + " --out-guide " +
                  p(tag + "G.png") + " --out-depth " + p(tag + "Z.pfm")),
              0);
    ASSERT_EQ(run(globals + " match --left " + p(tag + "L.pfm") + " --right " + p(tag + "R.pfm") +
                  " --out-disparity " + p(tag + "S.pfm") + " --out-mask " + p(tag + "M.png")),
              0);
    ASSERT_EQ(run(globals + " complete --sparse " + p(tag + "S.pfm") + " --guide " + p(tag + "G.png") +
                  " --out-dense " + p(tag + "D.pfm") + " --out-conf " + p(tag + "C.pfm")),
              0);
    ASSERT_EQ(run(globals + " refine --dense " + p(tag + "D.pfm") + " --conf " + p(tag + "C.pfm") + " --guide " +
                  p(tag + "G.png") + " --out " + p(tag + "F.pfm")),
              0);
    ASSERT_EQ(run(globals + " eval --est " + p(tag + "F.pfm") + " --gt " + p(tag + "Z.pfm") +
                  " --gt-kind depth --out " + p(tag + "E.json")),
              0);
  }

  fs::path dir_;
};

const std::vector<std::string> kChainFiles{"L.pfm", "R.pfm", "G.png", "Z.pfm", "S.pfm", "M.png",
                                           "D.pfm", "C.pfm", "F.pfm", "E.json"};

}  // namespace

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(CliTest, ChainIsReproducible) {
  chain("a", "--seed 3");
  chain("b", "--seed 3");
  for (const auto& name : kChainFiles) EXPECT_EQ(slurp(f("a" + name)), slurp(f("b" + name))) << name;
  const auto report = read_json(f("aE.json"));
  EXPECT_TRUE(report.contains("ai1"));
}

TEST_F(CliTest, ChainIsIndependentOfThreads) {
  chain("a", "--seed 4 --threads 1");
  chain("b", "--seed 4 --threads 3");
  for (const auto& name : kChainFiles) EXPECT_EQ(slurp(f("a" + name)), slurp(f("b" + name))) << name;
}

TEST_F(CliTest, SeedChangesSimulation) {
  chain("a", "--seed 1");
  chain("b", "--seed 2");
  EXPECT_NE(slurp(f("aL.pfm")), slurp(f("bL.pfm")));
}

TEST_F(CliTest, MissingCameraFailsBeforeWriting) {
  const int code = run("simulate --scene disc --camera " + p("none.json") + " --out-left " + p("l.pfm") +
                       " --out-right " + p("r.pfm"));
  EXPECT_NE(code, 0);
  EXPECT_EQ(code, 3);
  EXPECT_FALSE(fs::exists(f("l.pfm")));
}

TEST_F(CliTest, MalformedInputsMapToIoFamily) {
  std::ofstream(f("junk.png")) << "definitely not a png";
  EXPECT_EQ(run("match --left " + p("junk.png") + " --right " + p("junk.png") + " --out-disparity " + p("d.pfm")), 3);
  std::ofstream(f("junk.pfm")) << "Pf\n2 2\n";
  EXPECT_EQ(run("match --left " + p("junk.pfm") + " --right " + p("junk.pfm") + " --out-disparity " + p("d.pfm")), 3);
  std::ofstream(f("notjson.json")) << "{";
  EXPECT_EQ(run("--config " + p("notjson.json") + " match --left " + p("junk.pfm") + " --right " + p("junk.pfm") +
                " --out-disparity " + p("d.pfm")),
            3);
}

TEST_F(CliTest, BadConfigsMapToConfigFamily) {
  std::ofstream(f("bad.json")) << R"({"window": 4})";
  chain("a", "");
  EXPECT_EQ(run("match --left " + p("aL.pfm") + " --right " + p("aR.pfm") + " --config " + p("bad.json") +
                " --out-disparity " + p("d.pfm")),
            2);
  std::ofstream(f("unknown.json")) << R"({"windw": 5})";
  EXPECT_EQ(run("match --left " + p("aL.pfm") + " --right " + p("aR.pfm") + " --config " + p("unknown.json") +
                " --out-disparity " + p("d.pfm")),
            2);
}

TEST_F(CliTest, EmptySparseMapsToSolverFamily) {
  chain("a", "");
  write_map(DisparityMap(96, 80), f("empty.pfm"));
  EXPECT_EQ(run("complete --sparse " + p("empty.pfm") + " --guide " + p("aG.png") + " --out-dense " + p("d.pfm") +
                " --out-conf " + p("c.pfm")),
            7);
}

TEST_F(CliTest, EvalMismatchMapsToEvalFamily) {
  chain("a", "");
  write_map(DisparityMap::dense(GridD(10, 10, 1.0)), f("small.pfm"));
  EXPECT_EQ(run("eval --est " + p("small.pfm") + " --gt " + p("aZ.pfm") + " --gt-kind depth"), 8);
}

TEST_F(CliTest, EvalAppendsCsv) {
  chain("a", "");
  ASSERT_EQ(run("eval --est " + p("aF.pfm") + " --gt " + p("aZ.pfm") + " --gt-kind depth --csv " + p("m.csv")), 0);
  ASSERT_EQ(run("eval --est " + p("aD.pfm") + " --gt " + p("aZ.pfm") + " --gt-kind depth --csv " + p("m.csv")), 0);
  std::ifstream in(f("m.csv"));
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 3);
}

TEST_F(CliTest, FitErrorModelIsReproducible) {
  const nlohmann::json sweep{{"z", {1.0, 1.5, 2.5, 3.0, 4.0}},
                             {"z_f", {1.5, 2.5}},
                             {"f_number", {2.0, 4.0}},
                             {"width", 64},
                             {"height", 64}};
  write_json(f("sweep.json"), sweep);
  ASSERT_EQ(run("--seed 7 fit-error-model --sweep-config " + p("sweep.json") + " --out-model " + p("m1.json") +
                " --out-records " + p("r1.csv")),
            0);
  ASSERT_EQ(run("--seed 7 --threads 2 fit-error-model --sweep-config " + p("sweep.json") + " --out-model " +
                p("m2.json") + " --out-records " + p("r2.csv")),
            0);
  EXPECT_EQ(slurp(f("m1.json")), slurp(f("m2.json")));
  EXPECT_EQ(slurp(f("r1.csv")), slurp(f("r2.csv")));
  const auto m = read_json(f("m1.json"));
  for (const char* k : {"c1", "c2", "c3"}) EXPECT_GT(m.at(k).get<double>(), 0.0) << k;
}

TEST_F(CliTest, DatagenAndToyAreReproducible) {
  chain("a", "--seed 1");
  std::ofstream(f("pairs.csv")) << "rgb,depth\n# one pair\naG.png,aZ.pfm\n";
  for (const char* out : {"dg1", "dg2"}) {
    ASSERT_EQ(run("--seed 9 datagen --manifest " + p("pairs.csv") + " --count 2 --out-dir " + p(out)), 0);
  }
  for (const char* name : {"sample_00000_sparse.pfm", "sample_00001_sparse.pfm", "samples.csv"}) {
    ASSERT_TRUE(fs::exists(f("dg1") / name)) << name;
    EXPECT_EQ(slurp(f("dg1") / name), slurp(f("dg2") / name)) << name;
  }
  std::ofstream(f("broken.csv")) << "missing.png,missing.pfm\n";
  EXPECT_EQ(run("datagen --manifest " + p("broken.csv") + " --out-dir " + p("dg3")), 3);
  EXPECT_FALSE(fs::exists(f("dg3") / "samples.csv"));

  ASSERT_EQ(run("--seed 2 toy-experiment --out-dir " + p("t1")), 0);
  ASSERT_EQ(run("--seed 2 --threads 2 toy-experiment --out-dir " + p("t2")), 0);
  EXPECT_EQ(slurp(f("t1") / "histogram.csv"), slurp(f("t2") / "histogram.csv"));
  EXPECT_EQ(slurp(f("t1") / "summary.json"), slurp(f("t2") / "summary.json"));
}

TEST_F(CliTest, PipelineReplaysFromManifest) {
  const nlohmann::json cfg{{"camera", "cam.json"},
                           {"scene", {{"kind", "boxes"}, {"width", 96}, {"height", 96}}},
                           {"output_dir", "run1"}};
  write_json(f("pipe.json"), cfg);
  ASSERT_EQ(run("--seed 11 pipeline --config " + p("pipe.json")), 0);
  ASSERT_EQ(run("--threads 2 pipeline --config " + p("run1/manifest.json") + " --out-dir " + p("run2")), 0);
  for (const char* name : {"left.pfm", "sparse.pfm", "dense.pfm", "refined.pfm", "metrics.json"}) {
    EXPECT_EQ(slurp(f("run1") / name), slurp(f("run2") / name)) << name;
  }
  write_json(f("bad_pipe.json"), nlohmann::json{{"camera", "cam.json"}, {"scene", {{"kind", "torus"}}}});
  EXPECT_EQ(run("pipeline --config " + p("bad_pipe.json")), 2);
}
