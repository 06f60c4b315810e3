// End-to-end checks of the command-line binary; the path comes in via the
// MWDENOISE_CLI compile definition.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mwdenoise/io.hpp"
#include "mwdenoise/manifest.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(MWDENOISE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string scratch_dir(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / ("mwd_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp_text(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(bool(in)) << path;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// gen a small stroke dataset and return its directory
std::string gen_dataset(const std::string& name, int count = 2) {
  const std::string dir = scratch_dir(name);
  const int rc = run_cli("--seed 5 --out-dir " + dir +
                         " gen --height 32 --width 32 --count " +
                         std::to_string(count) + " --presets 40uJ");
  EXPECT_EQ(rc, 0);
  return dir;
}

}  // namespace

TEST(CliGen, WritesPairsAndManifest) {
  const std::string dir = gen_dataset("gen");
  EXPECT_TRUE(fs::exists(dir + "/manifest.txt"));
  EXPECT_TRUE(fs::exists(dir + "/pair00000_noisy.paif"));
  EXPECT_TRUE(fs::exists(dir + "/pair00001_clean.paif"));

  std::ifstream mf(dir + "/manifest.txt");
  const mwd::DatasetRecipe recipe = mwd::read_manifest(mf);
  ASSERT_EQ(recipe.pairs.size(), 2u);
  EXPECT_EQ(recipe.spec.height, 32);

  const mwd::Image noisy = mwd::read_image(dir + "/pair00000_noisy.paif");
  EXPECT_EQ(noisy.height, 32);
  EXPECT_EQ(noisy.width, 32);
}

TEST(CliGen, SameSeedIsByteIdentical) {
  const std::string a = gen_dataset("gen_a");
  const std::string b = gen_dataset("gen_b");
  for (const char* f : {"manifest.txt", "pair00000_noisy.paif",
                        "pair00001_clean.paif"}) {
    EXPECT_EQ(mwd::detail::slurp(a + "/" + f), mwd::detail::slurp(b + "/" + f))
        << f;
  }
}

TEST(CliTrainDenoiseEval, FullPipelineRuns) {
  const std::string dir = gen_dataset("pipeline", 4);

  const std::string cfg_path = dir + "/run.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "# desk-size smoke run\n"
        << "levels = 1\n"
        << "convs_per_block = 1\n"
        << "channel_schedule = 4\n"
        << "residual_mode = true\n"
        << "learning_rate = 1e-3\n"
        << "epochs = 2\n"
        << "batch_size = 2\n"
        << "split_fraction = 0.8\n"
        << "seed = 9\n"
        << "manifest = " << dir << "/manifest.txt\n"
        << "out_dir = " << dir << "/trained\n";
  }
  ASSERT_EQ(run_cli("--config " + cfg_path + " train"), 0);
  EXPECT_TRUE(fs::exists(dir + "/trained/model.mwck"));

  const std::string csv = slurp_text(dir + "/trained/loss.csv");
  EXPECT_EQ(csv.rfind("epoch,mean_train_loss,mean_test_loss\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);  // header + 2 epochs

  const mwd::ModelParams<float> model =
      mwd::load_checkpoint(dir + "/trained/model.mwck");
  EXPECT_EQ(model.config.levels, 1);

  ASSERT_EQ(run_cli("--out-dir " + dir + "/dn denoise --checkpoint " + dir +
                    "/trained/model.mwck " + dir + "/pair00000_noisy.paif"),
            0);
  const mwd::Image dn = mwd::read_image(dir + "/dn/pair00000_noisy_dn.paif");
  EXPECT_EQ(dn.height, 32);
  EXPECT_EQ(dn.width, 32);

  ASSERT_EQ(run_cli("eval " + dir + "/dn/pair00000_noisy_dn.paif --truths " +
                    dir + "/pair00000_clean.paif --csv " + dir + "/eval.csv"),
            0);
  const std::string eval_csv = slurp_text(dir + "/eval.csv");
  EXPECT_EQ(eval_csv.rfind("file,psnr_db,ssim\n", 0), 0u);
  EXPECT_NE(eval_csv.find("mean,"), std::string::npos);
}

TEST(CliEval, IdenticalImagesScoreInfAndUnitSsim) {
  const std::string dir = gen_dataset("eval_ident");
  const std::string img = dir + "/pair00000_clean.paif";
  ASSERT_EQ(run_cli("eval " + img + " --truths " + img + " --csv " + dir +
                    "/ident.csv"),
            0);
  const std::string csv = slurp_text(dir + "/ident.csv");
  EXPECT_NE(csv.find(",inf,"), std::string::npos);
  EXPECT_NE(csv.find(",1\n"), std::string::npos);
}

TEST(CliEval, CnrModeUsesRoiSpec) {
  const std::string dir = scratch_dir("eval_cnr");
  // bright 1 mm bar at 1.6 mm depth on a noisy background
  mwd::PhantomSpec spec;
  spec.scene = mwd::SceneKind::depth_targets;
  spec.height = 32;
  spec.width = 32;
  spec.pixel_spacing_mm = 0.1f;
  spec.depths_mm = {1.6};
  const mwd::Image clean = mwd::generate_scene(spec, 0);
  const mwd::Image noisy = mwd::degrade(clean, mwd::parse_preset("80uJ"), 3);
  mwd::write_image(dir + "/bar.paif", noisy);
  {
    std::ofstream roi(dir + "/rois.txt");
    roi << "# bar ROI and off-bar background\n"
        << "object 1.6 1.6 0.6 0.6\n"
        << "background 1.6 0.4 0.6 0.6\n"
        << "background 1.6 2.8 0.6 0.6\n";
  }
  ASSERT_EQ(run_cli("eval " + dir + "/bar.paif --rois " + dir +
                    "/rois.txt --csv " + dir + "/cnr.csv"),
            0);
  const std::string csv = slurp_text(dir + "/cnr.csv");
  EXPECT_EQ(csv.rfind("file,cnr_db\n", 0), 0u);
  EXPECT_EQ(csv.find("undefined"), std::string::npos);
}

TEST(CliStack, BundlesFramesIntoVolume) {
  const std::string dir = gen_dataset("stack");
  ASSERT_EQ(run_cli("--out-dir " + dir + " stack " + dir +
                    "/pair00000_noisy.paif " + dir + "/pair00001_noisy.paif"),
            0);
  const auto frames = mwd::read_volume(dir + "/volume.pavf");
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].pixels, mwd::read_image(dir + "/pair00000_noisy.paif").pixels);
}

TEST(CliGradcheck, PassesWithDefaultSeed) {
  EXPECT_EQ(run_cli("gradcheck"), 0);
}

TEST(CliExitCodes, UsageAndDataErrors) {
  EXPECT_EQ(run_cli("frobnicate"), 2);              // unknown subcommand
  EXPECT_EQ(run_cli("denoise"), 2);                 // missing required args
  EXPECT_EQ(run_cli("gen --scene nonsense"), 3);    // config error
  EXPECT_EQ(run_cli("train"), 3);                   // --config required
  const std::string dir = scratch_dir("exit_codes");
  EXPECT_EQ(run_cli("denoise --checkpoint " + dir + "/missing.mwck " + dir +
                    "/missing.paif"),
            3);
  EXPECT_EQ(run_cli("--help"), 0);
}
