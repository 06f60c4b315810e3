// Command-line front end: gen / train / denoise / eval / gradcheck / stack.
// Exit codes: 0 ok, 2 usage, 3 data or config error, 4 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwdenoise/mwdenoise.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  int threads = 1;
};

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw mwd::DataError("cannot create output directory '" + dir + "'");
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string output_name(const std::string& input, const std::string& suffix) {
  fs::path p(input);
  return p.stem().string() + suffix + p.extension().string();
}

// ---------------------------------------------------------------------------

int cmd_gen(const GlobalArgs& g, const std::string& scene, int height,
            int width, double spacing, int count, const std::string& presets,
            std::uint64_t noise_seed, bool have_noise_seed, int strokes,
            double stroke_width, double stroke_intensity, double blur,
            const std::string& text, const std::string& depths,
            double attenuation, bool pgm) {
  mwd::PhantomSpec spec;
  spec.scene = mwd::scene_from_string(scene);
  spec.height = height;
  spec.width = width;
  spec.pixel_spacing_mm = float(spacing);
  spec.scene_count = count;
  spec.seed = g.seed;
  spec.stroke_count = strokes;
  spec.stroke_width_px = stroke_width;
  spec.stroke_intensity = stroke_intensity;
  spec.blur_sigma_px = blur;
  spec.text = text;
  if (!depths.empty()) spec.depths_mm = mwd::detail::parse_depths(depths);
  spec.attenuation_per_mm = attenuation;

  std::vector<mwd::DegradationPreset> preset_list;
  {
    std::istringstream is(presets);
    std::string label;
    while (std::getline(is, label, ','))
      if (!label.empty()) preset_list.push_back(mwd::parse_preset(label));
  }
  if (preset_list.empty())
    throw mwd::ConfigError("gen: no degradation presets given");

  const std::uint64_t nseed =
      have_noise_seed ? noise_seed : mwd::mix_seed(g.seed, 0x6e6f697365ull);
  const mwd::DatasetRecipe recipe = mwd::make_recipe(spec, preset_list, nseed);

  ensure_out_dir(g.out_dir);
  for (const auto& e : recipe.pairs) {
    const mwd::ImagePair pair = mwd::realize_pair(recipe, e);
    mwd::write_image(join_path(g.out_dir, e.noisy_file), pair.noisy);
    mwd::write_image(join_path(g.out_dir, e.clean_file), pair.clean);
    if (pgm) {
      mwd::write_pgm16(join_path(g.out_dir, e.noisy_file + ".pgm"),
                       mwd::normalize(pair.noisy));
      mwd::write_pgm16(join_path(g.out_dir, e.clean_file + ".pgm"),
                       mwd::normalize(pair.clean));
    }
  }
  const std::string manifest_path = join_path(g.out_dir, "manifest.txt");
  std::ofstream mf(manifest_path);
  if (!mf) throw mwd::DataError("cannot open '" + manifest_path + "' for writing");
  mwd::write_manifest(mf, recipe);
  std::cout << "wrote " << recipe.pairs.size() << " pairs and " << manifest_path
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_train(const GlobalArgs& g, bool seed_given, bool out_dir_given,
              int threads_given) {
  if (g.config.empty())
    throw mwd::ConfigError("train: --config with a run-config file is required");
  mwd::RunConfig cfg = mwd::read_run_config(g.config);
  if (seed_given) cfg.train.seed = g.seed;
  if (out_dir_given) cfg.out_dir = g.out_dir;
  if (threads_given >= 0) cfg.threads = threads_given;
  mwd::set_threads(cfg.threads);

  if (cfg.manifest.empty())
    throw mwd::ConfigError("train: config must set manifest=<path>");
  std::ifstream mf(cfg.manifest);
  if (!mf) throw mwd::DataError("cannot open manifest '" + cfg.manifest + "'");
  const mwd::DatasetRecipe recipe = mwd::read_manifest(mf);
  const mwd::PairedDataset dataset = mwd::normalized(mwd::build_dataset(recipe));
  std::cout << "dataset: " << dataset.size() << " pairs, " << recipe.spec.height
            << "x" << recipe.spec.width << "\n";

  mwd::ModelParams<float> model =
      mwd::build_model<float>(cfg.model, mwd::mix_seed(cfg.train.seed, 0));
  std::cout << "model: " << model.parameter_count() << " parameters, levels="
            << cfg.model.levels << "\n";

  ensure_out_dir(cfg.out_dir);
  const std::string ckpt_path = join_path(cfg.out_dir, cfg.checkpoint);
  const auto t0 = std::chrono::steady_clock::now();
  const mwd::TrainResult result = mwd::train(
      model, dataset, cfg.train,
      [&](const mwd::ModelParams<float>& m, const mwd::EpochStats& s,
          bool is_checkpoint) {
        std::cout << "epoch " << s.epoch << " train_loss " << s.train_loss
                  << " test_loss " << s.test_loss << "\n";
        if (is_checkpoint) mwd::save_checkpoint(ckpt_path, m);
      });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string csv_path = join_path(cfg.out_dir, cfg.loss_csv);
  std::ofstream csv(csv_path);
  if (!csv) throw mwd::DataError("cannot open '" + csv_path + "' for writing");
  mwd::write_loss_csv(csv, result.log);
  std::cout << "trained " << result.log.size() << " epochs in " << secs
            << " s; wrote " << ckpt_path << " and " << csv_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_denoise(const GlobalArgs& g, const std::string& checkpoint,
                const std::vector<std::string>& inputs,
                const std::string& suffix, bool no_normalize, bool pgm) {
  mwd::set_threads(g.threads);
  const mwd::ModelParams<float> model = mwd::load_checkpoint(checkpoint);
  ensure_out_dir(g.out_dir);

  double total_ms = 0.0;
  for (const std::string& in_path : inputs) {
    mwd::Image img = mwd::read_image(in_path);
    if (!no_normalize) img = mwd::normalize(img);

    const auto t0 = std::chrono::steady_clock::now();
    const mwd::Tensor<float> out = mwd::forward(model, mwd::to_tensor(img));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    total_ms += ms;

    const mwd::Image result = mwd::from_tensor(out, img.pixel_spacing_mm);
    const std::string out_path = join_path(g.out_dir, output_name(in_path, suffix));
    mwd::write_image(out_path, result);
    if (pgm) mwd::write_pgm16(out_path + ".pgm", result);
    std::printf("%s -> %s (%.1f ms)\n", in_path.c_str(), out_path.c_str(), ms);
  }
  std::printf("mean latency %.1f ms/frame over %zu frames\n",
              total_ms / double(inputs.size()), inputs.size());
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_eval_paired(const std::vector<std::string>& outputs,
                    const std::vector<std::string>& truths, double i_max,
                    double k1, double k2, bool do_normalize, bool no_clamp,
                    const std::string& csv_path) {
  if (outputs.size() != truths.size())
    throw mwd::ConfigError("eval: need as many --truths as output files");
  if (outputs.empty()) throw mwd::ConfigError("eval: no files given");

  std::ostringstream csv;
  csv.precision(9);
  csv << "file,psnr_db,ssim\n";
  std::printf("%-32s %12s %10s\n", "file", "psnr_db", "ssim");
  double psnr_sum = 0.0, ssim_sum = 0.0;
  bool psnr_inf = false;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    mwd::Image out = mwd::read_image(outputs[i]);
    mwd::Image gt = mwd::read_image(truths[i]);
    if (do_normalize) {
      out = mwd::normalize(out);
      gt = mwd::normalize(gt);
    }
    if (!no_clamp) {
      out = mwd::clamp01(out);
      gt = mwd::clamp01(gt);
    }
    const double p = mwd::psnr(out, gt, i_max);
    const double s = mwd::ssim(out, gt, k1, k2);
    if (std::isinf(p)) psnr_inf = true;
    psnr_sum += p;
    ssim_sum += s;
    csv << outputs[i] << ',' << mwd::format_psnr(p) << ',' << s << '\n';
    std::printf("%-32s %12s %10.6f\n", outputs[i].c_str(),
                mwd::format_psnr(p).c_str(), s);
  }
  const double n = double(outputs.size());
  const std::string mean_psnr =
      psnr_inf ? "inf" : mwd::format_psnr(psnr_sum / n);
  csv << "mean," << mean_psnr << ',' << ssim_sum / n << '\n';
  std::printf("%-32s %12s %10.6f\n", "mean", mean_psnr.c_str(), ssim_sum / n);
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw mwd::DataError("cannot open '" + csv_path + "' for writing");
    f << csv.str();
    if (!f) throw mwd::DataError("write failed on '" + csv_path + "'");
  }
  return 0;
}

int cmd_eval_cnr(const std::vector<std::string>& images,
                 const std::string& roi_path, bool do_normalize,
                 const std::string& csv_path) {
  if (images.empty()) throw mwd::ConfigError("eval: no files given");
  std::ostringstream csv;
  csv.precision(9);
  csv << "file,cnr_db\n";
  std::printf("%-32s %12s\n", "file", "cnr_db");
  for (const std::string& path : images) {
    mwd::Image img = mwd::read_image(path);
    if (do_normalize) img = mwd::normalize(img);
    std::ifstream rf(roi_path);
    if (!rf) throw mwd::DataError("cannot open roi spec '" + roi_path + "'");
    const std::vector<mwd::Roi> rois = mwd::parse_roi_spec(rf, img);
    const auto value = mwd::cnr(img, rois);
    csv << path << ',' << mwd::format_cnr(value) << '\n';
    std::printf("%-32s %12s\n", path.c_str(), mwd::format_cnr(value).c_str());
  }
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw mwd::DataError("cannot open '" + csv_path + "' for writing");
    f << csv.str();
    if (!f) throw mwd::DataError("write failed on '" + csv_path + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_gradcheck(const GlobalArgs& g) {
  const auto results = mwd::run_gradient_checks(g.seed == 0 ? 12345 : g.seed);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("%-18s max_rel_err %.3e  tol %.0e  %s\n", r.name.c_str(),
                r.max_rel_err, r.tolerance, r.pass ? "PASS" : "FAIL");
    all_pass = all_pass && r.pass;
  }
  if (!all_pass) throw mwd::NumericError("gradcheck: at least one check failed");
  std::printf("all %zu gradient checks passed\n", results.size());
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_stack(const GlobalArgs& g, const std::vector<std::string>& inputs,
              const std::string& out_name) {
  std::vector<mwd::Image> frames;
  frames.reserve(inputs.size());
  for (const auto& p : inputs) frames.push_back(mwd::read_image(p));
  ensure_out_dir(g.out_dir);
  const std::string out_path = join_path(g.out_dir, out_name);
  mwd::write_volume(out_path, frames);
  std::cout << "stacked " << frames.size() << " frames into " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MWCNN denoising toolkit for low-fluence photoacoustic-style images"};
  app.require_subcommand(1);

  GlobalArgs g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for all randomness")
                       ->capture_default_str();
  app.add_option("--config", g.config, "Run-config file (key=value)");
  auto* outdir_opt =
      app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  auto* threads_opt =
      app.add_option("--threads", g.threads, "Worker threads (1 = deterministic default)")
          ->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic paired dataset");
  std::string scene = "strokes", presets = "40uJ", text = "UCSD", depths;
  int height = 64, width = 64, count = 10, strokes = 6;
  double spacing = 0.1, stroke_width = 1.5, stroke_intensity = 1.0, blur = 0.7;
  double attenuation = 0.0;
  std::uint64_t noise_seed = 0;
  bool pgm = false;
  gen->add_option("--scene", scene, "strokes | letters | depth_targets")
      ->capture_default_str();
  gen->add_option("--height", height)->capture_default_str();
  gen->add_option("--width", width)->capture_default_str();
  gen->add_option("--spacing", spacing, "Pixel spacing in mm")->capture_default_str();
  gen->add_option("--count", count, "Number of clean scenes")->capture_default_str();
  gen->add_option("--presets", presets, "Comma-separated degradation presets")
      ->capture_default_str();
  auto* nseed_opt = gen->add_option("--noise-seed", noise_seed,
                                    "Noise stream seed (default: derived from --seed)");
  gen->add_option("--strokes", strokes, "Strokes per scene")->capture_default_str();
  gen->add_option("--stroke-width", stroke_width, "Stroke width in px")
      ->capture_default_str();
  gen->add_option("--stroke-intensity", stroke_intensity)->capture_default_str();
  gen->add_option("--blur", blur, "PSF blur sigma in px")->capture_default_str();
  gen->add_option("--text", text, "Letter-scene text (A-Z, 0-9)")->capture_default_str();
  gen->add_option("--depths", depths, "Depth-scene target depths, mm, comma-separated");
  gen->add_option("--attenuation", attenuation, "Depth attenuation per mm")
      ->capture_default_str();
  gen->add_flag("--pgm", pgm, "Also export PGM previews");

  // train
  auto* train = app.add_subcommand("train", "Train a model from a run config");

  // denoise
  auto* denoise = app.add_subcommand("denoise", "Run a checkpoint over image files");
  std::string checkpoint, suffix = "_dn";
  std::vector<std::string> dn_inputs;
  bool no_normalize = false, dn_pgm = false;
  denoise->add_option("--checkpoint", checkpoint, "MWCK checkpoint file")->required();
  denoise->add_option("inputs", dn_inputs, "PAIF image files")->required();
  denoise->add_option("--suffix", suffix, "Output name suffix")->capture_default_str();
  denoise->add_flag("--no-normalize", no_normalize,
                    "Skip input min-max normalization");
  denoise->add_flag("--pgm", dn_pgm, "Also export PGM previews");

  // eval
  auto* eval = app.add_subcommand("eval", "Compute PSNR/SSIM (paired) or CNR (ROI) metrics");
  std::vector<std::string> ev_outputs, ev_truths;
  std::string roi_path, csv_path;
  double i_max = 1.0, k1 = 1e-4, k2 = 9e-4;
  bool ev_normalize = false, ev_no_clamp = false;
  eval->add_option("outputs", ev_outputs, "Images to score")->required();
  eval->add_option("--truths", ev_truths, "Ground-truth images (paired mode)");
  eval->add_option("--rois", roi_path,
                   "ROI spec file (CNR mode): role center_row_mm center_col_mm h_mm w_mm");
  eval->add_option("--csv", csv_path, "Write the report CSV here");
  eval->add_option("--i-max", i_max, "PSNR peak value")->capture_default_str();
  eval->add_option("--k1", k1, "SSIM mean-term constant")->capture_default_str();
  eval->add_option("--k2", k2, "SSIM variance-term constant")->capture_default_str();
  eval->add_flag("--normalize", ev_normalize, "Min-max normalize inputs first");
  eval->add_flag("--no-clamp", ev_no_clamp, "Skip the [0,1] clamp before scoring");

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference checks of every backward pass");

  // stack
  auto* stack = app.add_subcommand("stack", "Concatenate frames into a PAVF volume");
  std::vector<std::string> st_inputs;
  std::string st_out = "volume.pavf";
  stack->add_option("inputs", st_inputs, "PAIF frame files")->required();
  stack->add_option("--out", st_out, "Volume file name")->capture_default_str();

  try {
    app.parse(argc, argv);

    if (gen->parsed())
      return cmd_gen(g, scene, height, width, spacing, count, presets,
                     noise_seed, nseed_opt->count() > 0, strokes, stroke_width,
                     stroke_intensity, blur, text, depths, attenuation, pgm);
    if (train->parsed())
      return cmd_train(g, seed_opt->count() > 0, outdir_opt->count() > 0,
                       threads_opt->count() > 0 ? g.threads : -1);
    if (denoise->parsed())
      return cmd_denoise(g, checkpoint, dn_inputs, suffix, no_normalize, dn_pgm);
    if (eval->parsed()) {
      if (!roi_path.empty())
        return cmd_eval_cnr(ev_outputs, roi_path, ev_normalize, csv_path);
      return cmd_eval_paired(ev_outputs, ev_truths, i_max, k1, k2, ev_normalize,
                             ev_no_clamp, csv_path);
    }
    if (gradcheck->parsed()) return cmd_gradcheck(g);
    if (stack->parsed()) return cmd_stack(g, st_inputs, st_out);
    return 2;  // unreachable: require_subcommand guards this
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  } catch (const mwd::NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return 4;
  } catch (const mwd::Error& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
