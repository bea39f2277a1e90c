#include "lfoacc/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <tbb/global_control.h>

#include <CLI11.hpp>

#include "lfoacc/estimator.hpp"
#include "lfoacc/io.hpp"
#include "lfoacc/metrics.hpp"
#include "lfoacc/occlusion.hpp"
#include "lfoacc/synth.hpp"

namespace lfoacc::cli {

namespace {

namespace fs = std::filesystem;

// A failure inside a named pipeline stage.
struct StageError : std::runtime_error {
  StageError(std::string stage_name, const std::string& what)
      : std::runtime_error(what), stage(std::move(stage_name)) {}
  std::string stage;
};

template <class F>
auto stage(std::string name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::move(name), e.what());
  }
}

struct EstimatorFlags {
  int iterations = 2;
  float q = kDefaultDecayRate;
  float alpha = 10.0f;
  int window = 5;
  RegressionMode mode = RegressionMode::softmax;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--iters", iterations, "Mask-refinement iterations")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--q", q, "Decaying rate of the residual-to-mask remap")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--alpha", alpha, "Softmax sharpness")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--window", window, "Odd box-aggregation window")->capture_default_str();
    const std::map<std::string, RegressionMode> modes{{"softmax", RegressionMode::softmax},
                                                      {"argmin", RegressionMode::argmin}};
    cmd.add_option("--mode", mode, "Disparity regression: softmax | argmin")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
        ->default_str("softmax");
  }

  EstimatorConfig config(DispRange range) const {
    EstimatorConfig cfg;
    cfg.range = range;
    cfg.iterations = iterations;
    cfg.q = q;
    cfg.alpha = alpha;
    cfg.window = window;
    cfg.mode = mode;
    cfg.validate();
    return cfg;
  }
};

LoadedScene load(const fs::path& dir) {
  return stage("load scene", [&] { return load_scene(ScenePaths{dir}); });
}

DisparityMap load_disparity(const fs::path& path, const std::string& what) {
  return stage("read " + what, [&] {
    return DisparityMap(read_pfm_file(path).grid);
  });
}

void write_disparity(const fs::path& path, const DisparityMap& map) {
  stage("write " + path.string(), [&] { write_pfm_file(path, map.values); });
}

fs::path iteration_path(const fs::path& out, int iteration) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + ".iter" + std::to_string(iteration) +
                     out.extension().string());
  return p;
}

void ensure_directory(const fs::path& dir) {
  stage("create " + dir.string(), [&] {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create directory " + dir.string() + ": " + ec.message());
  });
}

// Red where |err| > threshold, otherwise the ground truth as gray.
Image8 error_map(const DisparityMap& est, const DisparityMap& gt, double threshold) {
  const int H = gt.height(), W = gt.width();
  float lo = gt.values.values()[0], hi = lo;
  for (float d : gt.values.values()) lo = std::min(lo, d), hi = std::max(hi, d);
  const float span = hi > lo ? hi - lo : 1.0f;
  Image8 img{H, W, 3, std::vector<std::uint8_t>(static_cast<std::size_t>(H) * W * 3)};
  for (int h = 0; h < H; ++h) {
    for (int w = 0; w < W; ++w) {
      std::uint8_t* px = &img.data[(static_cast<std::size_t>(h) * W + w) * 3];
      if (std::abs(static_cast<double>(est(h, w)) - gt(h, w)) > threshold) {
        px[0] = 255, px[1] = 0, px[2] = 0;
      } else {
        const auto g = static_cast<std::uint8_t>(std::lround(64 + 160 * (gt(h, w) - lo) / span));
        px[0] = px[1] = px[2] = g;
      }
    }
  }
  return img;
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("LF_OACC_THREADS")) {
    int n = 0;
    std::istringstream in(env);
    if (in >> n && n > 0) return n;
    throw CLI::ValidationError("LF_OACC_THREADS", std::string("must be a positive integer, got '") +
                                                      env + "'");
  }
  return 0;  // no cap
}

template <class T>
void write_text(const fs::path& path, const T& report) {
  stage("write " + path.string(), [&] {
    std::ofstream out(path, std::ios::binary);
    out << format_key_value(report);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occlusion-aware cost construction for light-field depth estimation", "lf_oacc"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads_flag = 0;
  app.add_option("--threads", threads_flag,
                 "Worker thread cap (default: LF_OACC_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);

  EstimatorFlags est_flags;

  // estimate
  fs::path est_scene, est_out, est_mask_disp;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate the center-view disparity");
  estimate_cmd->add_option("scene_dir", est_scene, "Scene directory")->required();
  estimate_cmd->add_option("-o,--output", est_out, "Output disparity PFM")->required();
  estimate_cmd->add_option("--mask-disp", est_mask_disp,
                           "Derive masks once from this disparity PFM instead of iterating");
  est_flags.add_to(*estimate_cmd);

  // eval
  fs::path eval_est, eval_gt, eval_error_map, eval_report;
  std::vector<double> eval_badpix = kDefaultBadPixThresholds;
  auto* eval_cmd = app.add_subcommand("eval", "Score a disparity map against ground truth");
  eval_cmd->add_option("estimate", eval_est, "Estimated disparity PFM")->required();
  eval_cmd->add_option("ground_truth", eval_gt, "Ground-truth disparity PFM")->required();
  eval_cmd->add_option("--badpix", eval_badpix, "Comma-separated BadPix thresholds")
      ->delimiter(',')->check(CLI::PositiveNumber);
  eval_cmd->add_option("--error-map", eval_error_map,
                       "PNG with |error| > 0.07 marked red");
  eval_cmd->add_option("--report", eval_report, "Also write key=value report");

  // masks
  fs::path masks_scene, masks_disp, masks_out;
  float masks_q = kDefaultDecayRate;
  auto* masks_cmd = app.add_subcommand("masks", "Dump per-view occlusion masks as PNGs");
  masks_cmd->add_option("scene_dir", masks_scene, "Scene directory")->required();
  masks_cmd->add_option("--disp", masks_disp, "Disparity PFM used for warping")->required();
  masks_cmd->add_option("--q", masks_q, "Decaying rate")->check(CLI::PositiveNumber)
      ->capture_default_str();
  masks_cmd->add_option("-o,--output", masks_out, "Output directory")->required();

  // synth
  fs::path synth_spec, synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic scene with ground truth");
  synth_cmd->add_option("spec", synth_spec, "Scene description file")->required();
  synth_cmd->add_option("-o,--output", synth_out, "Output scene directory")->required();
  synth_cmd->add_option("--seed", synth_seed, "Texture and noise seed")->capture_default_str();

  // bench
  fs::path bench_scene, bench_report;
  int bench_repeats = 5;
  auto* bench_cmd = app.add_subcommand("bench", "Time cost construction: shift-and-concat vs OACC");
  bench_cmd->add_option("scene_dir", bench_scene, "Scene directory")->required();
  bench_cmd->add_option("--repeats", bench_repeats, "Timed repetitions (>= 3)")
      ->check(CLI::Range(3, 1000))->capture_default_str();
  bench_cmd->add_option("--report", bench_report, "Also write key=value report");

  // sweep-q
  fs::path sweep_scene, sweep_gt, sweep_report;
  std::vector<float> sweep_qs{1, 2, 3, 4, 5};
  auto* sweep_cmd = app.add_subcommand("sweep-q", "MSE x100 as a function of the decaying rate");
  sweep_cmd->add_option("scene_dir", sweep_scene, "Scene directory")->required();
  sweep_cmd->add_option("--gt", sweep_gt, "Ground-truth disparity PFM")->required();
  sweep_cmd->add_option("--q-list", sweep_qs, "Comma-separated decaying rates")
      ->delimiter(',')->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--report", sweep_report, "Also write key=value report");
  est_flags.add_to(*sweep_cmd);

  std::vector<std::string> argv_rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());  // CLI11 consumes from the back
  try {
    app.parse(argv_rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "lf_oacc: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    const int threads = resolve_threads(threads_flag);
    std::optional<tbb::global_control> cap;
    if (threads > 0) cap.emplace(tbb::global_control::max_allowed_parallelism, threads);

    if (*estimate_cmd) {
      const auto scene = load(est_scene);
      const auto cfg_base = stage("configure", [&] { return est_flags.config(scene.config.range()); });
      EstimatorConfig cfg = cfg_base;
      std::optional<DisparityMap> mask_disp;
      if (!est_mask_disp.empty()) {
        mask_disp = load_disparity(est_mask_disp, "mask disparity");
        cfg.mask_source = MaskSource::external;
      }
      const auto result = stage("estimate", [&] {
        return estimate(scene.light_field, cfg, mask_disp ? &*mask_disp : nullptr);
      });
      write_disparity(est_out, result.disparity);
      for (std::size_t i = 0; i < result.trace.size(); ++i) {
        write_disparity(iteration_path(est_out, static_cast<int>(i) + 1), result.trace[i]);
      }
      out << "wrote " << est_out.string() << " (" << result.trace.size() << " iteration"
          << (result.trace.size() == 1 ? "" : "s") << ")\n";
      return 0;
    }

    if (*eval_cmd) {
      const auto est = load_disparity(eval_est, "estimate");
      const auto gt = load_disparity(eval_gt, "ground truth");
      const auto report = stage("evaluate", [&] { return evaluate(est, gt, nullptr, eval_badpix); });
      out << format_text(report);
      if (!eval_report.empty()) write_text(eval_report, report);
      if (!eval_error_map.empty()) {
        stage("write " + eval_error_map.string(),
              [&] { write_png(eval_error_map, error_map(est, gt, 0.07)); });
      }
      return 0;
    }

    if (*masks_cmd) {
      const auto scene = load(masks_scene);
      const auto disp = load_disparity(masks_disp, "disparity");
      const auto masks =
          stage("compute masks", [&] { return compute_masks(scene.light_field, disp, masks_q); });
      ensure_directory(masks_out);
      for (int k = 0; k < masks.views(); ++k) {
        const auto view = masks.view(k);
        const FloatGrid grid(masks.height(), masks.width(), std::vector<float>(view.begin(), view.end()));
        const fs::path path = masks_out / format_view_name("mask_%03d.png", k);
        stage("write " + path.string(), [&] { write_png(path, to_image8(grid)); });
      }
      out << "wrote " << masks.views() << " masks to " << masks_out.string() << "\n";
      return 0;
    }

    if (*synth_cmd) {
      const auto spec = stage("read spec", [&] {
        std::ifstream in(synth_spec, std::ios::binary);
        if (!in) fail(ErrorCode::missing_file, "missing file " + synth_spec.string());
        std::ostringstream text;
        text << in.rdbuf();
        return parse_scene_spec(text.str());
      });
      const auto scene = stage("render", [&] { return render(spec, synth_seed); });
      SceneConfig cfg;
      cfg.U = spec.U;
      cfg.V = spec.V;
      cfg.disp_min = spec.range.min;
      cfg.disp_max = spec.range.max;
      cfg.focal_length = spec.focal_length;
      cfg.baseline = spec.baseline;
      ensure_directory(synth_out);
      stage("export scene", [&] {
        export_scene(synth_out, scene.light_field, cfg, &scene.truth.disparity);
      });
      out << "wrote " << spec.U * spec.V << " views and ground truth to " << synth_out.string()
          << "\n";
      return 0;
    }

    if (*bench_cmd) {
      const auto scene = load(bench_scene);
      const int bench_threads =
          threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      const auto report = stage("bench", [&] {
        return bench_cost(scene.light_field, scene.config.range(), bench_repeats, bench_threads);
      });
      out << format_text(report);
      if (!bench_report.empty()) write_text(bench_report, report);
      return 0;
    }

    if (*sweep_cmd) {
      const auto scene = load(sweep_scene);
      const auto gt = load_disparity(sweep_gt, "ground truth");
      EstimatorConfig cfg = stage("configure", [&] { return est_flags.config(scene.config.range()); });
      std::ostringstream kv;
      kv << std::setprecision(9);
      out << "q      mse_x100    badpix(0.07)\n";
      for (float q : sweep_qs) {
        cfg.q = q;
        std::ostringstream name;
        name << "estimate q=" << q;
        const auto result = stage(name.str(), [&] { return estimate(scene.light_field, cfg); });
        const auto report = stage("evaluate", [&] { return evaluate(result.disparity, gt); });
        out << std::fixed << std::setprecision(2) << std::setw(5) << q << "  " << std::setprecision(4)
            << std::setw(10) << report.mse_x100 << "  " << std::setw(10) << report.badpix.at(0.07)
            << " %\n";
        out.unsetf(std::ios::floatfield);
        kv << "q_" << q << ".mse_x100=" << report.mse_x100 << "\n";
      }
      if (!sweep_report.empty()) {
        stage("write " + sweep_report.string(), [&] {
          std::ofstream f(sweep_report, std::ios::binary);
          f << kv.str();
          if (!f) fail(ErrorCode::io, "cannot write " + sweep_report.string());
        });
      }
      return 0;
    }
  } catch (const StageError& e) {
    err << "lf_oacc " << command << ": " << e.stage << " failed: " << e.what() << "\n";
    return 1;
  } catch (const CLI::Error& e) {
    err << "lf_oacc " << command << ": " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 2;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, out, err);
}

}  // namespace lfoacc::cli
