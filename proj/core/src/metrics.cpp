#include "lfoacc/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <tbb/task_arena.h>

#include "lfoacc/cost.hpp"

namespace lfoacc {

EvalReport evaluate(const DisparityMap& estimate, const DisparityMap& truth,
                    const BoolGrid* eval_mask, const std::vector<double>& thresholds) {
  require(estimate.values.same_shape(truth.values), ErrorCode::shape_mismatch,
          "estimate and ground truth differ in shape");
  if (eval_mask) {
    require(eval_mask->height() == truth.height() && eval_mask->width() == truth.width(),
            ErrorCode::shape_mismatch, "evaluation mask differs in shape");
  }
  EvalReport report;
  std::vector<std::size_t> bad(thresholds.size(), 0);
  double sq = 0.0;
  const auto est = estimate.values.values();
  const auto gt = truth.values.values();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (eval_mask && !eval_mask->values()[i]) continue;
    const double err = static_cast<double>(est[i]) - static_cast<double>(gt[i]);
    sq += err * err;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (std::abs(err) > thresholds[t]) ++bad[t];
    }
    ++report.pixel_count;
  }
  require(report.pixel_count > 0, ErrorCode::invalid_argument, "evaluation set is empty");
  const double n = static_cast<double>(report.pixel_count);
  report.mse_x100 = 100.0 * sq / n;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    report.badpix[thresholds[t]] = 100.0 * static_cast<double>(bad[t]) / n;
  }
  if (eval_mask) report.mask = *eval_mask;
  return report;
}

BoolGrid textured_pixels(const LightField& lf, float threshold) {
  require(lf.C() == 1, ErrorCode::invalid_argument, "textured_pixels expects C = 1");
  const int H = lf.H(), W = lf.W();
  const int u = lf.center_u(), v = lf.center_v();
  BoolGrid out(H, W, 0);
  for (int h = 0; h < H; ++h) {
    for (int w = 0; w < W; ++w) {
      double s = 0.0, s2 = 0.0;
      for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
          const double x = lf.at(u, v, std::clamp(h + i, 0, H - 1), std::clamp(w + j, 0, W - 1));
          s += x;
          s2 += x * x;
        }
      }
      const double mean = s / 9.0;
      const double sd = std::sqrt(std::max(0.0, s2 / 9.0 - mean * mean));
      out(h, w) = sd > threshold ? 1 : 0;
    }
  }
  return out;
}

std::string format_text(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "pixels    : " << report.pixel_count << "\n";
  os << "mse_x100  : " << report.mse_x100 << "\n";
  for (auto it = report.badpix.rbegin(); it != report.badpix.rend(); ++it) {
    os << "badpix(" << std::setprecision(2) << it->first << ") : " << std::setprecision(4)
       << it->second << " %\n";
  }
  return os.str();
}

std::string format_key_value(const EvalReport& report) {
  std::ostringstream os;
  os << std::setprecision(9);
  os << "pixel_count=" << report.pixel_count << "\n";
  os << "mse_x100=" << report.mse_x100 << "\n";
  for (auto it = report.badpix.rbegin(); it != report.badpix.rend(); ++it) {
    os << "badpix_" << std::setprecision(3) << it->first << "=" << std::setprecision(9)
       << it->second << "\n";
  }
  return os.str();
}

const MethodTiming& BenchReport::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.name == name) return m;
  }
  fail(ErrorCode::invalid_argument, "no benchmarked method named " + name);
}

namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double checksum(const std::vector<CostVolume>& volumes) {
  double s = 0.0;
  for (const auto& v : volumes) {
    for (float x : v.values()) s += x;
  }
  return s;
}

std::string machine_descriptor(int threads) {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  std::ostringstream os;
  os << cpu << "; hw_threads=" << std::thread::hardware_concurrency()
     << "; bench_threads=" << threads;
#if defined(__VERSION__)
  os << "; compiler=" << __VERSION__;
#endif
  return os.str();
}

template <class F>
MethodTiming time_method(const std::string& name, int repeats, tbb::task_arena& arena,
                         std::vector<CostVolume>& result, F&& run) {
  MethodTiming timing;
  timing.name = name;
  for (int r = 0; r < repeats; ++r) {
    result.clear();
    PeakScope scope;
    const auto t0 = std::chrono::steady_clock::now();
    arena.execute([&] { result = run(); });
    const auto t1 = std::chrono::steady_clock::now();
    timing.samples_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    timing.peak_aux_bytes = std::max(timing.peak_aux_bytes, scope.peak_above_baseline());
  }
  timing.median_seconds = median(timing.samples_seconds);
  timing.checksum = checksum(result);
  return timing;
}

}  // namespace

BenchReport bench_cost(const LightField& lf, DispRange range, int repeats, int threads) {
  require(repeats >= 3, ErrorCode::invalid_argument, "bench_cost needs at least 3 repeats");
  require(threads >= 1, ErrorCode::invalid_argument, "bench_cost needs threads >= 1");

  BenchReport report;
  report.threads = threads;
  report.repeats = repeats;
  report.shape = lf.shape();
  report.range = range;
  report.machine = machine_descriptor(threads);

  tbb::task_arena arena(threads);

  // Inputs for the oacc path, prepared outside the timed and accounted region
  // the way the light field itself is.
  const Mosaic mosaic = build_mosaic(lf, required_pad(lf.U(), lf.V(), range));
  const MaskSet masks = MaskSet::ones(lf.view_count(), lf.H(), lf.W());
  const KernelWeights weights = KernelWeights::uniform(lf.U(), lf.V());
  report.mosaic_bytes = mosaic.byte_size();

  std::vector<CostVolume> baseline;
  report.methods.push_back(
      time_method("shift_and_concat", repeats, arena, baseline, [&] {
        const GatherVolume volume = shift_and_concat_gather(lf, range);
        report.gather_volume_bytes = volume.byte_size();
        return mean_over_views(volume);
      }));

  std::vector<CostVolume> oacc;
  report.methods.push_back(time_method("oacc", repeats, arena, oacc, [&] {
    return oacc_forward(mosaic, weights, masks, range, kDefaultMaskEps);
  }));

  double diff = 0.0;
  for (std::size_t c = 0; c < baseline.size(); ++c) {
    const auto a = baseline[c].values();
    const auto b = oacc[c].values();
    for (std::size_t i = 0; i < a.size(); ++i) {
      diff = std::max(diff, static_cast<double>(std::abs(a[i] - b[i])));
    }
  }
  report.max_abs_diff = diff;
  if (!(diff <= kBenchEqualityTolerance)) {
    std::ostringstream os;
    os << "oacc output differs from shift-and-concat by " << diff << " (tolerance "
       << kBenchEqualityTolerance << "); refusing to report timings";
    fail(ErrorCode::verification, os.str());
  }
  return report;
}

std::string format_text(const BenchReport& report) {
  std::ostringstream os;
  const auto& s = report.shape;
  os << "cost construction benchmark\n";
  os << "  light field   : " << s.U << "x" << s.V << " views, " << s.H << "x" << s.W << ", C="
     << s.C << "\n";
  os << "  disparities   : [" << report.range.min << ", " << report.range.max << "] ("
     << report.range.count() << " levels)\n";
  os << "  repeats       : " << report.repeats << "\n";
  os << "  machine       : " << report.machine << "\n";
  os << "  max |diff|    : " << std::scientific << std::setprecision(3) << report.max_abs_diff
     << std::defaultfloat << "\n";
  os << "  mosaic bytes  : " << report.mosaic_bytes << " (oacc input layout)\n";
  os << "  gather volume : " << report.gather_volume_bytes << " bytes\n";
  os << std::fixed;
  for (const auto& m : report.methods) {
    os << "  " << std::left << std::setw(17) << m.name << std::right
       << " median " << std::setprecision(6) << m.median_seconds << " s"
       << "  peak aux " << m.peak_aux_bytes << " B"
       << "  checksum " << std::setprecision(6) << m.checksum << "\n";
  }
  return os.str();
}

std::string format_key_value(const BenchReport& report) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "U=" << report.shape.U << "\nV=" << report.shape.V << "\nH=" << report.shape.H
     << "\nW=" << report.shape.W << "\nC=" << report.shape.C << "\n";
  os << "disp_min=" << report.range.min << "\ndisp_max=" << report.range.max << "\n";
  os << "repeats=" << report.repeats << "\nthreads=" << report.threads << "\n";
  os << "machine=" << report.machine << "\n";
  os << "max_abs_diff=" << report.max_abs_diff << "\n";
  os << "mosaic_bytes=" << report.mosaic_bytes << "\n";
  os << "gather_volume_bytes=" << report.gather_volume_bytes << "\n";
  for (const auto& m : report.methods) {
    os << m.name << ".median_seconds=" << m.median_seconds << "\n";
    os << m.name << ".peak_aux_bytes=" << m.peak_aux_bytes << "\n";
    os << m.name << ".checksum=" << m.checksum << "\n";
  }
  return os.str();
}

}  // namespace lfoacc
