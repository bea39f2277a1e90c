#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lfoacc/disparity.hpp"
#include "lfoacc/grid.hpp"
#include "lfoacc/light_field.hpp"

namespace lfoacc {

inline const std::vector<double> kDefaultBadPixThresholds{0.07, 0.03, 0.01};

struct EvalReport {
  double mse_x100 = 0.0;
  std::map<double, double> badpix;  // threshold -> percentage of pixels
  std::size_t pixel_count = 0;
  std::optional<BoolGrid> mask;
};

/// MSE×100 and BadPix percentages over the pixels selected by `eval_mask`
/// (all pixels when null).
EvalReport evaluate(const DisparityMap& estimate, const DisparityMap& truth,
                    const BoolGrid* eval_mask = nullptr,
                    const std::vector<double>& thresholds = kDefaultBadPixThresholds);

/// Center-view pixels whose 3×3 neighbourhood (clamped) has standard
/// deviation above `threshold`.
BoolGrid textured_pixels(const LightField& lf, float threshold = 0.02f);

std::string format_text(const EvalReport& report);
std::string format_key_value(const EvalReport& report);

struct MethodTiming {
  std::string name;
  double median_seconds = 0.0;
  std::vector<double> samples_seconds;
  std::size_t peak_aux_bytes = 0;
  double checksum = 0.0;
};

struct BenchReport {
  std::vector<MethodTiming> methods;  // [0] shift-and-concat, [1] oacc
  std::string machine;
  int threads = 1;
  int repeats = 0;
  LightFieldShape shape;
  DispRange range;
  std::size_t mosaic_bytes = 0;       // input layout for the oacc path
  std::size_t gather_volume_bytes = 0;
  double max_abs_diff = 0.0;

  const MethodTiming& method(const std::string& name) const;
};

inline constexpr double kBenchEqualityTolerance = 1e-6;

/// Times shift-and-concat + view mean against oacc_forward with unit weights
/// and all-ones masks on the same light field. Refuses to report (throws
/// ErrorCode::verification) when the two outputs differ by more than
/// kBenchEqualityTolerance. Timed sections run in a task arena capped at
/// `threads`.
BenchReport bench_cost(const LightField& lf, DispRange range, int repeats, int threads = 1);

std::string format_text(const BenchReport& report);
std::string format_key_value(const BenchReport& report);

}  // namespace lfoacc
