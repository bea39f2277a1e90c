#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lfoacc/io.hpp"

namespace lfoacc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::format, "scene config: bad value for " + std::string(key) + ": '" +
                                std::string(text) + "'");
  }
  return value;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::missing_file, "missing file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

void SceneConfig::validate() const {
  require(U >= 1 && V >= 1, ErrorCode::invalid_argument, "scene config: U and V must be >= 1");
  require(disp_min <= disp_max, ErrorCode::invalid_argument,
          "scene config: disp_min must not exceed disp_max");
  require(!focal_length || *focal_length > 0.0, ErrorCode::invalid_argument,
          "scene config: focal_length must be > 0");
  require(!baseline || *baseline > 0.0, ErrorCode::invalid_argument,
          "scene config: baseline must be > 0");
}

std::optional<double> SceneConfig::depth_for(double disparity) const {
  if (!focal_length || !baseline || disparity == 0.0) return std::nullopt;
  return *focal_length * *baseline / disparity;
}

SceneConfig parse_scene_config(std::string_view text) {
  SceneConfig cfg;
  bool seen_u = false, seen_v = false, seen_min = false, seen_max = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::format, "scene config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "U") {
      cfg.U = parse_number<int>(value, key), seen_u = true;
    } else if (key == "V") {
      cfg.V = parse_number<int>(value, key), seen_v = true;
    } else if (key == "disp_min") {
      cfg.disp_min = parse_number<int>(value, key), seen_min = true;
    } else if (key == "disp_max") {
      cfg.disp_max = parse_number<int>(value, key), seen_max = true;
    } else if (key == "focal_length") {
      cfg.focal_length = parse_number<double>(value, key);
    } else if (key == "baseline") {
      cfg.baseline = parse_number<double>(value, key);
    } else {
      fail(ErrorCode::format, "scene config: unknown key '" + std::string(key) + "'");
    }
  }
  require(seen_u && seen_v && seen_min && seen_max, ErrorCode::format,
          "scene config must define U, V, disp_min and disp_max");
  cfg.validate();
  return cfg;
}

std::string format_scene_config(const SceneConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "# light field scene\n";
  os << "U = " << cfg.U << "\nV = " << cfg.V << "\n";
  os << "disp_min = " << cfg.disp_min << "\ndisp_max = " << cfg.disp_max << "\n";
  if (cfg.focal_length) os << "focal_length = " << *cfg.focal_length << "\n";
  if (cfg.baseline) os << "baseline = " << *cfg.baseline << "\n";
  return os.str();
}

std::string format_view_name(std::string_view pattern, int index) {
  const auto pct = pattern.find('%');
  require(pct != std::string_view::npos, ErrorCode::invalid_argument,
          "view pattern needs a %d token");
  std::size_t pos = pct + 1;
  bool zero = false;
  if (pos < pattern.size() && pattern[pos] == '0') zero = true, ++pos;
  int width = 0;
  while (pos < pattern.size() && pattern[pos] >= '0' && pattern[pos] <= '9') {
    width = width * 10 + (pattern[pos++] - '0');
  }
  require(pos < pattern.size() && pattern[pos] == 'd', ErrorCode::invalid_argument,
          "view pattern token must look like %d or %03d");
  require(pattern.find('%', pos) == std::string_view::npos, ErrorCode::invalid_argument,
          "view pattern must contain exactly one token");
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), zero ? '0' : ' ');
  }
  return std::string(pattern.substr(0, pct)) + digits + std::string(pattern.substr(pos + 1));
}

std::filesystem::path ScenePaths::view_path(int index) const {
  return directory / format_view_name(view_pattern, index);
}

LoadedScene load_scene(const ScenePaths& paths) {
  const SceneConfig cfg = parse_scene_config(read_text(paths.directory / paths.config));
  const int views = cfg.U * cfg.V;

  std::vector<Image8> images;
  images.reserve(static_cast<std::size_t>(views));
  for (int i = 0; i < views; ++i) {
    const auto path = paths.view_path(i);
    if (!std::filesystem::exists(path)) {
      fail(ErrorCode::missing_file, "missing view image " + path.string() + " (scene expects " +
                                        std::to_string(views) + " views)");
    }
    images.push_back(read_png(path));
    const auto& first = images.front();
    const auto& img = images.back();
    require(img.height == first.height && img.width == first.width &&
                img.channels == first.channels,
            ErrorCode::shape_mismatch,
            "view " + path.string() + " differs in size or channels from view 0");
  }
  if (std::filesystem::exists(paths.view_path(views))) {
    fail(ErrorCode::shape_mismatch, "scene directory holds more than U*V = " +
                                        std::to_string(views) + " views");
  }

  const auto& first = images.front();
  LightFieldShape shape{cfg.U, cfg.V, first.height, first.width, first.channels};
  std::vector<float> samples;
  samples.reserve(shape.sample_count());
  // Row-major view order puts image i at (u, v) = (i / V, i % V), which is
  // also the storage order of LightField.
  for (const auto& img : images) {
    for (std::uint8_t b : img.data) samples.push_back(static_cast<float>(b) / 255.0f);
  }
  LightField lf = to_grayscale(LightField(shape, std::move(samples)));

  std::optional<DisparityMap> gt;
  if (paths.ground_truth) {
    const auto gt_path = paths.directory / *paths.ground_truth;
    if (std::filesystem::exists(gt_path)) {
      auto pfm = read_pfm_file(gt_path);
      require(pfm.grid.height() == lf.H() && pfm.grid.width() == lf.W(),
              ErrorCode::shape_mismatch, "ground-truth disparity size differs from the views");
      gt = DisparityMap(std::move(pfm.grid));
    }
  }
  return LoadedScene{std::move(lf), cfg, std::move(gt)};
}

void export_scene(const std::filesystem::path& directory, const LightField& lf,
                  const SceneConfig& config, const DisparityMap* ground_truth) {
  require(lf.C() == 1, ErrorCode::invalid_argument, "export_scene expects a grayscale light field");
  require(config.U == lf.U() && config.V == lf.V(), ErrorCode::shape_mismatch,
          "scene config angular extents differ from the light field");
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + directory.string() + ": " + ec.message());

  ScenePaths paths;
  paths.directory = directory;
  for (int u = 0; u < lf.U(); ++u) {
    for (int v = 0; v < lf.V(); ++v) {
      const auto sai = lf.sai(u, v);
      FloatGrid view(lf.H(), lf.W(), std::vector<float>(sai.begin(), sai.end()));
      write_png(paths.view_path(u * lf.V() + v), to_image8(view));
    }
  }
  if (ground_truth) write_pfm_file(directory / *paths.ground_truth, ground_truth->values);
  std::ofstream cfg(directory / paths.config);
  if (!cfg) fail(ErrorCode::io, "cannot write scene config in " + directory.string());
  cfg << format_scene_config(config);
}

}  // namespace lfoacc
