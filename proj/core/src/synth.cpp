#include "lfoacc/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace lfoacc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double lattice(std::int64_t i, std::int64_t j, std::uint64_t key) noexcept {
  const std::uint64_t h = splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(i) * 0x632BE59BD9B4E019ull +
                                                      static_cast<std::uint64_t>(j)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) noexcept { return t * t * (3.0 - 2.0 * t); }

}  // namespace

Region Region::rect(int top, int left, int bottom, int right) {
  require(top < bottom && left < right, ErrorCode::invalid_argument,
          "rect region needs top < bottom and left < right");
  Region r;
  r.kind = Kind::rect;
  r.top = top, r.left = left, r.bottom = bottom, r.right = right;
  return r;
}

Region Region::disk(int cy, int cx, int radius) {
  require(radius >= 0, ErrorCode::invalid_argument, "disk radius must be >= 0");
  Region r;
  r.kind = Kind::disk;
  r.cy = cy, r.cx = cx, r.radius = radius;
  return r;
}

bool Region::contains(int h, int w) const noexcept {
  switch (kind) {
    case Kind::full: return true;
    case Kind::rect: return h >= top && h < bottom && w >= left && w < right;
    case Kind::disk: {
      const long long dy = h - cy, dx = w - cx;
      return dy * dy + dx * dx <= static_cast<long long>(radius) * radius;
    }
  }
  return false;
}

float Texture::sample(int h, int w, std::uint64_t scene_seed) const noexcept {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(scene_seed));
  double t = 0.0;
  switch (pattern) {
    case Pattern::constant:
      return level;
    case Pattern::stripes:
      t = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (h + 0.5 * w) / scale +
                               static_cast<double>(key % 1024) / 163.0);
      break;
    case Pattern::value_noise: {
      const double gy = h / scale, gx = w / scale;
      const double fy0 = std::floor(gy), fx0 = std::floor(gx);
      const auto iy = static_cast<std::int64_t>(fy0), ix = static_cast<std::int64_t>(fx0);
      const double ty = smooth(gy - fy0), tx = smooth(gx - fx0);
      const double top = (1 - tx) * lattice(iy, ix, key) + tx * lattice(iy, ix + 1, key);
      const double bot = (1 - tx) * lattice(iy + 1, ix, key) + tx * lattice(iy + 1, ix + 1, key);
      t = (1 - ty) * top + ty * bot;
      break;
    }
  }
  return static_cast<float>(low + (high - low) * t);
}

void SceneSpec::validate() const {
  require(U >= 1 && V >= 1 && H >= 1 && W >= 1, ErrorCode::invalid_argument,
          "scene extents must be >= 1");
  require(!layers.empty() && layers.back().region.kind == Region::Kind::full,
          ErrorCode::invalid_argument, "the last layer must be the full-coverage background");
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    require(layers[i].region.kind != Region::Kind::full, ErrorCode::invalid_argument,
            "only the background layer may cover the full view");
  }
  for (const auto& layer : layers) {
    require(layer.texture.scale > 0.0, ErrorCode::invalid_argument, "texture scale must be > 0");
  }
  require(range.min <= range.max, ErrorCode::invalid_argument, "disp_min must not exceed disp_max");
  require(noise_sigma >= 0.0f && std::isfinite(noise_sigma), ErrorCode::invalid_argument,
          "noise sigma must be >= 0");
}

RenderedScene render(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int U = spec.U, V = spec.V, H = spec.H, W = spec.W;
  const int uc = (U - 1) / 2, vc = (V - 1) / 2;
  const auto shape = spec.shape();
  const std::size_t plane = static_cast<std::size_t>(H) * W;

  std::vector<float> samples(shape.sample_count());
  std::vector<std::uint16_t> owner(shape.sample_count());
  for (int u = 0; u < U; ++u) {
    for (int v = 0; v < V; ++v) {
      const std::size_t base = (static_cast<std::size_t>(u) * V + v) * plane;
      for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
          for (std::size_t l = 0; l < spec.layers.size(); ++l) {
            const Layer& layer = spec.layers[l];
            // Undo the view's parallax to get the layer's surface coordinate.
            const int sh = h - (uc - u) * layer.disparity;
            const int sw = w - (vc - v) * layer.disparity;
            if (!layer.region.contains(sh, sw)) continue;
            samples[base + static_cast<std::size_t>(h) * W + w] = layer.texture.sample(sh, sw, seed);
            owner[base + static_cast<std::size_t>(h) * W + w] = static_cast<std::uint16_t>(l);
            break;
          }
        }
      }
    }
  }

  const std::size_t center_base = (static_cast<std::size_t>(uc) * V + vc) * plane;
  DisparityMap disparity(H, W);
  for (int h = 0; h < H; ++h) {
    for (int w = 0; w < W; ++w) {
      disparity(h, w) = static_cast<float>(
          spec.layers[owner[center_base + static_cast<std::size_t>(h) * W + w]].disparity);
    }
  }

  std::vector<float> occ(static_cast<std::size_t>(U) * V * plane, 0.0f);
  for (int u = 0; u < U; ++u) {
    for (int v = 0; v < V; ++v) {
      const std::size_t k = static_cast<std::size_t>(u) * V + v;
      for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
          const auto l = owner[center_base + static_cast<std::size_t>(h) * W + w];
          const int d = spec.layers[l].disparity;
          const int hk = h + (uc - u) * d;
          const int wk = w + (vc - v) * d;
          if (hk < 0 || hk >= H || wk < 0 || wk >= W) continue;
          if (owner[k * plane + static_cast<std::size_t>(hk) * W + wk] == l) {
            occ[k * plane + static_cast<std::size_t>(h) * W + w] = 1.0f;
          }
        }
      }
    }
  }

  if (spec.noise_sigma > 0.0f) {
    std::mt19937_64 rng(splitmix64(seed ^ 0x6E6F697365ull));
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (float& x : samples) {
      x = static_cast<float>(std::clamp(x + noise(rng), 0.0, 1.0));
    }
  }

  return RenderedScene{LightField(shape, std::move(samples)),
                       GroundTruth{std::move(disparity), MaskSet(U * V, H, W, std::move(occ))}};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    if constexpr (std::is_integral_v<T>) {
      double probe{};
      const auto [p2, e2] = std::from_chars(text.data(), end, probe);
      if (e2 == std::errc() && p2 == end) {
        fail(ErrorCode::invalid_argument,
             "scene spec: " + std::string(what) + " must be an integer, got " + std::string(text));
      }
    }
    fail(ErrorCode::format, "scene spec: bad " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t j = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

// Parses the `key=value` attributes of a layer line from words[first...].
Layer parse_layer_attributes(const std::vector<std::string_view>& words, std::size_t first,
                             Region region) {
  Layer layer;
  layer.region = region;
  bool has_disp = false;
  for (std::size_t i = first; i < words.size(); ++i) {
    const auto eq = words[i].find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::format, "scene spec: expected attr=value, got '" + std::string(words[i]) + "'");
    }
    const auto key = words[i].substr(0, eq);
    const auto value = words[i].substr(eq + 1);
    if (key == "disp") {
      layer.disparity = number<int>(value, "layer disparity");
      has_disp = true;
    } else if (key == "texture") {
      if (value == "noise") layer.texture.pattern = Texture::Pattern::value_noise;
      else if (value == "constant") layer.texture.pattern = Texture::Pattern::constant;
      else if (value == "stripes") layer.texture.pattern = Texture::Pattern::stripes;
      else fail(ErrorCode::format, "scene spec: unknown texture '" + std::string(value) + "'");
    } else if (key == "scale") {
      layer.texture.scale = number<double>(value, "texture scale");
    } else if (key == "level") {
      layer.texture.level = number<float>(value, "texture level");
    } else if (key == "low") {
      layer.texture.low = number<float>(value, "texture low");
    } else if (key == "high") {
      layer.texture.high = number<float>(value, "texture high");
    } else if (key == "seed") {
      layer.texture.seed = number<std::uint64_t>(value, "texture seed");
    } else {
      fail(ErrorCode::format, "scene spec: unknown layer attribute '" + std::string(key) + "'");
    }
  }
  require(has_disp, ErrorCode::format, "scene spec: every layer needs disp=<int>");
  return layer;
}

}  // namespace

SceneSpec parse_scene_spec(std::string_view text) {
  SceneSpec spec;
  std::optional<Layer> background;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::format, "scene spec: expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "U") spec.U = number<int>(value, "U");
    else if (key == "V") spec.V = number<int>(value, "V");
    else if (key == "H") spec.H = number<int>(value, "H");
    else if (key == "W") spec.W = number<int>(value, "W");
    else if (key == "noise_sigma") spec.noise_sigma = number<float>(value, "noise_sigma");
    else if (key == "disp_min") spec.range.min = number<int>(value, "disp_min");
    else if (key == "disp_max") spec.range.max = number<int>(value, "disp_max");
    else if (key == "focal_length") spec.focal_length = number<double>(value, "focal_length");
    else if (key == "baseline") spec.baseline = number<double>(value, "baseline");
    else if (key == "layer") {
      const auto words = split_words(value);
      require(!words.empty(), ErrorCode::format, "scene spec: empty layer");
      if (words[0] == "rect") {
        require(words.size() >= 5, ErrorCode::format, "rect layer needs top left bottom right");
        spec.layers.push_back(parse_layer_attributes(
            words, 5,
            Region::rect(number<int>(words[1], "rect top"), number<int>(words[2], "rect left"),
                         number<int>(words[3], "rect bottom"), number<int>(words[4], "rect right"))));
      } else if (words[0] == "disk") {
        require(words.size() >= 4, ErrorCode::format, "disk layer needs cy cx radius");
        spec.layers.push_back(parse_layer_attributes(
            words, 4,
            Region::disk(number<int>(words[1], "disk cy"), number<int>(words[2], "disk cx"),
                         number<int>(words[3], "disk radius"))));
      } else {
        fail(ErrorCode::format, "scene spec: unknown layer shape '" + std::string(words[0]) + "'");
      }
    } else if (key == "background") {
      require(!background, ErrorCode::format, "scene spec: background given twice");
      background = parse_layer_attributes(split_words(value), 0, Region::full());
    } else {
      fail(ErrorCode::format, "scene spec: unknown key '" + std::string(key) + "'");
    }
  }
  require(background.has_value(), ErrorCode::format, "scene spec needs a background line");
  spec.layers.push_back(*background);
  spec.validate();
  return spec;
}

}  // namespace lfoacc
