#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "lfoacc/io.hpp"

namespace lfoacc {

namespace {

bool is_space(std::uint8_t c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t';
}

class HeaderCursor {
 public:
  explicit HeaderCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space() {
    while (pos_ < bytes_.size() && is_space(bytes_[pos_])) ++pos_;
  }

  std::string token() {
    skip_space();
    std::string out;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && out.size() < 64) {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (out.empty()) fail(ErrorCode::format, "PFM header ends prematurely");
    return out;
  }

  void expect_single_space() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      fail(ErrorCode::format, "PFM header must end with one whitespace byte");
    }
    // Tolerate a CRLF terminator.
    if (bytes_[pos_] == '\r' && pos_ + 1 < bytes_.size() && bytes_[pos_ + 1] == '\n') ++pos_;
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

int parse_extent(const std::string& tok, const char* what) {
  long long value = 0;
  for (char c : tok) {
    if (c < '0' || c > '9') fail(ErrorCode::format, std::string("PFM ") + what + " is not a number");
    value = value * 10 + (c - '0');
    if (value > std::numeric_limits<int>::max()) {
      fail(ErrorCode::format, std::string("PFM ") + what + " overflows");
    }
  }
  if (value == 0) fail(ErrorCode::format, std::string("PFM ") + what + " must be positive");
  return static_cast<int>(value);
}

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0x0000FF00u) | ((x << 8) & 0x00FF0000u) | (x << 24);
}

}  // namespace

PfmImage read_pfm(std::span<const std::uint8_t> bytes) {
  HeaderCursor cur(bytes);
  const std::string magic = cur.token();
  if (magic == "PF") fail(ErrorCode::unsupported, "3-channel PFM (PF) is not supported");
  if (magic != "Pf") fail(ErrorCode::format, "not a PFM file (bad magic)");
  const int width = parse_extent(cur.token(), "width");
  const int height = parse_extent(cur.token(), "height");
  const std::string scale_tok = cur.token();
  char* end = nullptr;
  const double scale = std::strtod(scale_tok.c_str(), &end);
  if (end != scale_tok.c_str() + scale_tok.size() || !std::isfinite(scale) || scale == 0.0) {
    fail(ErrorCode::format, "PFM scale must be a finite nonzero number");
  }
  cur.expect_single_space();

  const auto pixels = static_cast<unsigned long long>(width) * static_cast<unsigned long long>(height);
  if (pixels > std::numeric_limits<std::size_t>::max() / 4 ||
      pixels > static_cast<unsigned long long>(std::numeric_limits<int>::max())) {
    fail(ErrorCode::format, "PFM dimensions overflow");
  }
  const std::size_t payload = static_cast<std::size_t>(pixels) * 4;
  if (bytes.size() - cur.position() < payload) {
    fail(ErrorCode::format, "PFM payload truncated: expected " + std::to_string(payload) +
                                " bytes, found " + std::to_string(bytes.size() - cur.position()));
  }

  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);
  std::vector<float> values(static_cast<std::size_t>(pixels));
  const std::uint8_t* src = bytes.data() + cur.position();
  for (int row = 0; row < height; ++row) {
    // PFM rows run bottom-to-top.
    const std::size_t dst_row = static_cast<std::size_t>(height - 1 - row) * width;
    for (int col = 0; col < width; ++col) {
      std::uint32_t raw;
      std::memcpy(&raw, src + (static_cast<std::size_t>(row) * width + col) * 4, 4);
      if (swap) raw = byteswap32(raw);
      values[dst_row + col] = std::bit_cast<float>(raw);
    }
  }
  return PfmImage{FloatGrid(height, width, std::move(values)), static_cast<float>(scale)};
}

std::vector<std::uint8_t> write_pfm(const FloatGrid& grid) {
  require(grid.height() >= 1 && grid.width() >= 1, ErrorCode::invalid_argument,
          "PFM grid must be at least 1x1");
  for (float x : grid.values()) {
    require(std::isfinite(x), ErrorCode::invalid_argument, "PFM writer rejects non-finite values");
  }
  const std::string header =
      "Pf\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n-1\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + grid.size() * 4);
  const bool swap = std::endian::native != std::endian::little;
  for (int row = grid.height() - 1; row >= 0; --row) {
    for (int col = 0; col < grid.width(); ++col) {
      std::uint32_t raw = std::bit_cast<std::uint32_t>(grid(row, col));
      if (swap) raw = byteswap32(raw);
      std::uint8_t b[4];
      std::memcpy(b, &raw, 4);
      out.insert(out.end(), b, b + 4);
    }
  }
  return out;
}

PfmImage read_pfm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::missing_file, "cannot open PFM file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return read_pfm(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_pfm_file(const std::filesystem::path& path, const FloatGrid& grid) {
  const auto bytes = write_pfm(grid);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

}  // namespace lfoacc
