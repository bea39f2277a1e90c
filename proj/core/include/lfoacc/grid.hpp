#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lfoacc/error.hpp"

namespace lfoacc {

/// Dense row-major H×W image.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width) {
    require(height >= 0 && width >= 0, ErrorCode::invalid_argument,
            "grid extents must be non-negative");
    data_.assign(static_cast<std::size_t>(height) * width, fill);
  }
  Grid(int height, int width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    require(height >= 0 && width >= 0 &&
                data_.size() == static_cast<std::size_t>(height) * width,
            ErrorCode::shape_mismatch, "grid data length does not match extents");
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int h, int w) { return data_[index(h, w)]; }
  const T& operator()(int h, int w) const { return data_[index(h, w)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int h, int w) const noexcept {
    return static_cast<std::size_t>(h) * width_ + w;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using FloatGrid = Grid<float>;
using BoolGrid = Grid<unsigned char>;

}  // namespace lfoacc
