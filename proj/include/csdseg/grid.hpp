#ifndef CSDSEG_GRID_HPP_
#define CSDSEG_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace csdseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument (size, range, shape) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A region, band or seed set is empty or covers the whole frame.
class DegenerateRegion : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Integer pixel coordinate. x is the column, y the row.
struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Dense row-major 2-D raster.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw InvalidArgument("grid dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw InvalidArgument("grid data size does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  const std::vector<T>& data() const { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Real-valued field derived from an image (distance maps, local statistics).
using ScalarField = Grid<double>;

/// Boolean field stored as 0/1 bytes.
using BinaryMask = Grid<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()) + ")");
  }
}

inline std::size_t count_true(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.values().begin(), mask.values().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

inline bool is_degenerate(const BinaryMask& mask) {
  const auto n = count_true(mask);
  return n == 0 || n == mask.size();
}

inline double max_value(const ScalarField& field) {
  double m = -INFINITY;
  for (double v : field.values()) m = std::max(m, v);
  return m;
}

inline double min_value(const ScalarField& field) {
  double m = INFINITY;
  for (double v : field.values()) m = std::min(m, v);
  return m;
}

/// Grayscale input image with intensities normalized to [0, 1].
///
/// The constructor validates the invariants (at least 3x3, every value
/// finite and inside [0, 1]); once built the image is immutable.
class GrayImage {
 public:
  GrayImage() = default;

  explicit GrayImage(ScalarField pixels) : pixels_(std::move(pixels)) {
    if (pixels_.width() < 3 || pixels_.height() < 3) {
      throw InvalidArgument("image must be at least 3x3 pixels");
    }
    for (double v : pixels_.values()) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InvalidArgument("image intensities must be finite and within [0, 1]");
      }
    }
  }

  GrayImage(int width, int height, std::vector<double> data)
      : GrayImage(ScalarField(width, height, std::move(data))) {}

  int width() const { return pixels_.width(); }
  int height() const { return pixels_.height(); }
  std::size_t size() const { return pixels_.size(); }
  double operator()(int x, int y) const { return pixels_(x, y); }
  double operator[](std::size_t i) const { return pixels_[i]; }
  const ScalarField& field() const { return pixels_; }
  std::span<const double> values() const { return pixels_.values(); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return pixels_.same_shape(other);
  }

  double mean() const {
    double s = 0.0;
    for (double v : pixels_.values()) s += v;
    return s / static_cast<double>(pixels_.size());
  }

  /// Sample standard deviation (n - 1 denominator).
  double stddev() const {
    const double m = mean();
    double s = 0.0;
    for (double v : pixels_.values()) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(pixels_.size() - 1));
  }

 private:
  ScalarField pixels_;
};

}  // namespace csdseg

#endif  // CSDSEG_GRID_HPP_
