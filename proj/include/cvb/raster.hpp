#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cvb/geometry.hpp"

namespace cvb {

/// Dense row-major image of T.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, const T& fill)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(int w, int h) const noexcept {
    return width_ == w && height_ == h;
  }
  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Per-pixel z-depth in meters. NaN (or any non-positive value) is invalid.
class DepthMap : public Raster<double> {
 public:
  DepthMap() = default;
  DepthMap(int width, int height)
      : Raster(width, height, std::numeric_limits<double>::quiet_NaN()) {}

  static bool valid_value(double d) { return std::isfinite(d) && d > 0.0; }
  bool valid(int x, int y) const { return valid_value(at(x, y)); }
  std::size_t valid_count() const;
};

/// Unit normals in the owning camera's frame. Non-finite entries are invalid.
class NormalMap : public Raster<Vec3> {
 public:
  NormalMap() = default;
  NormalMap(int width, int height)
      : Raster(width, height,
               Vec3::Constant(std::numeric_limits<double>::quiet_NaN())) {}

  bool valid(int x, int y) const { return at(x, y).allFinite(); }
};

enum class CovisLabel : std::uint8_t {
  Invalid = 0,
  CoVisible = 1,
  Occluded = 2,
  OutOfView = 3,
};

class CovisibilityMap : public Raster<CovisLabel> {
 public:
  CovisibilityMap() = default;
  CovisibilityMap(int width, int height)
      : Raster(width, height, CovisLabel::Invalid) {}

  std::size_t count(CovisLabel label) const;
};

/// Bilinear lookup at a sub-pixel location using only valid neighbours, with
/// the weights renormalised. Empty when no valid neighbour carries weight or
/// the location is outside the image.
std::optional<double> sample_bilinear(const DepthMap& depth, const Vec2& p);

// Raster container: one JSON header line followed by little-endian row-major
// samples. Depth is 1 x f32 (NaN invalid), normals 3 x f32, covis 1 x u8.
void write_depth(const std::filesystem::path& path, const DepthMap& depth);
void write_normals(const std::filesystem::path& path, const NormalMap& normals);
void write_covis(const std::filesystem::path& path, const CovisibilityMap& covis);

DepthMap read_depth(const std::filesystem::path& path);
NormalMap read_normals(const std::filesystem::path& path);
CovisibilityMap read_covis(const std::filesystem::path& path);

/// Round-trips a depth map through f32 storage precision.
DepthMap quantize_f32(const DepthMap& depth);

}  // namespace cvb
