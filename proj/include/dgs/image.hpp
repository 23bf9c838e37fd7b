#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dgs/error.hpp"

namespace dgs {

// Round num/den to the nearest integer, ties away from zero. den must be > 0.
constexpr std::int64_t div_round_half_away(std::int64_t num, std::int64_t den) noexcept {
  return num >= 0 ? (2 * num + den) / (2 * den) : -((-2 * num + den) / (2 * den));
}

inline std::uint8_t clamp_u8(double v) noexcept {
  // std::lround rounds halfway cases away from zero.
  const long r = std::lround(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

// One decoded video frame: interleaved 8-bit RGB, row-major.
struct Frame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t index = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  Frame() = default;
  Frame(std::uint32_t w, std::uint32_t h, std::uint32_t idx = 0, Rgb8 fill = {})
      : width(w), height(h), index(idx), rgb(std::size_t{w} * h * 3) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
      rgb[i] = fill.r;
      rgb[i + 1] = fill.g;
      rgb[i + 2] = fill.b;
    }
  }

  std::size_t pixel_count() const noexcept { return std::size_t{width} * height; }

  Rgb8 at(std::uint32_t x, std::uint32_t y) const noexcept {
    const std::size_t o = (std::size_t{y} * width + x) * 3;
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
  void set(std::uint32_t x, std::uint32_t y, Rgb8 c) noexcept {
    const std::size_t o = (std::size_t{y} * width + x) * 3;
    rgb[o] = c.r;
    rgb[o + 1] = c.g;
    rgb[o + 2] = c.b;
  }

  bool same_geometry(const Frame& o) const noexcept {
    return width == o.width && height == o.height;
  }
};

// Pixel contents only; the frame index is position metadata.
inline bool same_pixels(const Frame& a, const Frame& b) noexcept {
  return a.same_geometry(b) && a.rgb == b.rgb;
}

struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::uint32_t w, std::uint32_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(std::size_t{w} * h, fill) {}

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const noexcept {
    return pixels[std::size_t{y} * width + x];
  }
  std::uint8_t& at(std::uint32_t x, std::uint32_t y) noexcept {
    return pixels[std::size_t{y} * width + x];
  }
  std::size_t size() const noexcept { return pixels.size(); }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Three 8-bit planes of equal geometry, stored as separate channels.
struct PlanarRgb {
  GrayImage r, g, b;

  std::uint32_t width() const noexcept { return r.width; }
  std::uint32_t height() const noexcept { return r.height; }
  std::size_t pixel_count() const noexcept { return r.size(); }

  bool consistent() const noexcept {
    return r.width == g.width && r.width == b.width && r.height == g.height &&
           r.height == b.height && r.size() == std::size_t{r.width} * r.height &&
           g.size() == r.size() && b.size() == r.size();
  }

  friend bool operator==(const PlanarRgb&, const PlanarRgb&) = default;
};

inline PlanarRgb to_planar(const Frame& f) {
  PlanarRgb p{GrayImage(f.width, f.height), GrayImage(f.width, f.height),
              GrayImage(f.width, f.height)};
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    p.r.pixels[i] = f.rgb[3 * i];
    p.g.pixels[i] = f.rgb[3 * i + 1];
    p.b.pixels[i] = f.rgb[3 * i + 2];
  }
  return p;
}

inline Frame to_interleaved(const PlanarRgb& p, std::uint32_t index = 0) {
  if (!p.consistent()) fail(Errc::geometry_mismatch, "planes differ in geometry");
  Frame f(p.width(), p.height(), index);
  for (std::size_t i = 0; i < p.pixel_count(); ++i) {
    f.rgb[3 * i] = p.r.pixels[i];
    f.rgb[3 * i + 1] = p.g.pixels[i];
    f.rgb[3 * i + 2] = p.b.pixels[i];
  }
  return f;
}

}  // namespace dgs
