#pragma once

// Chromatic motion measures on snippets: static pixels are achromatic
// (r == g == b), moving pixels are colored. The chroma of a pixel is its
// channel range max(r,g,b) - min(r,g,b).

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/image.hpp"

namespace dgs::motion {

inline constexpr std::uint8_t kDefaultThreshold = 8;

inline GrayImage chroma_deviation(const PlanarRgb& img) {
  if (!img.consistent()) fail(Errc::geometry_mismatch, "snippet channels differ in geometry");
  GrayImage d(img.width(), img.height());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto r = img.r.pixels[i], g = img.g.pixels[i], b = img.b.pixels[i];
    d.pixels[i] = static_cast<std::uint8_t>(std::max({r, g, b}) - std::min({r, g, b}));
  }
  return d;
}

struct MotionMask {
  std::uint32_t width = 0, height = 0;
  std::uint8_t threshold = kDefaultThreshold;
  std::vector<std::uint8_t> mask;  // 1 = motion

  bool at(std::uint32_t x, std::uint32_t y) const noexcept { return mask[std::size_t{y} * width + x] != 0; }
  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto m : mask) n += m;
    return n;
  }
};

inline MotionMask motion_mask(const PlanarRgb& img, std::uint8_t threshold = kDefaultThreshold) {
  if (threshold < 1) fail(Errc::invalid_argument, "motion threshold must be >= 1");
  const auto d = chroma_deviation(img);
  MotionMask m{d.width, d.height, threshold, std::vector<std::uint8_t>(d.size())};
  for (std::size_t i = 0; i < d.size(); ++i) m.mask[i] = d.pixels[i] >= threshold ? 1 : 0;
  return m;
}

// |A ∩ B| / |A ∪ B|; two empty masks score 1.
inline double iou(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) fail(Errc::dimension_mismatch, "mask sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------

struct ImageStats {
  std::string name;
  std::size_t pixels = 0;
  std::size_t motion_pixels = 0;
  double motion_fraction = 0;
  double mean_deviation = 0;
  std::uint32_t p95_deviation = 0;
  // 0..255 plus an overflow guard bin that stays empty for 8-bit input.
  std::array<std::uint64_t, 257> histogram{};
};

struct MotionReport {
  std::uint8_t threshold = kDefaultThreshold;
  std::vector<ImageStats> images;
  std::size_t total_pixels = 0;
  std::size_t total_motion_pixels = 0;
  double aggregate_fraction = 0;
  std::array<std::uint64_t, 257> histogram{};

  // image_path,motion_fraction,mean_deviation,p95_deviation
  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

namespace detail {

// Smallest deviation value whose cumulative count reaches 95% of pixels.
inline std::uint32_t percentile95(const std::array<std::uint64_t, 257>& h, std::uint64_t total) {
  if (total == 0) return 0;
  const std::uint64_t need = (95 * total + 99) / 100;
  std::uint64_t acc = 0;
  for (std::uint32_t v = 0; v < h.size(); ++v) {
    acc += h[v];
    if (acc >= need) return v;
  }
  return 256;
}

inline std::string fmt_double(double v) {
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << v;
  return s.str();
}

}  // namespace detail

inline ImageStats image_stats(const PlanarRgb& img, std::uint8_t threshold, std::string name = {}) {
  if (threshold < 1) fail(Errc::invalid_argument, "motion threshold must be >= 1");
  const auto d = chroma_deviation(img);
  ImageStats s;
  s.name = std::move(name);
  s.pixels = d.size();
  std::uint64_t sum = 0;
  for (auto v : d.pixels) {
    ++s.histogram[v];
    sum += v;
    s.motion_pixels += v >= threshold ? 1 : 0;
  }
  if (s.pixels) {
    s.motion_fraction = static_cast<double>(s.motion_pixels) / static_cast<double>(s.pixels);
    s.mean_deviation = static_cast<double>(sum) / static_cast<double>(s.pixels);
  }
  s.p95_deviation = detail::percentile95(s.histogram, s.pixels);
  return s;
}

inline MotionReport motion_report(std::span<const PlanarRgb> imgs, std::uint8_t threshold = kDefaultThreshold,
                                  std::span<const std::string> names = {}) {
  if (imgs.empty()) fail(Errc::empty_input, "motion report needs at least one image");
  MotionReport r;
  r.threshold = threshold;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    auto s = image_stats(imgs[i], threshold, i < names.size() ? names[i] : "image" + std::to_string(i));
    r.total_pixels += s.pixels;
    r.total_motion_pixels += s.motion_pixels;
    for (std::size_t b = 0; b < r.histogram.size(); ++b) r.histogram[b] += s.histogram[b];
    r.images.push_back(std::move(s));
  }
  r.aggregate_fraction =
      r.total_pixels ? static_cast<double>(r.total_motion_pixels) / static_cast<double>(r.total_pixels) : 0.0;
  return r;
}

inline void MotionReport::write_csv(std::ostream& out) const {
  out << "image_path,motion_fraction,mean_deviation,p95_deviation\n";
  for (const auto& s : images)
    out << s.name << ',' << detail::fmt_double(s.motion_fraction) << ','
        << detail::fmt_double(s.mean_deviation) << ',' << s.p95_deviation << '\n';
}

inline void MotionReport::write_summary(std::ostream& out) const {
  out << "threshold " << static_cast<int>(threshold) << '\n'
      << "images " << images.size() << '\n'
      << "pixels " << total_pixels << '\n'
      << "motion_pixels " << total_motion_pixels << '\n'
      << "motion_fraction " << detail::fmt_double(aggregate_fraction) << '\n'
      << "p95_deviation " << detail::percentile95(histogram, total_pixels) << '\n'
      << "histogram";
  for (auto c : histogram) out << ' ' << c;
  out << '\n';
}

}  // namespace dgs::motion
