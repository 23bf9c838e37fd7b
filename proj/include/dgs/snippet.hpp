#pragma once

// Dynamic grayscale snippets: a segment of frames packed into one RGB image
// with R = gray of the first frame, G = per-pixel mean gray over the segment,
// B = gray of the last frame. Static pixels come out achromatic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/image.hpp"
#include "dgs/video_io.hpp"

namespace dgs {

enum class PartialPolicy { drop, keep };

struct SegmentSpec {
  std::uint32_t length = 40;
  PartialPolicy partial = PartialPolicy::drop;

  void validate() const {
    if (length < 2) fail(Errc::invalid_argument, "segment length X must satisfy X>=2, got " + std::to_string(length));
  }
};

struct Segment {
  std::string video_id;
  std::uint32_t ordinal = 0;
  std::uint32_t start = 0;
  std::uint32_t length = 0;

  std::uint32_t last() const noexcept { return start + length - 1; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct DgsImage : PlanarRgb {
  Segment segment;

  bool achromatic() const noexcept { return r == g && g == b; }
};

// ---------------------------------------------------------------------------

inline std::vector<Segment> segment_frames(std::uint32_t frame_count, const SegmentSpec& spec,
                                           const std::string& video_id = {}) {
  spec.validate();
  if (frame_count < 2)
    fail(Errc::video_too_short, video_id + ": " + std::to_string(frame_count) + " frame(s), need at least 2");
  if (spec.partial == PartialPolicy::drop && frame_count < spec.length)
    fail(Errc::video_too_short, video_id + ": " + std::to_string(frame_count) + " frames < segment length " +
                                    std::to_string(spec.length));
  std::vector<Segment> out;
  const std::uint32_t full = frame_count / spec.length;
  for (std::uint32_t k = 0; k < full; ++k) out.push_back({video_id, k, k * spec.length, spec.length});
  const std::uint32_t rest = frame_count % spec.length;
  if (spec.partial == PartialPolicy::keep && rest >= 2)
    out.push_back({video_id, full, full * spec.length, rest});
  return out;
}

inline std::vector<Segment> segment_video(const VideoSource& src, const SegmentSpec& spec) {
  return segment_frames(src.frame_count(), spec, src.id());
}

// ---------------------------------------------------------------------------

// BT.601 luma in exact integer arithmetic: round((299R + 587G + 114B) / 1000).
constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

inline GrayImage to_gray(const Frame& f) {
  GrayImage out(f.width, f.height);
  const std::uint8_t* p = f.rgb.data();
  for (std::size_t i = 0; i < out.pixels.size(); ++i, p += 3) out.pixels[i] = luma(p[0], p[1], p[2]);
  return out;
}

// Exact per-pixel gray sums; divide once at the end.
class GrayAccumulator {
 public:
  void add(const GrayImage& g) {
    if (count_ == 0) {
      width_ = g.width;
      height_ = g.height;
      sums_.assign(g.size(), 0);
    } else if (g.width != width_ || g.height != height_) {
      fail(Errc::geometry_mismatch, "segment frames differ in size");
    }
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += g.pixels[i];
    ++count_;
  }

  void add(const Frame& f) {
    if (count_ == 0) {
      width_ = f.width;
      height_ = f.height;
      sums_.assign(f.pixel_count(), 0);
    } else if (f.width != width_ || f.height != height_) {
      fail(Errc::geometry_mismatch, "segment frames differ in size");
    }
    const std::uint8_t* p = f.rgb.data();
    for (std::size_t i = 0; i < sums_.size(); ++i, p += 3) sums_[i] += luma(p[0], p[1], p[2]);
    ++count_;
  }

  std::uint32_t count() const noexcept { return count_; }

  GrayImage mean() const {
    if (count_ == 0) fail(Errc::empty_segment, "mean of an empty segment");
    GrayImage out(width_, height_);
    const std::uint64_t n = count_;
    for (std::size_t i = 0; i < sums_.size(); ++i)
      out.pixels[i] = static_cast<std::uint8_t>((2 * sums_[i] + n) / (2 * n));
    return out;
  }

 private:
  std::uint32_t width_ = 0, height_ = 0, count_ = 0;
  std::vector<std::uint64_t> sums_;
};

inline GrayImage mean_gray(std::span<const Frame> frames) {
  if (frames.empty()) fail(Errc::empty_segment, "mean of an empty segment");
  GrayAccumulator acc;
  for (const auto& f : frames) acc.add(f);
  return acc.mean();
}

// Builds the snippet from frames already in memory (frames = the segment).
inline DgsImage synthesize_dgs(std::span<const Frame> frames, Segment seg = {}) {
  if (frames.empty()) fail(Errc::empty_segment, "cannot synthesize a snippet from zero frames");
  DgsImage img;
  GrayAccumulator acc;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    GrayImage g = to_gray(frames[i]);
    acc.add(g);
    if (i == 0) img.r = g;
    if (i + 1 == frames.size()) img.b = std::move(g);
  }
  img.g = acc.mean();
  if (seg.length == 0) seg.length = static_cast<std::uint32_t>(frames.size());
  img.segment = std::move(seg);
  return img;
}

inline DgsImage synthesize_dgs(VideoSource& src, const Segment& seg) {
  if (seg.length == 0) fail(Errc::empty_segment, "segment has zero length");
  if (std::uint64_t{seg.start} + seg.length > src.frame_count())
    fail(Errc::index_out_of_range, "segment [" + std::to_string(seg.start) + ", " +
                                       std::to_string(seg.start + seg.length) + ") exceeds video of " +
                                       std::to_string(src.frame_count()) + " frames");
  DgsImage img;
  GrayAccumulator acc;
  for (std::uint32_t i = seg.start; i < seg.start + seg.length; ++i) {
    GrayImage g = to_gray(src.read_frame(i));
    acc.add(g);
    if (i == seg.start) img.r = g;
    if (i == seg.last()) img.b = std::move(g);
  }
  img.g = acc.mean();
  img.segment = seg;
  return img;
}

// ---------------------------------------------------------------------------

// Encodes several segment plans of one video in a single decoding pass.
// plans[j] lists segments (sorted by start, non-overlapping) to synthesize;
// sink(j, DgsImage&&) is called as each segment completes, in frame order.
// Every frame is decoded and converted to gray once.
template <class Sink>
void encode_segments(VideoSource& src, std::span<const std::vector<Segment>> plans, Sink&& sink) {
  std::uint32_t end = 0;
  for (const auto& plan : plans)
    for (const auto& s : plan) {
      if (s.length == 0 || std::uint64_t{s.start} + s.length > src.frame_count())
        fail(Errc::index_out_of_range, "segment exceeds video " + src.id());
      end = std::max(end, s.start + s.length);
    }
  struct Active {
    std::size_t next = 0;
    GrayAccumulator acc;
    DgsImage img;
  };
  std::vector<Active> state(plans.size());
  for (std::uint32_t i = 0; i < end; ++i) {
    bool needed = false;
    for (std::size_t j = 0; j < plans.size(); ++j) {
      auto& st = state[j];
      while (st.next < plans[j].size() && plans[j][st.next].last() < i) ++st.next;
      needed = needed || (st.next < plans[j].size() && plans[j][st.next].start <= i);
    }
    if (!needed) continue;
    const GrayImage gray = to_gray(src.read_frame(i));
    for (std::size_t j = 0; j < plans.size(); ++j) {
      auto& st = state[j];
      if (st.next >= plans[j].size() || plans[j][st.next].start > i) continue;
      const Segment& seg = plans[j][st.next];
      if (i == seg.start) {
        st.acc = GrayAccumulator{};
        st.img = DgsImage{};
        st.img.r = gray;
      }
      st.acc.add(gray);
      if (i == seg.last()) {
        st.img.b = gray;
        st.img.g = st.acc.mean();
        st.img.segment = seg;
        sink(j, std::move(st.img));
        st.acc = GrayAccumulator{};
        ++st.next;
      }
    }
  }
}

// ---------------------------------------------------------------------------

// Bilinear resampling with half-pixel centers: destination pixel x samples
// source coordinate (x + 0.5) * sw / dw - 0.5, clamped to the edge pixels.
inline GrayImage resize_bilinear(const GrayImage& src, std::uint32_t w, std::uint32_t h) {
  if (w == 0 || h == 0) fail(Errc::invalid_argument, "resize target must be at least 1x1");
  if (src.width == 0 || src.height == 0) fail(Errc::empty_input, "cannot resize an empty image");
  if (w == src.width && h == src.height) return src;

  struct Tap {
    std::uint32_t i0, i1;
    double t;
  };
  auto taps = [](std::uint32_t s, std::uint32_t d) {
    std::vector<Tap> out(d);
    const double scale = static_cast<double>(s) / d;
    for (std::uint32_t i = 0; i < d; ++i) {
      double c = (i + 0.5) * scale - 0.5;
      if (c < 0) c = 0;
      if (c > s - 1) c = s - 1;
      const auto i0 = static_cast<std::uint32_t>(c);
      out[i] = {i0, std::min(i0 + 1, s - 1), c - i0};
    }
    return out;
  };
  const auto tx = taps(src.width, w), ty = taps(src.height, h);
  GrayImage out(w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    const auto& [y0, y1, fy] = ty[y];
    for (std::uint32_t x = 0; x < w; ++x) {
      const auto& [x0, x1, fx] = tx[x];
      const double top = src.at(x0, y0) + fx * (src.at(x1, y0) - src.at(x0, y0));
      const double bot = src.at(x0, y1) + fx * (src.at(x1, y1) - src.at(x0, y1));
      out.at(x, y) = clamp_u8(top + fy * (bot - top));
    }
  }
  return out;
}

inline DgsImage resize_dgs(const DgsImage& img, std::uint32_t w = 224, std::uint32_t h = 224) {
  DgsImage out;
  out.r = resize_bilinear(img.r, w, h);
  out.g = resize_bilinear(img.g, w, h);
  out.b = resize_bilinear(img.b, w, h);
  out.segment = img.segment;
  return out;
}

// <video_id>_k<ordinal>_x<length>.<ext>
inline std::string snippet_filename(const Segment& seg, std::uint32_t length_x, const std::string& ext) {
  return seg.video_id + "_k" + std::to_string(seg.ordinal) + "_x" + std::to_string(length_x) + "." + ext;
}

}  // namespace dgs
