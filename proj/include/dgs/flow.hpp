#pragma once

// Horn-Schunck dense optical flow, used as the comparison encoder in the
// throughput benchmark.
//
// Derivatives are the averaged forward differences over the 2x2x2 cube of
// neighbouring samples in both frames. Each sweep replaces (u, v) with
//   u = ubar - Ix (Ix ubar + Iy vbar + It) / (alpha^2 + Ix^2 + Iy^2)
//   v = vbar - Iy (Ix ubar + Iy vbar + It) / (alpha^2 + Ix^2 + Iy^2)
// where ubar, vbar are 4-neighbour averages with replicated edges. Intensities
// are scaled to [0, 1] before differentiation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/image.hpp"
#include "dgs/snippet.hpp"

namespace dgs::flow {

struct HsParams {
  double alpha = 1.0;
  std::uint32_t iterations = 100;

  void validate() const {
    if (!(alpha > 0) || !std::isfinite(alpha)) fail(Errc::invalid_argument, "alpha must be > 0");
    if (iterations < 1) fail(Errc::invalid_argument, "iterations must be >= 1");
  }
};

struct FlowField {
  std::uint32_t width = 0, height = 0;
  std::vector<float> u, v;

  FlowField() = default;
  FlowField(std::uint32_t w, std::uint32_t h)
      : width(w), height(h), u(std::size_t{w} * h, 0.f), v(std::size_t{w} * h, 0.f) {}

  std::size_t size() const noexcept { return u.size(); }
};

struct Derivatives {
  std::uint32_t width = 0, height = 0;
  std::vector<float> ix, iy, it;
};

inline Derivatives derivatives(const GrayImage& f1, const GrayImage& f2) {
  if (f1.width != f2.width || f1.height != f2.height)
    fail(Errc::geometry_mismatch, "flow frames differ in geometry");
  if (f1.size() == 0) fail(Errc::empty_input, "flow frames are empty");
  const std::uint32_t w = f1.width, h = f1.height;
  const std::size_t n = f1.size();
  Derivatives d{w, h, std::vector<float>(n), std::vector<float>(n), std::vector<float>(n)};
  constexpr float kScale = 1.0f / (4.0f * 255.0f);
  for (std::uint32_t y = 0; y < h; ++y) {
    const std::uint32_t y1 = y + 1 < h ? y + 1 : y;
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::uint32_t x1 = x + 1 < w ? x + 1 : x;
      const int a00 = f1.at(x, y), a10 = f1.at(x1, y), a01 = f1.at(x, y1), a11 = f1.at(x1, y1);
      const int b00 = f2.at(x, y), b10 = f2.at(x1, y), b01 = f2.at(x, y1), b11 = f2.at(x1, y1);
      const std::size_t i = std::size_t{y} * w + x;
      d.ix[i] = kScale * static_cast<float>((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01));
      d.iy[i] = kScale * static_cast<float>((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10));
      d.it[i] = kScale * static_cast<float>((b00 - a00) + (b10 - a10) + (b01 - a01) + (b11 - a11));
    }
  }
  return d;
}

namespace detail {

inline void neighbour_average(const std::vector<float>& src, std::vector<float>& dst, std::uint32_t w,
                              std::uint32_t h) {
  for (std::uint32_t y = 0; y < h; ++y) {
    const float* row = src.data() + std::size_t{y} * w;
    const float* up = src.data() + std::size_t{y ? y - 1 : 0} * w;
    const float* down = src.data() + std::size_t{y + 1 < h ? y + 1 : y} * w;
    float* out = dst.data() + std::size_t{y} * w;
    for (std::uint32_t x = 0; x < w; ++x) {
      const float left = row[x ? x - 1 : 0];
      const float right = row[x + 1 < w ? x + 1 : x];
      out[x] = 0.25f * (left + right + up[x] + down[x]);
    }
  }
}

}  // namespace detail

inline FlowField horn_schunck(const GrayImage& f1, const GrayImage& f2, const HsParams& p = {}) {
  p.validate();
  const auto d = derivatives(f1, f2);
  const std::uint32_t w = d.width, h = d.height;
  const std::size_t n = d.ix.size();
  const float a2 = static_cast<float>(p.alpha * p.alpha);

  std::vector<float> denom(n);
  for (std::size_t i = 0; i < n; ++i) denom[i] = 1.0f / (a2 + d.ix[i] * d.ix[i] + d.iy[i] * d.iy[i]);

  FlowField f(w, h);
  std::vector<float> ubar(n), vbar(n);
  for (std::uint32_t it = 0; it < p.iterations; ++it) {
    detail::neighbour_average(f.u, ubar, w, h);
    detail::neighbour_average(f.v, vbar, w, h);
    for (std::size_t i = 0; i < n; ++i) {
      const float r = (d.ix[i] * ubar[i] + d.iy[i] * vbar[i] + d.it[i]) * denom[i];
      f.u[i] = ubar[i] - d.ix[i] * r;
      f.v[i] = vbar[i] - d.iy[i] * r;
    }
  }
  return f;
}

// Objective whose stationary point the sweeps approach:
//   sum (Ix u + Iy v + It)^2 + alpha^2 / 4 * sum (|grad u|^2 + |grad v|^2)
// with forward differences (zero across the image border).
inline double hs_energy(const GrayImage& f1, const GrayImage& f2, const FlowField& flow, double alpha) {
  const auto d = derivatives(f1, f2);
  if (flow.width != d.width || flow.height != d.height)
    fail(Errc::geometry_mismatch, "flow field does not match frames");
  const std::uint32_t w = d.width, h = d.height;
  double data = 0, smooth = 0;
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::size_t i = std::size_t{y} * w + x;
      const double r = double{d.ix[i]} * flow.u[i] + double{d.iy[i]} * flow.v[i] + d.it[i];
      data += r * r;
      if (x + 1 < w) {
        const double du = flow.u[i + 1] - flow.u[i], dv = flow.v[i + 1] - flow.v[i];
        smooth += du * du + dv * dv;
      }
      if (y + 1 < h) {
        const double du = flow.u[i + w] - flow.u[i], dv = flow.v[i + w] - flow.v[i];
        smooth += du * du + dv * dv;
      }
    }
  return data + alpha * alpha / 4.0 * smooth;
}

// ---------------------------------------------------------------------------

// Packs a run of flow fields into a snippet-shaped raster:
// R = mean magnitude, G = mean direction (radians in [0, 2pi)), B = magnitude
// of the final field; each channel min-max scaled to 0..255 (a flat channel
// maps to 0).
inline PlanarRgb flow_to_snippet(std::span<const FlowField> flows) {
  if (flows.empty()) fail(Errc::empty_input, "flow_to_snippet needs at least one flow field");
  const auto w = flows.front().width, h = flows.front().height;
  const std::size_t n = flows.front().size();
  for (const auto& f : flows)
    if (f.width != w || f.height != h) fail(Errc::geometry_mismatch, "flow fields differ in geometry");

  std::vector<double> mag(n, 0.0), ang(n, 0.0), last(n, 0.0);
  for (const auto& f : flows)
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::hypot(double{f.u[i]}, double{f.v[i]});
      mag[i] += m;
      double a = m > 0 ? std::atan2(double{f.v[i]}, double{f.u[i]}) : 0.0;
      if (a < 0) a += 2 * std::numbers::pi;
      ang[i] += a;
    }
  const double count = static_cast<double>(flows.size());
  const auto& fin = flows.back();
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] /= count;
    ang[i] /= count;
    last[i] = std::hypot(double{fin.u[i]}, double{fin.v[i]});
  }

  auto scale = [&](const std::vector<double>& ch) {
    GrayImage out(w, h);
    const auto [lo, hi] = std::minmax_element(ch.begin(), ch.end());
    if (*hi > *lo)
      for (std::size_t i = 0; i < n; ++i) out.pixels[i] = clamp_u8(255.0 * (ch[i] - *lo) / (*hi - *lo));
    return out;
  };
  return {scale(mag), scale(ang), scale(last)};
}

// Flow encoding of one segment: HS on every consecutive frame pair.
inline PlanarRgb encode_segment_flow(std::span<const Frame> frames, const HsParams& p = {}) {
  if (frames.size() < 2) fail(Errc::video_too_short, "flow encoding needs at least two frames");
  std::vector<FlowField> flows;
  flows.reserve(frames.size() - 1);
  GrayImage prev = to_gray(frames[0]);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    GrayImage cur = to_gray(frames[i]);
    flows.push_back(horn_schunck(prev, cur, p));
    prev = std::move(cur);
  }
  return flow_to_snippet(flows);
}

// ---------------------------------------------------------------------------
// Dump format: "DGSFLO1" + u32 width + u32 height, then row-major float32
// (u, v) pairs, all little-endian.

inline void write_flow(std::ostream& out, const FlowField& f) {
  out.write("DGSFLO1", 7);
  const std::array<std::uint32_t, 2> wh{f.width, f.height};
  for (auto v : wh) {
    const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b.data(), 4);
  }
  static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (const float c : {f.u[i], f.v[i]}) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, &c, 4);
      const std::array<char, 4> b{static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                                  static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
      out.write(b.data(), 4);
    }
  }
  if (!out) fail(Errc::io_error, "failed writing flow dump");
}

inline FlowField read_flow(std::istream& in) {
  std::array<unsigned char, 15> h{};
  in.read(reinterpret_cast<char*>(h.data()), h.size());
  if (!in || std::memcmp(h.data(), "DGSFLO1", 7) != 0) fail(Errc::unsupported_format, "missing DGSFLO1 header");
  auto u32 = [](const unsigned char* p) {
    return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
  };
  FlowField f(u32(h.data() + 7), u32(h.data() + 11));
  std::vector<unsigned char> buf(f.size() * 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) fail(Errc::decode_error, "truncated flow dump");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::uint32_t bu = u32(buf.data() + 8 * i), bv = u32(buf.data() + 8 * i + 4);
    std::memcpy(&f.u[i], &bu, 4);
    std::memcpy(&f.v[i], &bv, 4);
  }
  return f;
}

}  // namespace dgs::flow
