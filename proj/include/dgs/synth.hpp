#pragma once

// Deterministic synthetic videos with exact motion ground truth.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/image.hpp"
#include "dgs/raster_io.hpp"
#include "dgs/snippet.hpp"
#include "dgs/video_io.hpp"

namespace dgs::synth {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint8_t hash_byte(std::uint64_t seed, std::int64_t x, std::int64_t y) noexcept {
  const auto h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(x) * 0x100000001b3ull ^
                                              static_cast<std::uint64_t>(y) << 32));
  return static_cast<std::uint8_t>(h >> 56);
}

// Value noise: random lattice values every `cell` pixels, bilinearly
// interpolated in integer arithmetic. cell == 1 is white noise.
inline std::uint8_t value_noise(std::uint64_t seed, std::uint32_t cell, std::int64_t x, std::int64_t y) noexcept {
  if (cell <= 1) return hash_byte(seed, x, y);
  const std::int64_t c = cell;
  const std::int64_t gx = x >= 0 ? x / c : -((-x + c - 1) / c);
  const std::int64_t gy = y >= 0 ? y / c : -((-y + c - 1) / c);
  const std::int64_t fx = x - gx * c, fy = y - gy * c;
  const std::int64_t v00 = hash_byte(seed, gx, gy), v10 = hash_byte(seed, gx + 1, gy);
  const std::int64_t v01 = hash_byte(seed, gx, gy + 1), v11 = hash_byte(seed, gx + 1, gy + 1);
  const std::int64_t top = v00 * (c - fx) + v10 * fx;
  const std::int64_t bot = v01 * (c - fx) + v11 * fx;
  return static_cast<std::uint8_t>(div_round_half_away(top * (c - fy) + bot * fy, c * c));
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

struct Background {
  enum class Kind { constant, noise } kind = Kind::constant;
  Rgb8 color{0, 0, 0};
  std::uint64_t seed = 0;
  std::uint8_t lo = 0, hi = 255;  // noise range (gray)

  std::uint8_t noise_at(std::uint32_t x, std::uint32_t y) const noexcept {
    const unsigned span = static_cast<unsigned>(hi) - lo + 1;
    return static_cast<std::uint8_t>(lo + (hash_byte(seed, x, y) * span >> 8));
  }
  Rgb8 at(std::uint32_t x, std::uint32_t y) const noexcept {
    if (kind == Kind::constant) return color;
    const auto v = noise_at(x, y);
    return {v, v, v};
  }
};

struct Flicker {
  Rgb8 alt;
  std::uint32_t period = 1;  // frames per phase
};

struct Texture {
  std::uint64_t seed = 0;
  std::uint32_t cell = 1;
};

// Axis-aligned rectangle; origin at frame t is start + floor(velocity * t).
struct SceneObject {
  std::uint32_t w = 1, h = 1;
  std::int64_t x = 0, y = 0;
  Rational vx{0, 1}, vy{0, 1};
  Rgb8 color{255, 255, 255};
  std::optional<Flicker> flicker;
  std::optional<Texture> texture;  // gray texture attached to the object

  std::int64_t x_at(std::uint32_t t) const noexcept { return x + floor_div(vx.num * t, vx.den); }
  std::int64_t y_at(std::uint32_t t) const noexcept { return y + floor_div(vy.num * t, vy.den); }

  Rgb8 color_at(std::uint32_t t, std::int64_t lx, std::int64_t ly) const noexcept {
    if (texture) {
      const auto v = value_noise(texture->seed, texture->cell, lx, ly);
      return {v, v, v};
    }
    if (flicker && (t / flicker->period) % 2 == 1) return flicker->alt;
    return color;
  }
};

struct SceneSpec {
  std::uint32_t width = 64, height = 48, n_frames = 40;
  Background background;
  std::vector<SceneObject> objects;
  bool reject_out_of_bounds = false;

  void validate() const {
    if (width == 0 || height == 0 || n_frames == 0) fail(Errc::invalid_argument, "scene geometry and frame count must be positive");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto& o = objects[i];
      if (o.w == 0 || o.h == 0) fail(Errc::invalid_argument, "object " + std::to_string(i) + " has zero size");
      if (o.vx.den <= 0 || o.vy.den <= 0) fail(Errc::invalid_argument, "velocity denominators must be positive");
      if (o.flicker && o.flicker->period == 0) fail(Errc::invalid_argument, "flicker period must be positive");
      if (o.texture && o.texture->cell == 0) fail(Errc::invalid_argument, "texture cell must be positive");
      if (!reject_out_of_bounds) continue;
      // Positions are monotone in t, so the extremes are at t=0 and t=n-1.
      for (const std::uint32_t t : {0u, n_frames - 1}) {
        const auto x0 = o.x_at(t), y0 = o.y_at(t);
        if (x0 < 0 || y0 < 0 || x0 + o.w > width || y0 + o.h > height)
          fail(Errc::out_of_bounds, "object " + std::to_string(i) + " leaves the frame at t=" + std::to_string(t));
      }
    }
  }
};

// Paints frame t; later objects overwrite earlier ones, out-of-frame parts clip.
inline Frame render_frame(const SceneSpec& s, std::uint32_t t) {
  Frame f(s.width, s.height, t, s.background.color);
  if (s.background.kind == Background::Kind::noise)
    for (std::uint32_t y = 0; y < s.height; ++y)
      for (std::uint32_t x = 0; x < s.width; ++x) f.set(x, y, s.background.at(x, y));
  for (const auto& o : s.objects) {
    const auto ox = o.x_at(t), oy = o.y_at(t);
    const auto x0 = std::max<std::int64_t>(ox, 0), y0 = std::max<std::int64_t>(oy, 0);
    const auto x1 = std::min<std::int64_t>(ox + o.w, s.width), y1 = std::min<std::int64_t>(oy + o.h, s.height);
    for (auto y = y0; y < y1; ++y)
      for (auto x = x0; x < x1; ++x)
        f.set(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), o.color_at(t, x - ox, y - oy));
  }
  return f;
}

// Lazily rendered in-memory video.
class SyntheticSource final : public VideoSource {
 public:
  explicit SyntheticSource(SceneSpec spec, std::string id = "synth") : spec_(std::move(spec)) {
    spec_.validate();
    set_id(std::move(id));
  }

  SourceOrigin origin() const noexcept override { return SourceOrigin::memory; }
  std::uint32_t frame_count() const noexcept override { return spec_.n_frames; }
  std::uint32_t width() const noexcept override { return spec_.width; }
  std::uint32_t height() const noexcept override { return spec_.height; }
  const SceneSpec& spec() const noexcept { return spec_; }

 protected:
  Frame decode(std::uint32_t i) override { return render_frame(spec_, i); }

 private:
  SceneSpec spec_;
};

inline SyntheticSource render(const SceneSpec& spec, std::string id = "synth") {
  return SyntheticSource(spec, std::move(id));
}

// ---------------------------------------------------------------------------

struct Displacement {
  std::int64_t dx = 0, dy = 0;
  friend bool operator==(const Displacement&, const Displacement&) = default;
};

struct MotionGroundTruth {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint8_t> mask;  // 1 = motion
  // displacement[object][pair]: origin shift between frames start+pair and start+pair+1
  std::vector<std::vector<Displacement>> displacement;

  bool at(std::uint32_t x, std::uint32_t y) const noexcept { return mask[std::size_t{y} * width + x] != 0; }
  std::size_t area() const noexcept {
    std::size_t n = 0;
    for (auto m : mask) n += m;
    return n;
  }
};

// Exact swept-area mask for a segment: a pixel is in motion unless its gray
// value in the first frame, in the last frame and its exact time-mean all
// coincide. Works on object rectangles in the gray domain.
inline MotionGroundTruth ground_truth(const SceneSpec& s, const Segment& seg) {
  s.validate();
  if (seg.length == 0 || std::uint64_t{seg.start} + seg.length > s.n_frames)
    fail(Errc::index_out_of_range, "segment outside the scene's frame range");
  const std::size_t n = std::size_t{s.width} * s.height;
  std::vector<std::uint8_t> bg(n);
  for (std::uint32_t y = 0; y < s.height; ++y)
    for (std::uint32_t x = 0; x < s.width; ++x) {
      const auto c = s.background.at(x, y);
      bg[std::size_t{y} * s.width + x] = luma(c.r, c.g, c.b);
    }

  std::vector<std::uint64_t> sum(n, 0);
  std::vector<std::uint8_t> first, last, cur;
  for (std::uint32_t t = seg.start; t <= seg.last(); ++t) {
    cur = bg;
    for (const auto& o : s.objects) {
      const auto ox = o.x_at(t), oy = o.y_at(t);
      const auto x0 = std::max<std::int64_t>(ox, 0), y0 = std::max<std::int64_t>(oy, 0);
      const auto x1 = std::min<std::int64_t>(ox + o.w, s.width), y1 = std::min<std::int64_t>(oy + o.h, s.height);
      for (auto y = y0; y < y1; ++y)
        for (auto x = x0; x < x1; ++x) {
          const auto c = o.color_at(t, x - ox, y - oy);
          cur[static_cast<std::size_t>(y) * s.width + static_cast<std::size_t>(x)] = luma(c.r, c.g, c.b);
        }
    }
    for (std::size_t i = 0; i < n; ++i) sum[i] += cur[i];
    if (t == seg.start) first = cur;
    if (t == seg.last()) last = cur;
  }

  MotionGroundTruth gt;
  gt.width = s.width;
  gt.height = s.height;
  gt.mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool still = first[i] == last[i] && sum[i] == std::uint64_t{first[i]} * seg.length;
    gt.mask[i] = still ? 0 : 1;
  }
  for (const auto& o : s.objects) {
    std::vector<Displacement> d;
    for (std::uint32_t t = seg.start; t < seg.last(); ++t)
      d.push_back({o.x_at(t + 1) - o.x_at(t), o.y_at(t + 1) - o.y_at(t)});
    gt.displacement.push_back(std::move(d));
  }
  return gt;
}

// ---------------------------------------------------------------------------
// Scene text format, one directive per line, '#' starts a comment:
//
//   size W H
//   frames N
//   background constant R G B
//   background noise SEED LO HI
//   object rect W H pos X Y vel VX VY color R G B [flicker R G B PERIOD] [texture SEED CELL]
//   bounds clip|reject
//
// Velocities are integers or fractions such as 3/2.

namespace detail {

inline Rational parse_rational(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return {std::stoll(s), 1};
    Rational r{std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
    if (r.den <= 0) fail(Errc::invalid_argument, "velocity denominator must be positive: " + s);
    return r;
  } catch (const std::logic_error&) {
    fail(Errc::invalid_argument, "bad number: " + s);
  }
}

inline std::uint8_t parse_u8(const std::string& s) {
  try {
    const auto v = std::stoul(s);
    if (v > 255) fail(Errc::invalid_argument, "channel value out of range: " + s);
    return static_cast<std::uint8_t>(v);
  } catch (const std::logic_error&) {
    fail(Errc::invalid_argument, "bad channel value: " + s);
  }
}

inline std::uint64_t parse_u64(const std::string& s) {
  try {
    return std::stoull(s);
  } catch (const std::logic_error&) {
    fail(Errc::invalid_argument, "bad integer: " + s);
  }
}

}  // namespace detail

inline SceneSpec parse_scene(std::istream& in) {
  using detail::parse_u64;
  using detail::parse_u8;
  SceneSpec s;
  s.objects.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const auto where = "scene line " + std::to_string(lineno) + ": ";
    auto need = [&](std::size_t k) {
      if (tok.size() < k) fail(Errc::invalid_argument, where + "too few fields");
    };
    const auto& kw = tok[0];
    if (kw == "size") {
      need(3);
      s.width = static_cast<std::uint32_t>(parse_u64(tok[1]));
      s.height = static_cast<std::uint32_t>(parse_u64(tok[2]));
    } else if (kw == "frames") {
      need(2);
      s.n_frames = static_cast<std::uint32_t>(parse_u64(tok[1]));
    } else if (kw == "bounds") {
      need(2);
      if (tok[1] != "clip" && tok[1] != "reject") fail(Errc::invalid_argument, where + "bounds must be clip or reject");
      s.reject_out_of_bounds = tok[1] == "reject";
    } else if (kw == "background") {
      need(2);
      if (tok[1] == "constant") {
        need(5);
        s.background = {Background::Kind::constant, {parse_u8(tok[2]), parse_u8(tok[3]), parse_u8(tok[4])}};
      } else if (tok[1] == "noise") {
        need(5);
        s.background.kind = Background::Kind::noise;
        s.background.seed = parse_u64(tok[2]);
        s.background.lo = parse_u8(tok[3]);
        s.background.hi = parse_u8(tok[4]);
        if (s.background.lo > s.background.hi) fail(Errc::invalid_argument, where + "noise LO > HI");
      } else {
        fail(Errc::invalid_argument, where + "unknown background kind " + tok[1]);
      }
    } else if (kw == "object") {
      need(14);
      if (tok[1] != "rect" || tok[4] != "pos" || tok[7] != "vel" || tok[10] != "color")
        fail(Errc::invalid_argument, where + "expected: object rect W H pos X Y vel VX VY color R G B");
      SceneObject o;
      o.w = static_cast<std::uint32_t>(parse_u64(tok[2]));
      o.h = static_cast<std::uint32_t>(parse_u64(tok[3]));
      try {
        o.x = std::stoll(tok[5]);
        o.y = std::stoll(tok[6]);
      } catch (const std::logic_error&) {
        fail(Errc::invalid_argument, where + "bad position");
      }
      o.vx = detail::parse_rational(tok[8]);
      o.vy = detail::parse_rational(tok[9]);
      o.color = {parse_u8(tok[11]), parse_u8(tok[12]), parse_u8(tok[13])};
      std::size_t i = 14;
      while (i < tok.size()) {
        if (tok[i] == "flicker") {
          if (i + 4 >= tok.size()) fail(Errc::invalid_argument, where + "flicker needs R G B PERIOD");
          o.flicker = Flicker{{parse_u8(tok[i + 1]), parse_u8(tok[i + 2]), parse_u8(tok[i + 3])},
                              static_cast<std::uint32_t>(parse_u64(tok[i + 4]))};
          i += 5;
        } else if (tok[i] == "texture") {
          if (i + 2 >= tok.size()) fail(Errc::invalid_argument, where + "texture needs SEED CELL");
          o.texture = Texture{parse_u64(tok[i + 1]), static_cast<std::uint32_t>(parse_u64(tok[i + 2]))};
          i += 3;
        } else {
          fail(Errc::invalid_argument, where + "unknown object option " + tok[i]);
        }
      }
      s.objects.push_back(o);
    } else {
      fail(Errc::invalid_argument, where + "unknown directive " + kw);
    }
  }
  s.validate();
  return s;
}

inline SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::not_found, "cannot open scene " + path.string());
  return parse_scene(in);
}

inline void write_scene_raw(const SceneSpec& s, std::ostream& out) {
  s.validate();
  write_raw_header(out, s.width, s.height, s.n_frames);
  for (std::uint32_t t = 0; t < s.n_frames; ++t) {
    const auto f = render_frame(s, t);
    out.write(reinterpret_cast<const char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
  }
  if (!out) fail(Errc::io_error, "failed writing rendered scene");
}

inline void write_scene_images(const SceneSpec& s, const std::filesystem::path& dir,
                               raster::Format fmt = raster::Format::png) {
  s.validate();
  std::filesystem::create_directories(dir);
  for (std::uint32_t t = 0; t < s.n_frames; ++t) {
    const auto name = "frame" + std::to_string(t) + "." + raster::extension(fmt);
    raster::write_bytes(dir / name, raster::encode(render_frame(s, t), fmt));
  }
}

}  // namespace dgs::synth
