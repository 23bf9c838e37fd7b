#pragma once

// Video ingestion: every module receives frames through VideoSource.
//
// Supported origins:
//   * a directory of numbered raster files (png/ppm/pgm), natural-sorted by stem
//   * a YUV4MPEG2 (.y4m) stream, 4:2:0 or 4:4:4, converted with BT.601
//     full-range coefficients
//   * a DGSRAW1 stream: "DGSRAW1" + u32 width + u32 height + u32 frame_count
//     (little-endian) followed by frame_count * width * height * 3 RGB bytes
//   * headerless raw RGB with declared geometry ("rawrgb:WxH:path")

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/image.hpp"
#include "dgs/raster_io.hpp"

namespace dgs {

enum class SourceOrigin { image_directory, y4m, raw_rgb, memory };

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  friend bool operator==(const Rational&, const Rational&) = default;
};

// A single-consumer, random-access frame stream of uniform geometry.
class VideoSource {
 public:
  virtual ~VideoSource() = default;

  virtual SourceOrigin origin() const noexcept = 0;
  virtual std::uint32_t frame_count() const noexcept = 0;
  virtual std::uint32_t width() const noexcept = 0;
  virtual std::uint32_t height() const noexcept = 0;
  virtual std::optional<Rational> fps_hint() const { return std::nullopt; }

  // Same i always yields bit-identical pixels.
  Frame read_frame(std::uint32_t i) {
    if (i >= frame_count())
      fail(Errc::index_out_of_range,
           "frame " + std::to_string(i) + " out of range [0, " + std::to_string(frame_count()) + ")");
    Frame f = decode(i);
    f.index = i;
    return f;
  }

  const std::string& id() const noexcept { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

 protected:
  virtual Frame decode(std::uint32_t i) = 0;

 private:
  std::string id_;
};

// ---------------------------------------------------------------------------

namespace detail {

// frame2 < frame10: digit runs compare by numeric value.
inline bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      auto na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      // equal value: fewer leading zeros first
      if (ie - i != je - j) return ie - i < je - j;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

}  // namespace detail

// ---------------------------------------------------------------------------

class MemorySource final : public VideoSource {
 public:
  explicit MemorySource(std::vector<Frame> frames, std::string id = "memory")
      : frames_(std::move(frames)) {
    if (frames_.empty()) fail(Errc::empty_input, "memory source has no frames");
    for (const auto& f : frames_)
      if (!f.same_geometry(frames_.front()))
        fail(Errc::inconsistent_geometry, "memory source frames differ in size");
    set_id(std::move(id));
  }

  SourceOrigin origin() const noexcept override { return SourceOrigin::memory; }
  std::uint32_t frame_count() const noexcept override { return static_cast<std::uint32_t>(frames_.size()); }
  std::uint32_t width() const noexcept override { return frames_.front().width; }
  std::uint32_t height() const noexcept override { return frames_.front().height; }

  const std::vector<Frame>& frames() const noexcept { return frames_; }

 protected:
  Frame decode(std::uint32_t i) override { return frames_[i]; }

 private:
  std::vector<Frame> frames_;
};

class ImageDirectorySource final : public VideoSource {
 public:
  explicit ImageDirectorySource(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) fail(Errc::not_found, dir.string() + " is not a directory");
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && raster::is_raster_file(e.path())) files_.push_back(e.path());
    if (files_.empty()) fail(Errc::not_found, dir.string() + " contains no raster frames");
    std::sort(files_.begin(), files_.end(), [](const fs::path& a, const fs::path& b) {
      const auto sa = a.stem().string(), sb = b.stem().string();
      if (sa != sb) return detail::natural_less(sa, sb);
      return a.filename().string() < b.filename().string();
    });
    std::tie(width_, height_) = raster::read_geometry(files_.front());
    for (const auto& f : files_) {
      const auto wh = raster::read_geometry(f);
      if (wh.first != width_ || wh.second != height_)
        fail(Errc::inconsistent_geometry,
             f.string() + " is " + std::to_string(wh.first) + "x" + std::to_string(wh.second) +
                 ", expected " + std::to_string(width_) + "x" + std::to_string(height_));
    }
    auto name = dir.filename().string();
    if (name.empty()) name = dir.parent_path().filename().string();
    set_id(name);
  }

  SourceOrigin origin() const noexcept override { return SourceOrigin::image_directory; }
  std::uint32_t frame_count() const noexcept override { return static_cast<std::uint32_t>(files_.size()); }
  std::uint32_t width() const noexcept override { return width_; }
  std::uint32_t height() const noexcept override { return height_; }
  const std::vector<std::filesystem::path>& files() const noexcept { return files_; }

 protected:
  Frame decode(std::uint32_t i) override {
    Frame f = raster::read_image(files_[i]);
    if (f.width != width_ || f.height != height_)
      fail(Errc::inconsistent_geometry, files_[i].string() + " changed geometry");
    return f;
  }

 private:
  std::vector<std::filesystem::path> files_;
  std::uint32_t width_ = 0, height_ = 0;
};

// BT.601 full-range YCbCr -> RGB, ties rounded away from zero.
inline Rgb8 ycbcr_to_rgb(std::uint8_t y, std::uint8_t cb, std::uint8_t cr) noexcept {
  const double Y = y, Cb = cb - 128.0, Cr = cr - 128.0;
  return {clamp_u8(Y + 1.402 * Cr), clamp_u8(Y - 0.344136 * Cb - 0.714136 * Cr),
          clamp_u8(Y + 1.772 * Cb)};
}

class Y4mSource final : public VideoSource {
 public:
  enum class Chroma { c420, c444 };

  explicit Y4mSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) fail(Errc::not_found, "cannot open " + path.string());
    std::string header;
    if (!std::getline(in_, header)) fail(Errc::decode_error, path.string() + ": empty file");
    parse_header(header, path.string());
    // Index frames: each is "FRAME[ params]\n" followed by a fixed-size payload.
    const std::uint64_t payload = frame_bytes();
    const std::uint64_t size = std::filesystem::file_size(path);
    std::string marker;
    while (std::getline(in_, marker)) {
      if (marker.rfind("FRAME", 0) != 0)
        fail(Errc::decode_error, path.string() + ": missing FRAME marker at frame " + std::to_string(offsets_.size()));
      const auto pos = static_cast<std::uint64_t>(in_.tellg());
      if (pos + payload > size)
        fail(Errc::decode_error, path.string() + ": truncated frame " + std::to_string(offsets_.size()));
      offsets_.push_back(pos);
      in_.seekg(static_cast<std::streamoff>(pos + payload));
    }
    if (offsets_.empty()) fail(Errc::decode_error, path.string() + ": no frames");
    set_id(path.stem().string());
  }

  SourceOrigin origin() const noexcept override { return SourceOrigin::y4m; }
  std::uint32_t frame_count() const noexcept override { return static_cast<std::uint32_t>(offsets_.size()); }
  std::uint32_t width() const noexcept override { return width_; }
  std::uint32_t height() const noexcept override { return height_; }
  std::optional<Rational> fps_hint() const override { return fps_; }
  Chroma chroma() const noexcept { return chroma_; }

 protected:
  Frame decode(std::uint32_t i) override {
    std::vector<std::uint8_t> buf(frame_bytes());
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(offsets_[i]));
    in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in_) fail(Errc::decode_error, "short read of y4m frame " + std::to_string(i));
    const std::size_t luma = std::size_t{width_} * height_;
    const std::uint8_t* Y = buf.data();
    const std::uint8_t* Cb = Y + luma;
    const std::uint8_t* Cr = Cb + chroma_plane();
    const std::uint32_t cw = chroma_ == Chroma::c420 ? (width_ + 1) / 2 : width_;
    Frame f(width_, height_);
    for (std::uint32_t y = 0; y < height_; ++y) {
      for (std::uint32_t x = 0; x < width_; ++x) {
        const std::size_t c = chroma_ == Chroma::c420 ? std::size_t{y / 2} * cw + x / 2
                                                      : std::size_t{y} * cw + x;
        f.set(x, y, ycbcr_to_rgb(Y[std::size_t{y} * width_ + x], Cb[c], Cr[c]));
      }
    }
    return f;
  }

 private:
  std::size_t chroma_plane() const noexcept {
    return chroma_ == Chroma::c420 ? std::size_t{(width_ + 1) / 2} * ((height_ + 1) / 2)
                                   : std::size_t{width_} * height_;
  }
  std::size_t frame_bytes() const noexcept { return std::size_t{width_} * height_ + 2 * chroma_plane(); }

  void parse_header(const std::string& header, const std::string& name) {
    if (header.rfind("YUV4MPEG2", 0) != 0) fail(Errc::unsupported_format, name + ": not a YUV4MPEG2 stream");
    std::size_t p = 9;
    while (p < header.size()) {
      while (p < header.size() && header[p] == ' ') ++p;
      std::size_t q = header.find(' ', p);
      if (q == std::string::npos) q = header.size();
      const std::string tag = header.substr(p, q - p);
      p = q;
      if (tag.empty()) continue;
      const std::string val = tag.substr(1);
      try {
        switch (tag[0]) {
          case 'W': width_ = static_cast<std::uint32_t>(std::stoul(val)); break;
          case 'H': height_ = static_cast<std::uint32_t>(std::stoul(val)); break;
          case 'F': {
            const auto colon = val.find(':');
            if (colon == std::string::npos) fail(Errc::decode_error, name + ": bad frame rate tag");
            fps_ = Rational{std::stoll(val.substr(0, colon)), std::stoll(val.substr(colon + 1))};
            break;
          }
          case 'I':
            if (val != "p" && val != "?") fail(Errc::unsupported_format, name + ": interlaced y4m is not supported");
            break;
          case 'C':
            if (val == "420" || val == "420jpeg" || val == "420paldv" || val == "420mpeg2") {
              chroma_ = Chroma::c420;
            } else if (val == "444") {
              chroma_ = Chroma::c444;
            } else {
              fail(Errc::unsupported_format, name + ": chroma " + val + " is not supported");
            }
            break;
          default: break;  // A, X and unknown tags are ignored
        }
      } catch (const std::logic_error&) {
        fail(Errc::decode_error, name + ": malformed tag " + tag);
      }
    }
    if (width_ == 0 || height_ == 0) fail(Errc::decode_error, name + ": missing W/H");
  }

  std::ifstream in_;
  std::uint32_t width_ = 0, height_ = 0;
  Chroma chroma_ = Chroma::c420;
  std::optional<Rational> fps_;
  std::vector<std::uint64_t> offsets_;
};

inline constexpr std::string_view kRawMagic = "DGSRAW1";
inline constexpr std::size_t kRawHeaderBytes = 7 + 4 * 3;

// DGSRAW1 file or headerless RGB file with declared geometry.
class RawRgbSource final : public VideoSource {
 public:
  explicit RawRgbSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) fail(Errc::not_found, "cannot open " + path.string());
    std::array<std::uint8_t, kRawHeaderBytes> h{};
    in_.read(reinterpret_cast<char*>(h.data()), h.size());
    if (!in_ || std::memcmp(h.data(), kRawMagic.data(), kRawMagic.size()) != 0)
      fail(Errc::unsupported_format, path.string() + ": missing DGSRAW1 header");
    width_ = detail::get_u32(h.data() + 7);
    height_ = detail::get_u32(h.data() + 11);
    count_ = detail::get_u32(h.data() + 15);
    data_offset_ = kRawHeaderBytes;
    check(path);
  }

  RawRgbSource(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height)
      : in_(path, std::ios::binary), width_(width), height_(height) {
    if (!in_) fail(Errc::not_found, "cannot open " + path.string());
    if (width == 0 || height == 0) fail(Errc::invalid_argument, "raw geometry must be non-zero");
    const auto size = std::filesystem::file_size(path);
    const std::uint64_t fb = std::uint64_t{width} * height * 3;
    if (size % fb != 0) fail(Errc::decode_error, path.string() + ": size is not a multiple of the frame size");
    count_ = static_cast<std::uint32_t>(size / fb);
    check(path);
  }

  SourceOrigin origin() const noexcept override { return SourceOrigin::raw_rgb; }
  std::uint32_t frame_count() const noexcept override { return count_; }
  std::uint32_t width() const noexcept override { return width_; }
  std::uint32_t height() const noexcept override { return height_; }

 protected:
  Frame decode(std::uint32_t i) override {
    Frame f(width_, height_);
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(data_offset_ + std::uint64_t{i} * f.rgb.size()));
    in_.read(reinterpret_cast<char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
    if (!in_) fail(Errc::decode_error, "short read of raw frame " + std::to_string(i));
    return f;
  }

 private:
  void check(const std::filesystem::path& path) {
    if (width_ == 0 || height_ == 0) fail(Errc::decode_error, path.string() + ": zero geometry");
    if (count_ == 0) fail(Errc::decode_error, path.string() + ": no frames");
    const auto size = std::filesystem::file_size(path);
    if (size < data_offset_ + std::uint64_t{count_} * width_ * height_ * 3)
      fail(Errc::decode_error, path.string() + ": truncated raw stream");
    set_id(path.stem().string());
  }

  std::ifstream in_;
  std::uint32_t width_ = 0, height_ = 0, count_ = 0;
  std::uint64_t data_offset_ = 0;
};

// ---------------------------------------------------------------------------
// DGSRAW1 writing

inline void write_raw_header(std::ostream& out, std::uint32_t width, std::uint32_t height,
                             std::uint32_t count) {
  out.write(kRawMagic.data(), static_cast<std::streamsize>(kRawMagic.size()));
  detail::put_u32(out, width);
  detail::put_u32(out, height);
  detail::put_u32(out, count);
}

inline void write_raw(std::ostream& out, std::span<const Frame> frames) {
  if (frames.empty()) fail(Errc::empty_input, "no frames to write");
  write_raw_header(out, frames.front().width, frames.front().height,
                   static_cast<std::uint32_t>(frames.size()));
  for (const auto& f : frames) {
    if (!f.same_geometry(frames.front())) fail(Errc::inconsistent_geometry, "raw stream frames differ in size");
    out.write(reinterpret_cast<const char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
  }
  if (!out) fail(Errc::io_error, "failed writing raw stream");
}

inline void write_raw(const std::filesystem::path& path, std::span<const Frame> frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  write_raw(out, frames);
}

// Reads a whole DGSRAW1 stream (e.g. stdin) into memory.
inline std::unique_ptr<MemorySource> read_raw_stream(std::istream& in, std::string id = "stdin") {
  std::array<std::uint8_t, kRawHeaderBytes> h{};
  in.read(reinterpret_cast<char*>(h.data()), h.size());
  if (!in || std::memcmp(h.data(), kRawMagic.data(), kRawMagic.size()) != 0)
    fail(Errc::unsupported_format, "stream lacks DGSRAW1 header");
  const auto w = detail::get_u32(h.data() + 7), hh = detail::get_u32(h.data() + 11),
             n = detail::get_u32(h.data() + 15);
  if (w == 0 || hh == 0 || n == 0) fail(Errc::decode_error, "raw stream has empty geometry or no frames");
  std::vector<Frame> frames;
  frames.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Frame f(w, hh, i);
    in.read(reinterpret_cast<char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
    if (!in) fail(Errc::decode_error, "truncated raw stream at frame " + std::to_string(i));
    frames.push_back(std::move(f));
  }
  return std::make_unique<MemorySource>(std::move(frames), std::move(id));
}

// ---------------------------------------------------------------------------

// Descriptor forms: "-" (DGSRAW1 on stdin), "rawrgb:WxH:path", a directory,
// a .y4m file, or a DGSRAW1 file (detected by magic).
inline std::unique_ptr<VideoSource> open_source(const std::string& descriptor) {
  namespace fs = std::filesystem;
  if (descriptor == "-") return read_raw_stream(std::cin);
  if (descriptor.rfind("rawrgb:", 0) == 0) {
    const auto rest = descriptor.substr(7);
    const auto colon = rest.find(':');
    const auto x = rest.find('x');
    if (colon == std::string::npos || x == std::string::npos || x > colon)
      fail(Errc::invalid_argument, "expected rawrgb:WIDTHxHEIGHT:path, got " + descriptor);
    std::uint32_t w = 0, h = 0;
    try {
      w = static_cast<std::uint32_t>(std::stoul(rest.substr(0, x)));
      h = static_cast<std::uint32_t>(std::stoul(rest.substr(x + 1, colon - x - 1)));
    } catch (const std::logic_error&) {
      fail(Errc::invalid_argument, "bad geometry in " + descriptor);
    }
    const fs::path p = rest.substr(colon + 1);
    if (!fs::exists(p)) fail(Errc::not_found, p.string() + " does not exist");
    return std::make_unique<RawRgbSource>(p, w, h);
  }
  const fs::path p = descriptor;
  if (!fs::exists(p)) fail(Errc::not_found, descriptor + " does not exist");
  if (fs::is_directory(p)) return std::make_unique<ImageDirectorySource>(p);
  if (raster::lower_ext(p) == ".y4m") return std::make_unique<Y4mSource>(p);
  std::ifstream probe(p, std::ios::binary);
  std::array<char, 9> magic{};
  probe.read(magic.data(), magic.size());
  const std::string_view head(magic.data(), static_cast<std::size_t>(probe.gcount()));
  if (head.substr(0, kRawMagic.size()) == kRawMagic) return std::make_unique<RawRgbSource>(p);
  if (head == "YUV4MPEG2") return std::make_unique<Y4mSource>(p);
  fail(Errc::unsupported_format, descriptor + ": unrecognized video format");
}

// Decodes every frame into memory, in index order.
inline std::vector<Frame> read_all(VideoSource& src) {
  std::vector<Frame> out;
  out.reserve(src.frame_count());
  for (std::uint32_t i = 0; i < src.frame_count(); ++i) out.push_back(src.read_frame(i));
  return out;
}

}  // namespace dgs
