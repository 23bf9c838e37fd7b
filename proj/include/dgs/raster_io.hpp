#pragma once

// Lossless 8-bit raster files: binary netpbm (P5/P6) and PNG.

#include <png.h>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/image.hpp"

namespace dgs::raster {

enum class Format { png, ppm };

inline std::string extension(Format f) { return f == Format::png ? "png" : "ppm"; }

inline std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

inline bool is_raster_file(const std::filesystem::path& p) {
  const auto e = lower_ext(p);
  return e == ".png" || e == ".ppm" || e == ".pgm" || e == ".pnm";
}

namespace detail {

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::not_found, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads one whitespace/comment-delimited header token of a netpbm file.
inline std::string pnm_token(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < buf.size() && !std::isspace(buf[pos])) tok.push_back(static_cast<char>(buf[pos++]));
  return tok;
}

inline Frame decode_pnm(const std::vector<std::uint8_t>& buf, const std::string& name) {
  std::size_t pos = 0;
  const auto magic = pnm_token(buf, pos);
  if (magic != "P6" && magic != "P5") fail(Errc::unsupported_format, name + ": not a binary PPM/PGM");
  unsigned long w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(pnm_token(buf, pos));
    h = std::stoul(pnm_token(buf, pos));
    maxval = std::stoul(pnm_token(buf, pos));
  } catch (const std::exception&) {
    fail(Errc::decode_error, name + ": malformed netpbm header");
  }
  if (maxval != 255) fail(Errc::unsupported_format, name + ": only 8-bit netpbm is supported");
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16) fail(Errc::decode_error, name + ": bad dimensions");
  ++pos;  // single whitespace after maxval
  const std::size_t channels = magic == "P6" ? 3 : 1;
  const std::size_t need = std::size_t{w} * h * channels;
  if (buf.size() < pos + need) fail(Errc::decode_error, name + ": truncated pixel data");
  Frame f(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h));
  if (channels == 3) {
    std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(pos), need, f.rgb.begin());
  } else {
    for (std::size_t i = 0; i < need; ++i) {
      const auto v = buf[pos + i];
      f.rgb[3 * i] = f.rgb[3 * i + 1] = f.rgb[3 * i + 2] = v;
    }
  }
  return f;
}

inline Frame decode_png(const std::vector<std::uint8_t>& buf, const std::string& name) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, buf.data(), buf.size()))
    fail(Errc::decode_error, name + ": " + img.message);
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    fail(Errc::decode_error, name + ": empty PNG");
  }
  img.format = PNG_FORMAT_RGB;
  Frame f(img.width, img.height);
  if (!png_image_finish_read(&img, nullptr, f.rgb.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    fail(Errc::decode_error, name + ": " + msg);
  }
  return f;
}

}  // namespace detail

// Decodes a raster file into an RGB frame; grayscale inputs are replicated to
// all three channels.
inline Frame read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::not_found, path.string() + " does not exist");
  const auto ext = lower_ext(path);
  const auto buf = detail::slurp(path);
  if (ext == ".png") return detail::decode_png(buf, path.string());
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return detail::decode_pnm(buf, path.string());
  fail(Errc::unsupported_format, path.string() + ": unknown raster extension");
}

// Reads only the dimensions, without decoding pixel data where possible.
inline std::pair<std::uint32_t, std::uint32_t> read_geometry(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  const auto buf = detail::slurp(path);
  if (ext == ".png") {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, buf.data(), buf.size()))
      fail(Errc::decode_error, path.string() + ": " + img.message);
    const std::pair<std::uint32_t, std::uint32_t> wh{img.width, img.height};
    png_image_free(&img);
    return wh;
  }
  const auto f = read_image(path);
  return {f.width, f.height};
}

inline std::vector<std::uint8_t> encode(const Frame& f, Format fmt) {
  if (fmt == Format::ppm) {
    const std::string header =
        "P6\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), f.rgb.begin(), f.rgb.end());
    return out;
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = f.width;
  img.height = f.height;
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, f.rgb.data(), 0, nullptr))
    fail(Errc::io_error, std::string("png sizing failed: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, f.rgb.data(), 0, nullptr))
    fail(Errc::io_error, std::string("png encode failed: ") + img.message);
  out.resize(size);
  return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io_error, "short write to " + path.string());
}

inline void write_image(const std::filesystem::path& path, const Frame& f) {
  const auto ext = lower_ext(path);
  if (ext == ".png") return write_bytes(path, encode(f, Format::png));
  if (ext == ".ppm") return write_bytes(path, encode(f, Format::ppm));
  fail(Errc::unsupported_format, path.string() + ": write supports .png and .ppm");
}

}  // namespace dgs::raster
