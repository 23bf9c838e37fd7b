#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dgs/image.hpp"
#include "dgs/raster_io.hpp"
#include "dgs/synth.hpp"

namespace dgs::test {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dgs_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline Frame random_frame(std::mt19937_64& rng, std::uint32_t w, std::uint32_t h, std::uint32_t index = 0) {
  Frame f(w, h, index);
  for (auto& b : f.rgb) b = static_cast<std::uint8_t>(rng() >> 56);
  return f;
}

inline void write_frame_dir(const std::filesystem::path& dir, const std::vector<Frame>& frames,
                            raster::Format fmt = raster::Format::ppm) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i)
    raster::write_bytes(dir / ("frame" + std::to_string(i) + "." + raster::extension(fmt)),
                        raster::encode(frames[i], fmt));
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative path -> bytes for every regular file under root.
inline std::map<std::string, std::vector<std::uint8_t>> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file())
      out[std::filesystem::relative(e.path(), root).generic_string()] = read_file(e.path());
  return out;
}

// A bright rectangle moving horizontally over a constant background.
inline synth::SceneSpec moving_square_scene(std::uint32_t w, std::uint32_t h, std::uint32_t frames,
                                            std::uint32_t size, std::int64_t x0, std::int64_t y0,
                                            Rational vx, Rgb8 color = {255, 255, 255}, Rgb8 bg = {0, 0, 0}) {
  synth::SceneSpec s;
  s.width = w;
  s.height = h;
  s.n_frames = frames;
  s.background.color = bg;
  synth::SceneObject o;
  o.w = o.h = size;
  o.x = x0;
  o.y = y0;
  o.vx = vx;
  o.color = color;
  s.objects.push_back(o);
  return s;
}

}  // namespace dgs::test
