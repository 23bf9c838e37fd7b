#pragma once

#include <string>

namespace dgs {

inline constexpr const char* kVersion = "1.0.0";

inline std::string version_line() { return std::string("dgs ") + kVersion; }

// Fixed numeric conventions; printed so every output can be audited.
inline std::string provenance() {
  std::string s = version_line() + "\n";
#if defined(__clang__)
  s += "build: clang " __clang_version__;
#elif defined(__GNUC__)
  s += "build: gcc " __VERSION__;
#else
  s += "build: unknown compiler";
#endif
  s += ", C++ " + std::to_string(__cplusplus) + "\n";
  s += "grayscale: BT.601 0.299/0.587/0.114, exact integer weights\n";
  s += "rounding: round-half-away-from-zero\n";
  s += "resize: bilinear, half-pixel centers, default 224x224\n";
  s += "y4m: BT.601 full-range YCbCr to RGB, nearest-neighbor chroma upsampling\n";
  s += "segments: X=40 frames, trailing partial segment dropped\n";
  s += "flow: Horn-Schunck alpha=1.0 iterations=100, 4-neighbor averages, replicated edges\n";
  return s;
}

}  // namespace dgs
