#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dgs {

enum class Errc {
  not_found,
  unsupported_format,
  inconsistent_geometry,
  index_out_of_range,
  decode_error,
  video_too_short,
  empty_segment,
  geometry_mismatch,
  empty_input,
  out_of_bounds,
  dimension_mismatch,
  degenerate_data,
  invalid_argument,
  io_error,
};

constexpr std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::not_found: return "NotFound";
    case Errc::unsupported_format: return "UnsupportedFormat";
    case Errc::inconsistent_geometry: return "InconsistentGeometry";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::decode_error: return "DecodeError";
    case Errc::video_too_short: return "VideoTooShort";
    case Errc::empty_segment: return "EmptySegment";
    case Errc::geometry_mismatch: return "GeometryMismatch";
    case Errc::empty_input: return "EmptyInput";
    case Errc::out_of_bounds: return "OutOfBounds";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::degenerate_data: return "DegenerateData";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this type; code() is stable and
// is what the CLI prints after the ERROR: prefix.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

// Prefixes a message with the video it concerns unless it already names it.
inline std::string tag_with(const std::string& id, const std::string& what) {
  if (what.rfind(id + ":", 0) == 0) return what;
  return id + ": " + what;
}

}  // namespace dgs
