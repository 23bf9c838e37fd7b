#pragma once

// Throughput comparison of snippet encoding against Horn-Schunck flow
// encoding on identical, pre-decoded frame streams. fps counts source frames
// consumed, so both methods are measured in the same unit.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/flow.hpp"
#include "dgs/parallel.hpp"
#include "dgs/snippet.hpp"
#include "dgs/video_io.hpp"

namespace dgs::bench {

enum class Method { dgs, horn_schunck };

inline std::string to_string(Method m) { return m == Method::dgs ? "dgs" : "flow"; }

inline Method parse_method(const std::string& s) {
  if (s == "dgs") return Method::dgs;
  if (s == "flow" || s == "horn_schunck" || s == "hs") return Method::horn_schunck;
  fail(Errc::invalid_argument, "unknown bench method '" + s + "' (expected dgs or flow)");
}

struct BenchConfig {
  SegmentSpec segment{};
  flow::HsParams hs{};
  std::uint32_t reps = 5;
  std::uint32_t warmup = 1;
  unsigned threads = 1;

  void validate() const {
    segment.validate();
    hs.validate();
    if (reps < 3) fail(Errc::invalid_argument, "bench needs reps >= 3");
    if (threads < 1) fail(Errc::invalid_argument, "bench needs threads >= 1");
  }
};

struct BenchResult {
  Method method = Method::dgs;
  std::string input;
  std::uint64_t frames_processed = 0;
  std::vector<double> rep_seconds;
  double median_s = 0;
  double mean_s = 0;
  double fps = 0;  // frames_processed / median_s
  // parameter echo
  std::uint32_t segment_length = 0;
  double alpha = 0;
  std::uint32_t iterations = 0;
  unsigned threads = 1;
  std::uint32_t warmup = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) fail(Errc::empty_input, "median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Times encoding of every segment of `frames`. Frames are already in memory and
// outputs are kept in memory, so the timed region performs no file I/O.
inline BenchResult bench_method(Method method, std::span<const Frame> frames, const BenchConfig& cfg,
                                std::string input = "memory") {
  cfg.validate();
  const auto segments = segment_frames(static_cast<std::uint32_t>(frames.size()), cfg.segment, input);
  if (segments.empty()) fail(Errc::video_too_short, input + ": no complete segment");

  BenchResult r;
  r.method = method;
  r.input = std::move(input);
  for (const auto& s : segments) r.frames_processed += s.length;
  r.segment_length = cfg.segment.length;
  r.alpha = cfg.hs.alpha;
  r.iterations = cfg.hs.iterations;
  r.threads = cfg.threads;
  r.warmup = cfg.warmup;

  std::vector<PlanarRgb> outputs(segments.size());
  auto run_once = [&] {
    parallel_for(segments.size(), cfg.threads, [&](std::size_t k) {
      const auto seg = frames.subspan(segments[k].start, segments[k].length);
      if (method == Method::dgs)
        outputs[k] = synthesize_dgs(seg, segments[k]);
      else
        outputs[k] = flow::encode_segment_flow(seg, cfg.hs);
    });
  };
  for (std::uint32_t i = 0; i < cfg.warmup; ++i) run_once();
  for (std::uint32_t i = 0; i < cfg.reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    run_once();
    const auto t1 = std::chrono::steady_clock::now();
    r.rep_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  r.median_s = median(r.rep_seconds);
  r.mean_s = std::accumulate(r.rep_seconds.begin(), r.rep_seconds.end(), 0.0) / r.rep_seconds.size();
  // Clock granularity can make a tiny workload read as zero.
  r.fps = static_cast<double>(r.frames_processed) / std::max(r.median_s, 1e-9);
  return r;
}

inline BenchResult bench_method(Method method, VideoSource& src, const BenchConfig& cfg) {
  const auto frames = read_all(src);
  return bench_method(method, frames, cfg, src.id());
}

// ---------------------------------------------------------------------------

struct ReportRow {
  std::string method;
  std::string input;
  std::uint64_t frames = 0;
  double median_s = 0;
  double mean_s = 0;
  double fps = 0;
  double ratio = 1;  // fps relative to the slowest method on the same input

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct BenchReport {
  std::vector<ReportRow> rows;
  std::string text;
  std::string csv;
};

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail(Errc::decode_error, "bad number in bench csv: " + s);
  return v;
}

}  // namespace detail

inline BenchReport bench_report(std::span<const BenchResult> results) {
  if (results.empty()) fail(Errc::empty_input, "bench report needs at least one result");
  std::map<std::string, double> slowest;
  for (const auto& r : results) {
    auto [it, fresh] = slowest.try_emplace(r.input, r.fps);
    if (!fresh) it->second = std::min(it->second, r.fps);
  }
  BenchReport rep;
  for (const auto& r : results)
    rep.rows.push_back({to_string(r.method), r.input, r.frames_processed, r.median_s, r.mean_s, r.fps,
                        r.fps / slowest.at(r.input)});

  std::ostringstream csv;
  csv << "method,input,frames,median_s,mean_s,fps,ratio\n";
  for (const auto& row : rep.rows)
    csv << row.method << ',' << row.input << ',' << row.frames << ',' << detail::shortest(row.median_s) << ','
        << detail::shortest(row.mean_s) << ',' << detail::shortest(row.fps) << ',' << detail::shortest(row.ratio)
        << '\n';
  rep.csv = csv.str();

  std::ostringstream t;
  t << std::left << std::setw(8) << "method" << std::setw(24) << "input" << std::right << std::setw(10) << "frames"
    << std::setw(12) << "median_s" << std::setw(12) << "mean_s" << std::setw(12) << "fps" << std::setw(9) << "ratio"
    << '\n';
  for (const auto& row : rep.rows) {
    std::ostringstream ratio;
    ratio << std::fixed << std::setprecision(1) << row.ratio << 'x';
    t << std::left << std::setw(8) << row.method << std::setw(24) << row.input << std::right << std::setw(10)
      << row.frames << std::fixed << std::setprecision(4) << std::setw(12) << row.median_s << std::setw(12)
      << row.mean_s << std::setprecision(1) << std::setw(12) << row.fps << std::setw(9) << ratio.str() << '\n';
  }
  rep.text = t.str();
  return rep;
}

inline std::vector<ReportRow> parse_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "method,input,frames,median_s,mean_s,fps,ratio")
    fail(Errc::decode_error, "bench csv header mismatch");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 7) fail(Errc::decode_error, "bench csv row has " + std::to_string(f.size()) + " fields");
    ReportRow r;
    r.method = f[0];
    r.input = f[1];
    r.frames = static_cast<std::uint64_t>(detail::parse_double(f[2]));
    r.median_s = detail::parse_double(f[3]);
    r.mean_s = detail::parse_double(f[4]);
    r.fps = detail::parse_double(f[5]);
    r.ratio = detail::parse_double(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace dgs::bench
