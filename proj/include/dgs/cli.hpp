#pragma once

// The `dgs` command line. run() returns the process exit code:
//   0 success, 1 partial failure (diagnostics on stderr), 2 usage error.
// Diagnostics use the stable prefix "ERROR:<code>:".

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dgs/bench.hpp"
#include "dgs/error.hpp"
#include "dgs/motion.hpp"
#include "dgs/parallel.hpp"
#include "dgs/pretext.hpp"
#include "dgs/probe.hpp"
#include "dgs/raster_io.hpp"
#include "dgs/snippet.hpp"
#include "dgs/synth.hpp"
#include "dgs/version.hpp"
#include "dgs/video_io.hpp"

namespace dgs::cli {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Resize {
  std::uint32_t w = 224, h = 224;
  bool native = false;
};

inline Resize parse_resize(const std::string& s) {
  if (s == "0" || s == "native") return {0, 0, true};
  try {
    const auto x = s.find('x');
    std::size_t used = 0;
    if (x == std::string::npos) {
      const auto v = std::stoul(s, &used);
      if (used != s.size() || v == 0) throw std::invalid_argument(s);
      return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v), false};
    }
    const auto w = std::stoul(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    const auto rest = s.substr(x + 1);
    const auto h = std::stoul(rest, &used);
    if (used != rest.size() || w == 0 || h == 0) throw std::invalid_argument(s);
    return {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h), false};
  } catch (const std::logic_error&) {
    throw UsageError("--resize expects N, WxH or 0 (native), got '" + s + "'");
  }
}

inline raster::Format parse_format(const std::string& s) {
  if (s == "png") return raster::Format::png;
  if (s == "ppm") return raster::Format::ppm;
  throw UsageError("--format must be png or ppm, got '" + s + "'");
}

inline std::vector<std::uint32_t> parse_lengths(const std::string& s) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::logic_error&) {
      throw UsageError("--classes expects comma-separated integers, got '" + s + "'");
    }
  }
  return out;
}

inline void require_x(std::uint32_t x) {
  if (x < 2) throw UsageError("segment length X must satisfy X>=2 (got " + std::to_string(x) + ")");
}

inline void report(std::ostream& err, const Error& e) {
  err << "ERROR:" << errc_name(e.code()) << ": " << e.what() << '\n';
}

inline std::vector<std::unique_ptr<VideoSource>> open_all(const std::vector<std::string>& descs, std::ostream& err,
                                                         bool& partial) {
  std::vector<std::unique_ptr<VideoSource>> out;
  for (const auto& d : descs) {
    try {
      out.push_back(open_source(d));
    } catch (const Error& e) {
      report(err, e);
      partial = true;
    }
  }
  return out;
}

// Raster files named on the command line, or found (natural order) in
// directories named on the command line.
inline std::vector<fs::path> collect_rasters(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p = in;
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && raster::is_raster_file(e.path())) found.push_back(e.path());
      std::sort(found.begin(), found.end(), [](const fs::path& a, const fs::path& b) {
        return detail::natural_less(a.filename().string(), b.filename().string());
      });
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      fail(Errc::not_found, in + " does not exist");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  std::uint32_t x = 40;
  bool keep_partial = false;
  std::string resize = "224";
  std::string format = "png";
  unsigned threads = 0;
  std::vector<std::string> inputs;
  std::string output;
};

inline int do_encode(const EncodeArgs& a, std::ostream& out, std::ostream& err) {
  require_x(a.x);
  const auto rs = parse_resize(a.resize);
  const bool raw = a.format == "raw";
  const auto fmt = raw ? raster::Format::png : parse_format(a.format);
  const bool to_stdout = a.output == "-";
  if (to_stdout && !raw) throw UsageError("-o - is only valid with --format raw");
  if (to_stdout && a.inputs.size() != 1) throw UsageError("-o - accepts exactly one input");
  if (!to_stdout) fs::create_directories(a.output);

  bool partial = false;
  auto sources = open_all(a.inputs, err, partial);
  const SegmentSpec spec{a.x, a.keep_partial ? PartialPolicy::keep : PartialPolicy::drop};
  std::vector<std::string> errors(sources.size());
  std::vector<std::size_t> written(sources.size(), 0);
  parallel_for(sources.size(), resolve_threads(a.threads), [&](std::size_t v) {
    auto& src = *sources[v];
    try {
      const auto segments = segment_video(src, spec);
      std::vector<Frame> snippets;
      const std::vector<std::vector<Segment>> plans{segments};
      encode_segments(src, plans, [&](std::size_t, DgsImage&& img) {
        const DgsImage final_img = rs.native ? std::move(img) : resize_dgs(img, rs.w, rs.h);
        Frame f = to_interleaved(final_img, final_img.segment.ordinal);
        if (raw) {
          snippets.push_back(std::move(f));
        } else {
          raster::write_bytes(fs::path(a.output) / snippet_filename(final_img.segment, a.x, raster::extension(fmt)),
                              raster::encode(f, fmt));
        }
        ++written[v];
      });
      if (raw && !snippets.empty()) {
        if (to_stdout)
          write_raw(out, snippets);
        else
          write_raw(fs::path(a.output) / (src.id() + "_x" + std::to_string(a.x) + ".dgsraw"), snippets);
      }
    } catch (const Error& e) {
      std::ostringstream s;
      report(s, Error(e.code(), tag_with(src.id(), e.what())));
      errors[v] = s.str();
    }
  });
  for (std::size_t v = 0; v < sources.size(); ++v) {
    if (!errors[v].empty()) {
      err << errors[v];
      partial = true;
    } else if (!to_stdout) {
      out << sources[v]->id() << ": " << written[v] << " snippet(s)\n";
    }
  }
  return partial ? 1 : 0;
}

struct PretextArgs {
  std::string classes = "30,40,50";
  std::string resize = "224";
  double split = 0.8;
  std::uint64_t seed = 0;
  bool balance = false;
  std::string format = "png";
  unsigned threads = 0;
  std::vector<std::string> inputs;
  std::string output;
};

inline dataset::GenerateOptions generate_options(const std::string& resize, double split, std::uint64_t seed,
                                                 bool balance, const std::string& format, unsigned threads) {
  const auto rs = parse_resize(resize);
  if (rs.native) throw UsageError("datasets need a fixed --resize target");
  if (!(split > 0 && split < 1)) throw UsageError("--split must be in (0,1)");
  dataset::GenerateOptions o;
  o.resize_w = rs.w;
  o.resize_h = rs.h;
  o.split_ratio = split;
  o.seed = seed;
  o.balance = balance;
  o.format = parse_format(format);
  o.threads = resolve_threads(threads);
  return o;
}

inline int finish_generate(const dataset::GenerateResult& res, const fs::path& outdir, std::ostream& out,
                           std::ostream& err, bool partial) {
  for (const auto& f : res.failures) err << "ERROR:" << f << '\n';
  for (const auto& w : res.warnings) err << "WARNING: " << w << '\n';
  std::size_t train = 0;
  for (const auto& r : res.manifest.records) train += r.split == dataset::Split::train ? 1 : 0;
  out << (outdir / dataset::kManifestName).string() << ": " << res.manifest.records.size() << " records ("
      << train << " train, " << res.manifest.records.size() - train << " val)\n";
  return partial || res.partial() ? 1 : 0;
}

inline int do_pretext(const PretextArgs& a, std::ostream& out, std::ostream& err) {
  dataset::LengthClassSet classes{parse_lengths(a.classes)};
  try {
    classes.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("--classes: ") + e.what());
  }
  const auto opt = generate_options(a.resize, a.split, a.seed, a.balance, a.format, a.threads);
  bool partial = false;
  auto sources = open_all(a.inputs, err, partial);
  std::vector<VideoSource*> ptrs;
  for (auto& s : sources) ptrs.push_back(s.get());
  const auto res = dataset::generate_pretext(ptrs, classes, opt, a.output);
  return finish_generate(res, a.output, out, err, partial);
}

struct DownstreamArgs {
  std::vector<std::string> live, attack;
  std::uint32_t x = 40;
  std::string resize = "224";
  double split = 0.8;
  std::uint64_t seed = 0;
  bool balance = false;
  std::string format = "png";
  unsigned threads = 0;
  std::string output;
};

inline int do_downstream(const DownstreamArgs& a, std::ostream& out, std::ostream& err) {
  require_x(a.x);
  const auto opt = generate_options(a.resize, a.split, a.seed, a.balance, a.format, a.threads);
  bool partial = false;
  auto live = open_all(a.live, err, partial);
  auto attack = open_all(a.attack, err, partial);
  std::vector<dataset::LabeledVideo> videos;
  for (auto& s : live) videos.push_back({s.get(), 0});
  for (auto& s : attack) videos.push_back({s.get(), 1});
  const auto res = dataset::generate_downstream(videos, a.x, opt, a.output);
  return finish_generate(res, a.output, out, err, partial);
}

struct AnalyzeArgs {
  unsigned threshold = motion::kDefaultThreshold;
  unsigned threads = 0;
  std::vector<std::string> inputs;
  std::string output;
};

inline int do_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream&) {
  if (a.threshold < 1 || a.threshold > 255) throw UsageError("--threshold must be in [1,255]");
  const auto files = collect_rasters(a.inputs);
  if (files.empty()) fail(Errc::empty_input, "no snippet images found");
  std::vector<PlanarRgb> imgs(files.size());
  parallel_for(files.size(), resolve_threads(a.threads),
               [&](std::size_t i) { imgs[i] = to_planar(raster::read_image(files[i])); });
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.string());
  const auto rep = motion::motion_report(imgs, static_cast<std::uint8_t>(a.threshold), names);
  fs::create_directories(a.output);
  std::ofstream csv(fs::path(a.output) / "motion_report.csv");
  rep.write_csv(csv);
  std::ofstream summary(fs::path(a.output) / "motion_summary.txt");
  rep.write_summary(summary);
  out << rep.images.size() << " image(s), aggregate motion fraction " << motion::detail::fmt_double(rep.aggregate_fraction)
      << '\n';
  return 0;
}

struct BenchArgs {
  std::string methods = "dgs,flow";
  std::uint32_t reps = 5;
  std::uint32_t warmup = 1;
  std::uint32_t x = 40;
  double alpha = 1.0;
  std::uint32_t iterations = 100;
  unsigned threads = 1;
  std::vector<std::string> inputs;
  std::string output;
};

inline int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  require_x(a.x);
  if (a.reps < 3) throw UsageError("--reps must be >= 3");
  if (!(a.alpha > 0)) throw UsageError("--alpha must be > 0");
  if (a.iterations < 1) throw UsageError("--iterations must be >= 1");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  std::vector<bench::Method> methods;
  std::stringstream ss(a.methods);
  for (std::string m; std::getline(ss, m, ',');) {
    try {
      methods.push_back(bench::parse_method(m));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  bench::BenchConfig cfg;
  cfg.segment = {a.x, PartialPolicy::drop};
  cfg.hs = {a.alpha, a.iterations};
  cfg.reps = a.reps;
  cfg.warmup = a.warmup;
  cfg.threads = a.threads;

  bool partial = false;
  std::vector<bench::BenchResult> results;
  for (auto& src : open_all(a.inputs, err, partial)) {
    try {
      const auto frames = read_all(*src);
      for (auto m : methods) results.push_back(bench::bench_method(m, frames, cfg, src->id()));
    } catch (const Error& e) {
      report(err, Error(e.code(), tag_with(src->id(), e.what())));
      partial = true;
    }
  }
  if (results.empty()) return 1;
  const auto rep = bench::bench_report(results);
  out << "X=" << a.x << " alpha=" << a.alpha << " iterations=" << a.iterations << " threads=" << a.threads
      << " reps=" << a.reps << " warmup=" << a.warmup << '\n'
      << rep.text;
  if (!a.output.empty()) {
    fs::create_directories(a.output);
    std::ofstream(fs::path(a.output) / "bench.csv") << rep.csv;
  }
  return partial ? 1 : 0;
}

struct ProbeArgs {
  std::string manifest;
  std::uint32_t epochs = 500;
  double lr = 0.1;
  std::uint64_t seed = 0;
  bool permute_labels = false;
  unsigned threads = 0;
  std::string output;
};

inline int do_probe(const ProbeArgs& a, std::ostream& out, std::ostream&) {
  if (!(a.lr > 0)) throw UsageError("--lr must be > 0");
  if (a.epochs < 1) throw UsageError("--epochs must be >= 1");
  const fs::path mpath = a.manifest;
  const auto m = dataset::load_manifest(mpath);
  const auto samples = probe::load_samples(m, mpath.parent_path(), resolve_threads(a.threads), a.permute_labels, a.seed);
  const auto res = probe::train_softmax(samples.train, samples.val, m.n_classes(), {a.epochs, a.lr, a.seed});

  fs::create_directories(a.output);
  std::ofstream model(fs::path(a.output) / "probe_model.txt");
  res.model.save(model);
  std::ofstream curve(fs::path(a.output) / "loss_curve.csv");
  probe::write_curve_csv(curve, res.curve);

  std::ostringstream metrics;
  auto dump = [&](const char* name, const std::vector<probe::Sample>& s) {
    if (s.empty()) {
      metrics << name << " records 0\n";
      return;
    }
    const auto ev = probe::evaluate(res.model, s);
    metrics << name << " records " << ev.count << '\n'
            << name << " accuracy " << motion::detail::fmt_double(ev.accuracy) << '\n'
            << name << " mean_loss " << motion::detail::fmt_double(ev.mean_loss) << '\n';
    for (std::size_t c = 0; c < ev.confusion.size(); ++c) {
      metrics << name << " confusion " << m.class_names[c];
      for (auto v : ev.confusion[c]) metrics << ' ' << v;
      metrics << '\n';
    }
  };
  dump("train", samples.train);
  dump("val", samples.val);
  std::ofstream(fs::path(a.output) / "metrics.txt") << metrics.str();
  out << metrics.str();
  return 0;
}

inline int do_validate(const std::string& manifest, std::ostream& out) {
  const fs::path p = manifest;
  const auto m = dataset::load_manifest(p);
  const auto issues = dataset::validate_manifest(m, p.parent_path());
  for (const auto& i : issues) out << dataset::to_string(i.kind) << ": " << i.message << '\n';
  out << m.records.size() << " records, " << issues.size() << " issue(s)\n";
  return issues.empty() ? 0 : 1;
}

struct SynthArgs {
  std::string scene;
  std::string format = "raw";
  std::string output;
};

inline int do_synth(const SynthArgs& a, std::ostream& out) {
  const auto spec = synth::load_scene(a.scene);
  if (a.format == "raw") {
    if (a.output == "-") {
      synth::write_scene_raw(spec, out);
    } else {
      if (const auto parent = fs::path(a.output).parent_path(); !parent.empty()) fs::create_directories(parent);
      std::ofstream f(a.output, std::ios::binary | std::ios::trunc);
      if (!f) fail(Errc::io_error, "cannot write " + a.output);
      synth::write_scene_raw(spec, f);
    }
  } else {
    synth::write_scene_images(spec, a.output, parse_format(a.format));
  }
  return 0;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Dynamic grayscale snippet toolkit", "dgs"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print the version and exit");

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode videos into one snippet per segment");
  encode->add_option("--x", enc.x, "Frames per segment (X>=2)")->capture_default_str();
  encode->add_flag("--keep-partial", enc.keep_partial, "Keep a trailing segment of >=2 frames shorter than X");
  encode->add_option("--resize", enc.resize, "Output size: N, WxH, or 0 for native")->capture_default_str();
  encode->add_option("--format", enc.format, "png, ppm, or raw (DGSRAW1 stream per video)")->capture_default_str();
  encode->add_option("--threads", enc.threads, "Worker threads (default: $DGS_THREADS or all cores)");
  encode->add_option("inputs", enc.inputs, "Image directories, .y4m, DGSRAW1 files, rawrgb:WxH:path, or -")->required();
  encode->add_option("-o,--output", enc.output, "Output directory, or - for a raw stream on stdout")->required();

  PretextArgs pre;
  auto* pretext = app.add_subcommand("pretext", "Generate a temporal-length pretext dataset");
  pretext->add_option("--classes", pre.classes, "Increasing segment lengths, one class each")->capture_default_str();
  pretext->add_option("--resize", pre.resize, "Snippet size: N or WxH")->capture_default_str();
  pretext->add_option("--split", pre.split, "Fraction of videos assigned to train")->capture_default_str();
  pretext->add_option("--seed", pre.seed, "Split and balancing seed")->capture_default_str();
  pretext->add_flag("--balance", pre.balance, "Subsample every class to the smallest class count");
  pretext->add_option("--format", pre.format, "png or ppm")->capture_default_str();
  pretext->add_option("--threads", pre.threads, "Worker threads (default: $DGS_THREADS or all cores)");
  pretext->add_option("inputs", pre.inputs, "Video sources")->required();
  pretext->add_option("-o,--output", pre.output, "Output directory")->required();

  DownstreamArgs down;
  auto* downstream = app.add_subcommand("downstream", "Generate a live/attack dataset");
  downstream->add_option("--live", down.live, "Live (bona fide) videos");
  downstream->add_option("--attack", down.attack, "Attack videos");
  downstream->add_option("--x", down.x, "Frames per segment (X>=2)")->capture_default_str();
  downstream->add_option("--resize", down.resize, "Snippet size: N or WxH")->capture_default_str();
  downstream->add_option("--split", down.split, "Fraction of videos assigned to train")->capture_default_str();
  downstream->add_option("--seed", down.seed, "Split and balancing seed")->capture_default_str();
  downstream->add_flag("--balance", down.balance, "Subsample both classes to the smaller count");
  downstream->add_option("--format", down.format, "png or ppm")->capture_default_str();
  downstream->add_option("--threads", down.threads, "Worker threads (default: $DGS_THREADS or all cores)");
  downstream->add_option("-o,--output", down.output, "Output directory")->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Motion statistics of snippet images");
  analyze->add_option("--threshold", an.threshold, "Chroma threshold for motion pixels")->capture_default_str();
  analyze->add_option("--threads", an.threads, "Worker threads (default: $DGS_THREADS or all cores)");
  analyze->add_option("inputs", an.inputs, "Snippet images or directories")->required();
  analyze->add_option("-o,--output", an.output, "Output directory")->required();

  BenchArgs be;
  auto* benchc = app.add_subcommand("bench", "Compare snippet and optical-flow encoding throughput");
  benchc->add_option("--methods", be.methods, "Comma-separated: dgs, flow")->capture_default_str();
  benchc->add_option("--reps", be.reps, "Timed repetitions (>=3)")->capture_default_str();
  benchc->add_option("--warmup", be.warmup, "Discarded warm-up runs")->capture_default_str();
  benchc->add_option("--x", be.x, "Frames per segment (X>=2)")->capture_default_str();
  benchc->add_option("--alpha", be.alpha, "Horn-Schunck smoothness weight")->capture_default_str();
  benchc->add_option("--iterations", be.iterations, "Horn-Schunck sweeps")->capture_default_str();
  benchc->add_option("--threads", be.threads, "Worker threads for both methods")->capture_default_str();
  benchc->add_option("inputs", be.inputs, "Video sources")->required();
  benchc->add_option("-o,--output", be.output, "Directory for bench.csv");

  ProbeArgs pr;
  auto* probec = app.add_subcommand("probe", "Train a linear softmax probe on a dataset manifest");
  probec->add_option("manifest", pr.manifest, "manifest.jsonl")->required();
  probec->add_option("--epochs", pr.epochs, "Full-batch gradient steps")->capture_default_str();
  probec->add_option("--lr", pr.lr, "Learning rate")->capture_default_str();
  probec->add_option("--seed", pr.seed, "Seed for --permute-labels")->capture_default_str();
  probec->add_flag("--permute-labels", pr.permute_labels, "Shuffle labels across records (control run)");
  probec->add_option("--threads", pr.threads, "Feature extraction threads");
  probec->add_option("-o,--output", pr.output, "Output directory")->required();

  std::string manifest_to_check;
  auto* validate = app.add_subcommand("validate", "Check a dataset manifest against its files");
  validate->add_option("manifest", manifest_to_check, "manifest.jsonl")->required();

  SynthArgs sy;
  auto* synthc = app.add_subcommand("synth", "Render a synthetic scene description");
  synthc->add_option("scene", sy.scene, "Scene file")->required();
  synthc->add_option("--format", sy.format, "raw (DGSRAW1), png or ppm (image directory)")->capture_default_str();
  synthc->add_option("-o,--output", sy.output, "Output file, directory, or - for stdout")->required();

  app.add_subcommand("version", "Print version and numeric conventions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "ERROR:usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (show_version) {
      out << version_line() << '\n';
      return 0;
    }
    if (app.got_subcommand("version")) {
      out << provenance();
      return 0;
    }
    if (*encode) return do_encode(enc, out, err);
    if (*pretext) return do_pretext(pre, out, err);
    if (*downstream) {
      if (down.live.empty() && down.attack.empty()) throw UsageError("downstream needs --live and/or --attack videos");
      return do_downstream(down, out, err);
    }
    if (*analyze) return do_analyze(an, out, err);
    if (*benchc) return do_bench(be, out, err);
    if (*probec) return do_probe(pr, out, err);
    if (*validate) return do_validate(manifest_to_check, out);
    if (*synthc) return do_synth(sy, out);
    out << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "ERROR:usage: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    report(err, e);
    return e.code() == Errc::invalid_argument ? 2 : 1;
  } catch (const std::exception& e) {
    err << "ERROR:internal: " << e.what() << '\n';
    return 1;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"dgs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dgs::cli
