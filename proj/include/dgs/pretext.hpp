#pragma once

// Self-supervised pretext datasets: every video is encoded at several segment
// lengths and each snippet is labelled with the index of the length that
// produced it. The downstream variant labels snippets live/attack instead.
//
// Manifest file (JSON lines): the first line is a header object whose first
// key is schema_version; every following line is one record. Keys appear in a
// fixed order and record paths are relative to the manifest's directory.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dgs/error.hpp"
#include "dgs/parallel.hpp"
#include "dgs/raster_io.hpp"
#include "dgs/snippet.hpp"
#include "dgs/video_io.hpp"

namespace dgs::dataset {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kSnippetDir = "snippets";

struct LengthClassSet {
  std::vector<std::uint32_t> lengths{30, 40, 50};

  void validate() const {
    if (lengths.size() < 2) fail(Errc::invalid_argument, "need at least two length classes");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (lengths[i] < 2) fail(Errc::invalid_argument, "class lengths must be >= 2");
      if (i && lengths[i] <= lengths[i - 1]) fail(Errc::invalid_argument, "class lengths must be strictly increasing");
    }
  }
  std::uint32_t max() const { return lengths.back(); }
};

enum class Split { train, val };
enum class Task { pretext, downstream };

inline const char* to_string(Split s) { return s == Split::train ? "train" : "val"; }
inline const char* to_string(Task t) { return t == Task::pretext ? "pretext" : "downstream"; }

struct PretextRecord {
  std::string path;  // relative to the manifest directory
  std::string video_id;
  std::uint32_t segment = 0;
  std::uint32_t length = 0;
  std::uint32_t class_index = 0;
  Split split = Split::train;

  friend bool operator==(const PretextRecord&, const PretextRecord&) = default;
};

struct DatasetManifest {
  int schema_version = kSchemaVersion;
  Task task = Task::pretext;
  std::vector<std::uint32_t> lengths;    // pretext: one per class; downstream: {X}
  std::vector<std::string> class_names;  // "L30"... or {"live", "attack"}
  std::uint32_t resize_w = 224, resize_h = 224;
  double split_ratio = 0.8;
  std::uint64_t split_seed = 0;
  bool balanced = false;
  std::vector<PretextRecord> records;

  std::size_t n_classes() const noexcept { return class_names.size(); }

  std::vector<const PretextRecord*> split(Split s) const {
    std::vector<const PretextRecord*> out;
    for (const auto& r : records)
      if (r.split == s) out.push_back(&r);
    return out;
  }

  std::string serialize() const;
  static DatasetManifest parse(std::istream& in);
};

inline std::string DatasetManifest::serialize() const {
  using nlohmann::ordered_json;
  std::ostringstream out;
  ordered_json h;
  h["schema_version"] = schema_version;
  h["task"] = to_string(task);
  h["lengths"] = lengths;
  h["class_names"] = class_names;
  h["resize"] = {resize_w, resize_h};
  h["split_ratio"] = split_ratio;
  h["split_seed"] = split_seed;
  h["balanced"] = balanced;
  h["record_count"] = records.size();
  out << h.dump() << '\n';
  for (const auto& r : records) {
    ordered_json j;
    j["path"] = r.path;
    j["video_id"] = r.video_id;
    j["segment"] = r.segment;
    j["length"] = r.length;
    j["class"] = r.class_index;
    j["split"] = to_string(r.split);
    out << j.dump() << '\n';
  }
  return out.str();
}

inline DatasetManifest DatasetManifest::parse(std::istream& in) {
  using nlohmann::json;
  DatasetManifest m;
  std::string line;
  int lineno = 0;
  try {
    if (!std::getline(in, line)) fail(Errc::decode_error, "manifest is empty");
    ++lineno;
    const auto h = json::parse(line);
    m.schema_version = h.at("schema_version").get<int>();
    if (m.schema_version != kSchemaVersion)
      fail(Errc::unsupported_format, "unsupported manifest schema_version " + std::to_string(m.schema_version));
    const auto task = h.at("task").get<std::string>();
    if (task != "pretext" && task != "downstream") fail(Errc::decode_error, "unknown manifest task " + task);
    m.task = task == "pretext" ? Task::pretext : Task::downstream;
    m.lengths = h.at("lengths").get<std::vector<std::uint32_t>>();
    m.class_names = h.at("class_names").get<std::vector<std::string>>();
    const auto rs = h.at("resize").get<std::vector<std::uint32_t>>();
    if (rs.size() != 2) fail(Errc::decode_error, "resize must have two entries");
    m.resize_w = rs[0];
    m.resize_h = rs[1];
    m.split_ratio = h.at("split_ratio").get<double>();
    m.split_seed = h.at("split_seed").get<std::uint64_t>();
    m.balanced = h.value("balanced", false);
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = json::parse(line);
      PretextRecord r;
      r.path = j.at("path").get<std::string>();
      r.video_id = j.at("video_id").get<std::string>();
      r.segment = j.at("segment").get<std::uint32_t>();
      r.length = j.at("length").get<std::uint32_t>();
      r.class_index = j.at("class").get<std::uint32_t>();
      const auto sp = j.at("split").get<std::string>();
      if (sp != "train" && sp != "val") fail(Errc::decode_error, "bad split " + sp);
      r.split = sp == "train" ? Split::train : Split::val;
      m.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail(Errc::decode_error, "manifest line " + std::to_string(lineno) + ": " + e.what());
  }
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::not_found, "cannot open manifest " + path.string());
  return DatasetManifest::parse(in);
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  const auto text = m.serialize();
  raster::write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// ---------------------------------------------------------------------------

// Uniform integer in [0, bound) by rejection; portable across standard
// libraries, unlike std::uniform_int_distribution.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

template <class T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

// Video-level split: sorted ids are shuffled with the seed and the first
// round(ratio * n) go to train, keeping at least one video on each side when
// n >= 2.
inline std::map<std::string, Split> assign_splits(std::vector<std::string> ids, double ratio,
                                                  std::mt19937_64& rng) {
  std::sort(ids.begin(), ids.end());
  seeded_shuffle(ids, rng);
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ids.size())));
  if (ids.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
  std::map<std::string, Split> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = i < n_train ? Split::train : Split::val;
  return out;
}

struct GenerateOptions {
  std::uint32_t resize_w = 224, resize_h = 224;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  bool balance = false;  // cap every class at the smallest class count
  raster::Format format = raster::Format::png;
  unsigned threads = 1;

  void validate() const {
    if (resize_w == 0 || resize_h == 0) fail(Errc::invalid_argument, "resize target must be at least 1x1");
    if (!(split_ratio > 0 && split_ratio < 1)) fail(Errc::invalid_argument, "split ratio must be in (0,1)");
  }
};

struct GenerateResult {
  DatasetManifest manifest;
  std::vector<std::string> failures;  // "<video_id>: <code>: <reason>"
  std::vector<std::string> warnings;
  bool partial() const noexcept { return !failures.empty(); }
};

struct LabeledVideo {
  VideoSource* source = nullptr;
  std::uint32_t label = 0;  // downstream: 0 = live, 1 = attack
};

namespace detail {

struct Planned {
  std::size_t video = 0;       // index into the input list
  std::size_t plan_slot = 0;   // which segment length of this video
  Segment segment;
  std::uint32_t class_index = 0;
};

// Writes the snippets of every planned record and assembles the manifest.
inline void materialize(std::span<VideoSource* const> videos, const std::vector<std::uint32_t>& slot_lengths,
                        std::vector<Planned>& plan, const GenerateOptions& opt,
                        const std::filesystem::path& out_dir, GenerateResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / kSnippetDir);
  const auto ext = raster::extension(opt.format);

  std::vector<std::vector<std::size_t>> by_video(videos.size());
  for (std::size_t p = 0; p < plan.size(); ++p) by_video[plan[p].video].push_back(p);

  std::vector<std::string> errors(videos.size());
  parallel_for(videos.size(), opt.threads, [&](std::size_t v) {
    if (by_video[v].empty()) return;
    std::vector<std::vector<Segment>> plans(slot_lengths.size());
    for (auto p : by_video[v]) plans[plan[p].plan_slot].push_back(plan[p].segment);
    for (auto& pl : plans)
      std::sort(pl.begin(), pl.end(), [](const Segment& a, const Segment& b) { return a.start < b.start; });
    std::vector<fs::path> written;
    try {
      encode_segments(*videos[v], plans, [&](std::size_t slot, DgsImage&& img) {
        const auto resized = resize_dgs(img, opt.resize_w, opt.resize_h);
        const auto path = out_dir / kSnippetDir / snippet_filename(img.segment, slot_lengths[slot], ext);
        raster::write_bytes(path, raster::encode(to_interleaved(resized), opt.format));
        written.push_back(path);
      });
    } catch (const Error& e) {
      for (const auto& p : written) fs::remove(p);
      errors[v] = std::string(errc_name(e.code())) + ": " + tag_with(videos[v]->id(), e.what());
    }
  });

  std::set<std::size_t> failed;
  for (std::size_t v = 0; v < videos.size(); ++v)
    if (!errors[v].empty()) {
      failed.insert(v);
      res.failures.push_back(errors[v]);
    }
  for (const auto& p : plan) {
    if (failed.count(p.video)) continue;
    PretextRecord r;
    r.path = (fs::path(kSnippetDir) / snippet_filename(p.segment, slot_lengths[p.plan_slot], ext)).generic_string();
    r.video_id = p.segment.video_id;
    r.segment = p.segment.ordinal;
    r.length = slot_lengths[p.plan_slot];
    r.class_index = p.class_index;
    res.manifest.records.push_back(std::move(r));
  }
  std::sort(res.manifest.records.begin(), res.manifest.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.video_id, a.length, a.segment) < std::tie(b.video_id, b.length, b.segment);
  });
}

// Keeps a seeded random subset of each class so all classes share the
// smallest class count.
inline void balance_plan(std::vector<Planned>& plan, std::size_t n_classes, std::mt19937_64& rng,
                         GenerateResult& res) {
  std::vector<std::vector<std::size_t>> members(n_classes);
  for (std::size_t i = 0; i < plan.size(); ++i) members[plan[i].class_index].push_back(i);
  std::size_t cap = plan.size();
  for (const auto& m : members)
    if (!m.empty()) cap = std::min(cap, m.size());
  std::vector<bool> keep(plan.size(), false);
  for (auto& m : members) {
    seeded_shuffle(m, rng);
    for (std::size_t i = 0; i < std::min(cap, m.size()); ++i) keep[m[i]] = true;
  }
  std::vector<Planned> out;
  for (std::size_t i = 0; i < plan.size(); ++i)
    if (keep[i]) out.push_back(std::move(plan[i]));
  if (out.size() != plan.size())
    res.warnings.push_back("balanced classes to " + std::to_string(cap) + " records each");
  plan = std::move(out);
}

inline void check_unique_ids(std::span<VideoSource* const> videos) {
  std::set<std::string> seen;
  for (auto* v : videos)
    if (!seen.insert(v->id()).second) fail(Errc::invalid_argument, "duplicate video id " + v->id());
}

}  // namespace detail

// Encodes every video at every class length (trailing partial segments are
// dropped) and writes <out_dir>/manifest.jsonl plus <out_dir>/snippets/.
// Videos shorter than the longest class are reported in failures and skipped.
inline GenerateResult generate_pretext(std::span<VideoSource* const> videos, const LengthClassSet& classes,
                                       const GenerateOptions& opt, const std::filesystem::path& out_dir) {
  classes.validate();
  opt.validate();
  detail::check_unique_ids(videos);
  GenerateResult res;
  auto& m = res.manifest;
  m.task = Task::pretext;
  m.lengths = classes.lengths;
  for (auto L : classes.lengths) m.class_names.push_back("L" + std::to_string(L));
  m.resize_w = opt.resize_w;
  m.resize_h = opt.resize_h;
  m.split_ratio = opt.split_ratio;
  m.split_seed = opt.seed;
  m.balanced = opt.balance;

  std::vector<detail::Planned> plan;
  std::vector<std::string> ids;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const auto n = videos[v]->frame_count();
    if (n < classes.max()) {
      res.failures.push_back("VideoTooShort: " + videos[v]->id() + ": " + std::to_string(n) + " frames < " +
                             std::to_string(classes.max()));
      continue;
    }
    ids.push_back(videos[v]->id());
    for (std::size_t c = 0; c < classes.lengths.size(); ++c)
      for (auto& seg : segment_frames(n, {classes.lengths[c], PartialPolicy::drop}, videos[v]->id()))
        plan.push_back({v, c, std::move(seg), static_cast<std::uint32_t>(c)});
  }
  std::mt19937_64 rng(opt.seed);
  const auto splits = assign_splits(ids, opt.split_ratio, rng);
  if (opt.balance) detail::balance_plan(plan, classes.lengths.size(), rng, res);
  detail::materialize(videos, classes.lengths, plan, opt, out_dir, res);
  for (auto& r : m.records) r.split = splits.at(r.video_id);
  save_manifest(m, out_dir / kManifestName);
  return res;
}

// Binary live/attack dataset at a single segment length. The split is
// stratified by label so each side sees both classes when possible.
inline GenerateResult generate_downstream(std::span<const LabeledVideo> videos, std::uint32_t length,
                                          const GenerateOptions& opt, const std::filesystem::path& out_dir) {
  SegmentSpec{length}.validate();
  opt.validate();
  std::vector<VideoSource*> sources;
  for (const auto& lv : videos) {
    if (lv.label > 1) fail(Errc::invalid_argument, "downstream labels are 0 (live) or 1 (attack)");
    sources.push_back(lv.source);
  }
  detail::check_unique_ids(sources);
  GenerateResult res;
  auto& m = res.manifest;
  m.task = Task::downstream;
  m.lengths = {length};
  m.class_names = {"live", "attack"};
  m.resize_w = opt.resize_w;
  m.resize_h = opt.resize_h;
  m.split_ratio = opt.split_ratio;
  m.split_seed = opt.seed;
  m.balanced = opt.balance;

  std::array<std::vector<std::string>, 2> ids;
  std::vector<detail::Planned> plan;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const auto n = sources[v]->frame_count();
    if (n < length) {
      res.failures.push_back("VideoTooShort: " + sources[v]->id() + ": " + std::to_string(n) + " frames < " +
                             std::to_string(length));
      continue;
    }
    ids[videos[v].label].push_back(sources[v]->id());
    for (auto& seg : segment_frames(n, {length, PartialPolicy::drop}, sources[v]->id()))
      plan.push_back({v, 0, std::move(seg), videos[v].label});
  }
  if (ids[0].empty() || ids[1].empty())
    res.warnings.push_back(std::string("UnbalancedDataset: no ") + (ids[0].empty() ? "live" : "attack") + " videos");

  std::mt19937_64 rng(opt.seed);
  std::map<std::string, Split> splits;
  for (const auto& group : ids) splits.merge(assign_splits(group, opt.split_ratio, rng));
  if (opt.balance) detail::balance_plan(plan, 2, rng, res);
  detail::materialize(sources, m.lengths, plan, opt, out_dir, res);
  for (auto& r : m.records) r.split = splits.at(r.video_id);
  save_manifest(m, out_dir / kManifestName);
  return res;
}

// ---------------------------------------------------------------------------

struct ValidationIssue {
  enum class Kind { missing_file, geometry_mismatch, label_range, split_overlap, decode_error } kind;
  std::string message;
};

inline const char* to_string(ValidationIssue::Kind k) {
  switch (k) {
    case ValidationIssue::Kind::missing_file: return "missing-file";
    case ValidationIssue::Kind::geometry_mismatch: return "geometry-mismatch";
    case ValidationIssue::Kind::label_range: return "label-range";
    case ValidationIssue::Kind::split_overlap: return "split-overlap";
    case ValidationIssue::Kind::decode_error: return "decode-error";
  }
  return "unknown";
}

// Empty result iff every manifest invariant holds.
inline std::vector<ValidationIssue> validate_manifest(const DatasetManifest& m,
                                                      const std::filesystem::path& manifest_dir) {
  using K = ValidationIssue::Kind;
  std::vector<ValidationIssue> issues;
  std::set<std::string> train_ids, val_ids;
  for (const auto& r : m.records) {
    const auto where = r.path + ": ";
    if (r.class_index >= m.n_classes()) {
      issues.push_back({K::label_range, where + "class " + std::to_string(r.class_index) + " >= " +
                                            std::to_string(m.n_classes()) + " classes"});
    } else {
      const auto expected = m.task == Task::pretext ? m.lengths.at(r.class_index) : m.lengths.front();
      if (r.length != expected)
        issues.push_back({K::label_range, where + "length " + std::to_string(r.length) + " does not match class " +
                                              std::to_string(r.class_index)});
    }
    (r.split == Split::train ? train_ids : val_ids).insert(r.video_id);

    const auto file = manifest_dir / r.path;
    if (!std::filesystem::is_regular_file(file)) {
      issues.push_back({K::missing_file, where + "file not found"});
      continue;
    }
    try {
      const auto [w, h] = raster::read_geometry(file);
      if (w != m.resize_w || h != m.resize_h)
        issues.push_back({K::geometry_mismatch, where + std::to_string(w) + "x" + std::to_string(h) + ", expected " +
                                                    std::to_string(m.resize_w) + "x" + std::to_string(m.resize_h)});
    } catch (const Error& e) {
      issues.push_back({K::decode_error, where + e.what()});
    }
  }
  for (const auto& id : train_ids)
    if (val_ids.count(id)) issues.push_back({K::split_overlap, "video " + id + " appears in both train and val"});
  return issues;
}

}  // namespace dgs::dataset
