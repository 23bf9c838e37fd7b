#include <gtest/gtest.h>

#include <random>

#include "dgs/snippet.hpp"
#include "test_util.hpp"

namespace dgs {
namespace {

// Independent gray oracle: floating point luma, rounded half up.
std::uint8_t oracle_luma(int r, int g, int b) {
  const double v = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::floor(v + 0.5 + 1e-9));  // exact .5 ties sit just below in binary
}

TEST(Luma, KnownValues) {
  EXPECT_EQ(luma(255, 0, 0), 76);  // 76.245
  EXPECT_EQ(luma(0, 255, 0), 150);  // 149.685
  EXPECT_EQ(luma(0, 0, 255), 29);  // 29.07
  EXPECT_EQ(luma(255, 255, 255), 255);
  EXPECT_EQ(luma(0, 0, 0), 0);
  EXPECT_EQ(luma(77, 77, 77), 77);
}

TEST(Luma, MatchesFloatingOracleEverywhereOnAGrid) {
  for (int r = 0; r < 256; r += 5)
    for (int g = 0; g < 256; g += 3)
      for (int b = 0; b < 256; b += 7) ASSERT_EQ(luma(r, g, b), oracle_luma(r, g, b)) << r << "," << g << "," << b;
}

TEST(Luma, GrayInputIsFixedPoint) {
  for (int v = 0; v < 256; ++v) EXPECT_EQ(luma(v, v, v), v);
}

TEST(MeanGray, RoundsHalfAwayFromZero) {
  std::vector<Frame> frames{Frame(1, 1, 0, {10, 10, 10}), Frame(1, 1, 1, {11, 11, 11})};
  EXPECT_EQ(mean_gray(frames).at(0, 0), 11);  // 10.5 -> 11
  frames.push_back(Frame(1, 1, 2, {10, 10, 10}));
  EXPECT_EQ(mean_gray(frames).at(0, 0), 10);  // 10.333
  std::vector<Frame> f2{Frame(1, 1, 0, {0, 0, 0}), Frame(1, 1, 1, {1, 1, 1}), Frame(1, 1, 2, {1, 1, 1})};
  EXPECT_EQ(mean_gray(f2).at(0, 0), 1);  // 0.667
}

TEST(MeanGray, GrayIsTakenBeforeAveraging) {
  // mean of grays: (76 + 150)/2 = 113; gray of mean RGB (127.5,127.5,0) would differ.
  std::vector<Frame> frames{Frame(1, 1, 0, {255, 0, 0}), Frame(1, 1, 1, {0, 255, 0})};
  EXPECT_EQ(mean_gray(frames).at(0, 0), 113);
}

TEST(Synthesize, ChannelProvenanceOnRandomSegments) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint32_t w = 1 + rng() % 9, h = 1 + rng() % 7, n = 2 + rng() % 12;
    std::vector<Frame> frames;
    for (std::uint32_t i = 0; i < n; ++i) frames.push_back(test::random_frame(rng, w, h, i));
    const auto img = synthesize_dgs(frames);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        auto g = [&](const Frame& f) {
          const auto p = f.at(x, y);
          return oracle_luma(p.r, p.g, p.b);
        };
        ASSERT_EQ(img.r.at(x, y), g(frames.front()));
        ASSERT_EQ(img.b.at(x, y), g(frames.back()));
        long sum = 0;
        for (const auto& f : frames) sum += g(f);
        const auto expected = static_cast<std::uint8_t>(std::floor(static_cast<double>(sum) / n + 0.5));
        ASSERT_EQ(img.g.at(x, y), expected);
      }
  }
}

TEST(Synthesize, StaticVideoIsAchromatic) {
  std::mt19937_64 rng(4);
  const auto f = test::random_frame(rng, 16, 12);
  std::vector<Frame> frames(40, f);
  const auto img = synthesize_dgs(frames);
  EXPECT_TRUE(img.achromatic());
  EXPECT_EQ(img.r, to_gray(f));
}

TEST(Synthesize, GeometryAndErrors) {
  std::vector<Frame> none;
  try {
    synthesize_dgs(none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_segment);
  }
  std::vector<Frame> mixed{Frame(4, 4), Frame(5, 4)};
  try {
    synthesize_dgs(mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::geometry_mismatch);
  }
}

TEST(Synthesize, SourceAndSpanAgree) {
  std::mt19937_64 rng(17);
  std::vector<Frame> frames;
  for (std::uint32_t i = 0; i < 25; ++i) frames.push_back(test::random_frame(rng, 6, 5, i));
  MemorySource src(frames, "v");
  const Segment seg{"v", 1, 10, 10};
  const auto a = synthesize_dgs(src, seg);
  const auto b = synthesize_dgs(std::span<const Frame>(frames).subspan(10, 10), seg);
  EXPECT_EQ(a.r, b.r);
  EXPECT_EQ(a.g, b.g);
  EXPECT_EQ(a.b, b.b);
  EXPECT_THROW(synthesize_dgs(src, Segment{"v", 0, 20, 10}), Error);
}

TEST(Segmentation, CountLawDropAndKeep) {
  for (std::uint32_t n = 2; n < 200; n += 7)
    for (std::uint32_t x = 2; x < 60; x += 5) {
      const SegmentSpec drop{x, PartialPolicy::drop};
      if (n < x) {
        EXPECT_THROW(segment_frames(n, drop), Error);
      } else {
        const auto segs = segment_frames(n, drop);
        ASSERT_EQ(segs.size(), n / x);
        for (std::size_t k = 0; k < segs.size(); ++k) {
          EXPECT_EQ(segs[k].start, k * x);
          EXPECT_EQ(segs[k].length, x);
          EXPECT_EQ(segs[k].ordinal, k);
        }
      }
      const auto kept = segment_frames(n, {x, PartialPolicy::keep});
      const std::uint32_t rest = n % x;
      EXPECT_EQ(kept.size(), n / x + (rest >= 2 ? 1 : 0));
      if (rest >= 2) EXPECT_EQ(kept.back().length, rest);
    }
}

TEST(Segmentation, ThreeFullSegmentsFrom120) {
  const auto s = segment_frames(120, {40});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[2].start, 80u);
  EXPECT_EQ(s[2].last(), 119u);
}

TEST(Segmentation, InvalidLength) {
  for (std::uint32_t x : {0u, 1u}) {
    try {
      segment_frames(100, {x});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_argument);
    }
  }
}

TEST(Segmentation, TooShort) {
  try {
    segment_frames(30, {40}, "clip");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::video_too_short);
    EXPECT_NE(std::string(e.what()).find("clip"), std::string::npos);
  }
  EXPECT_THROW(segment_frames(1, {2, PartialPolicy::keep}), Error);
}

TEST(EncodeSegments, MatchesPerSegmentSynthesis) {
  std::mt19937_64 rng(31);
  std::vector<Frame> frames;
  for (std::uint32_t i = 0; i < 157; ++i) frames.push_back(test::random_frame(rng, 5, 4, i));
  MemorySource src(frames, "v");
  std::vector<std::vector<Segment>> plans;
  for (std::uint32_t x : {30u, 40u, 50u}) plans.push_back(segment_video(src, {x}));
  std::vector<std::vector<DgsImage>> got(plans.size());
  encode_segments(src, std::span<const std::vector<Segment>>(plans),
                  [&](std::size_t j, DgsImage&& img) { got[j].push_back(std::move(img)); });
  for (std::size_t j = 0; j < plans.size(); ++j) {
    ASSERT_EQ(got[j].size(), plans[j].size());
    for (std::size_t k = 0; k < plans[j].size(); ++k) {
      const auto ref = synthesize_dgs(src, plans[j][k]);
      EXPECT_EQ(got[j][k].segment, plans[j][k]);
      EXPECT_EQ(got[j][k].r, ref.r);
      EXPECT_EQ(got[j][k].g, ref.g);
      EXPECT_EQ(got[j][k].b, ref.b);
    }
  }
}

TEST(Resize, IdentityAndConstant) {
  GrayImage g(7, 5, 0);
  for (std::uint32_t i = 0; i < g.pixels.size(); ++i) g.pixels[i] = static_cast<std::uint8_t>(i * 7);
  EXPECT_EQ(resize_bilinear(g, 7, 5), g);
  const GrayImage c(13, 9, 200);
  const auto r = resize_bilinear(c, 224, 224);
  EXPECT_EQ(r.width, 224u);
  for (auto v : r.pixels) EXPECT_EQ(v, 200);
}

TEST(Resize, HalfPixelCenters) {
  // 2x1 -> 4x1: sample coordinates -0.25, 0.25, 0.75, 1.25 -> clamp, 0.25, 0.75, clamp
  GrayImage g(2, 1);
  g.pixels = {0, 100};
  const auto r = resize_bilinear(g, 4, 1);
  EXPECT_EQ(r.pixels, (std::vector<std::uint8_t>{0, 25, 75, 100}));
  // 4x1 -> 2x1 averages pairs: centers at 0.5 and 2.5
  GrayImage h(4, 1);
  h.pixels = {0, 10, 20, 31};
  EXPECT_EQ(resize_bilinear(h, 2, 1).pixels, (std::vector<std::uint8_t>{5, 26}));  // 25.5 -> 26
}

TEST(Resize, AchromaticSurvivesResize) {
  std::mt19937_64 rng(1);
  const auto f = test::random_frame(rng, 31, 17);
  std::vector<Frame> frames(3, f);
  const auto img = resize_dgs(synthesize_dgs(frames));
  EXPECT_EQ(img.width(), 224u);
  EXPECT_TRUE(img.achromatic());
}

TEST(Filename, Pattern) {
  EXPECT_EQ(snippet_filename({"walk_01", 3, 120, 40}, 40, "png"), "walk_01_k3_x40.png");
}

}  // namespace
}  // namespace dgs
