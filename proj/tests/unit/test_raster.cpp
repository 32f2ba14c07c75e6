#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cvb/error.hpp"
#include "cvb/raster.hpp"
#include "test_paths.hpp"

namespace cvb {
namespace {

DepthMap ramp(int w, int h) {
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) d.at(x, y) = 1.0 + 0.5 * x + 0.25 * y;
  return d;
}

TEST(Raster, ValidityRules) {
  DepthMap d(3, 2);
  EXPECT_EQ(d.valid_count(), 0u);
  d.at(0, 0) = 2.0;
  d.at(1, 0) = 0.0;
  d.at(2, 0) = -1.0;
  d.at(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(d.valid_count(), 1u);
  EXPECT_TRUE(d.valid(0, 0));
  EXPECT_FALSE(d.valid(1, 0));

  NormalMap n(2, 2);
  EXPECT_FALSE(n.valid(0, 0));
  n.at(1, 1) = Vec3(0, 0, -1);
  EXPECT_TRUE(n.valid(1, 1));

  CovisibilityMap c(4, 1);
  c.at(1, 0) = CovisLabel::CoVisible;
  c.at(2, 0) = CovisLabel::CoVisible;
  c.at(3, 0) = CovisLabel::OutOfView;
  EXPECT_EQ(c.count(CovisLabel::CoVisible), 2u);
  EXPECT_EQ(c.count(CovisLabel::Invalid), 1u);
}

TEST(SampleBilinear, ExactOnLinearFieldAndAtNodes) {
  const DepthMap d = ramp(5, 4);
  EXPECT_DOUBLE_EQ(*sample_bilinear(d, Vec2(2, 3)), d.at(2, 3));
  EXPECT_NEAR(*sample_bilinear(d, Vec2(1.3, 2.6)), 1.0 + 0.65 + 0.65, 1e-12);
  EXPECT_NEAR(*sample_bilinear(d, Vec2(4, 3)), d.at(4, 3), 1e-12);
  EXPECT_FALSE(sample_bilinear(d, Vec2(-0.01, 1)));
  EXPECT_FALSE(sample_bilinear(d, Vec2(4.01, 1)));
}

TEST(SampleBilinear, RenormalisesOverValidNeighbours) {
  DepthMap d(2, 2);
  d.at(0, 0) = 2.0;
  d.at(1, 0) = 4.0;
  // Bottom row invalid: weights renormalise onto the top row.
  EXPECT_NEAR(*sample_bilinear(d, Vec2(0.5, 0.5)), 3.0, 1e-12);
  DepthMap empty(2, 2);
  EXPECT_FALSE(sample_bilinear(empty, Vec2(0.5, 0.5)));
  // Zero-weight neighbours do not count.
  DepthMap one(2, 2);
  one.at(1, 1) = 7.0;
  EXPECT_FALSE(sample_bilinear(one, Vec2(0.0, 0.0)));
}

TEST(RasterIo, RoundTripsAllKinds) {
  const auto dir = test_dir("raster_io");
  DepthMap d = ramp(7, 3);
  d.at(2, 1) = std::nan("");
  write_depth(dir / "a.depth.cvb", d);
  const DepthMap back = read_depth(dir / "a.depth.cvb");
  ASSERT_TRUE(back.same_shape(d));
  EXPECT_EQ(back.valid_count(), d.valid_count());
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 7; ++x) {
      if (!d.valid(x, y)) {
        EXPECT_FALSE(back.valid(x, y));
        continue;
      }
      EXPECT_EQ(back.at(x, y), static_cast<double>(static_cast<float>(d.at(x, y))));
    }

  NormalMap n(2, 2);
  n.at(0, 0) = Vec3(0, 0, -1);
  n.at(1, 1) = Vec3(0.6, 0, -0.8);
  write_normals(dir / "a.normal.cvb", n);
  const NormalMap nb = read_normals(dir / "a.normal.cvb");
  EXPECT_FALSE(nb.valid(1, 0));
  EXPECT_NEAR((nb.at(1, 1) - n.at(1, 1)).norm(), 0.0, 1e-7);

  CovisibilityMap c(3, 1);
  c.at(0, 0) = CovisLabel::Occluded;
  c.at(2, 0) = CovisLabel::OutOfView;
  write_covis(dir / "a.covis.cvb", c);
  EXPECT_EQ(read_covis(dir / "a.covis.cvb"), c);
}

TEST(RasterIo, ErrorsNameTheFile) {
  const auto dir = test_dir("raster_errors");
  const auto bad = dir / "corrupt.depth.cvb";
  {
    std::ofstream out(bad);
    out << "{not json\n";
  }
  try {
    read_depth(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Format);
    EXPECT_NE(std::string(e.what()).find("corrupt.depth.cvb"), std::string::npos);
  }

  write_covis(dir / "c.cvb", CovisibilityMap(2, 2));
  try {
    read_depth(dir / "c.cvb");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Format);
  }

  write_depth(dir / "short.cvb", ramp(4, 4));
  std::filesystem::resize_file(dir / "short.cvb", std::filesystem::file_size(dir / "short.cvb") - 3);
  EXPECT_THROW(read_depth(dir / "short.cvb"), Error);

  try {
    read_depth(dir / "missing.cvb");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(Quantize, IdempotentAndMatchesStorage) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 80.0);
  DepthMap d(16, 16);
  for (double& v : d.data()) v = u(rng);
  const DepthMap q = quantize_f32(d);
  EXPECT_EQ(quantize_f32(q), q);
  const auto path = test_dir("quantize") / "q.cvb";
  write_depth(path, d);
  EXPECT_EQ(read_depth(path), q);
}

}  // namespace
}  // namespace cvb
