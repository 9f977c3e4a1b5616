#include "ecgdigi/image_io.hpp"
#include "ecgdigi/imgproc.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <numeric>

using namespace ecgdigi;

TEST(Convolve, IdentityKernelAndClampedBorders) {
    Plane p(3, 2);
    std::iota(p.data.begin(), p.data.end(), 1.0);
    EXPECT_EQ(convolve(p, Kernel{}).data, p.data);
    // Box 3x3 at the corner reads the clamped border.
    const Plane box = convolve(p, Kernel{3, std::vector<double>(9, 1.0 / 9.0)});
    // Neighbourhood of (0,0) with clamping: rows {0,0,1}, cols {0,0,1}.
    const double expect = (1 + 1 + 2 + 1 + 1 + 2 + 4 + 4 + 5) / 9.0;
    EXPECT_NEAR(box.at(0, 0), expect, 1e-12);
}

TEST(Gaussian, TapsNormalizedAndImpulse) {
    const auto taps = gaussian_taps(1.0, 5);
    ASSERT_EQ(taps.size(), 5u);
    EXPECT_NEAR(std::accumulate(taps.begin(), taps.end(), 0.0), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(taps[0], taps[4]);
    EXPECT_GT(taps[2], taps[1]);
    const auto impulse = gaussian_taps(0.0, 5);
    EXPECT_EQ(impulse, (std::vector<double>{0, 0, 1, 0, 0}));
    EXPECT_EQ(gaussian_size_for(1.0), 7);
    EXPECT_EQ(gaussian_size_for(0.0), 1);
}

TEST(Gaussian, ConstantPlaneUnchanged) {
    const Plane p(9, 7, 123.0);
    for (double v : gaussian_blur(p, 1.3, 7).data) EXPECT_NEAR(v, 123.0, 1e-9);
}

TEST(ColorConversion, GrayscaleIsIdempotent) {
    RasterImage rgb(4, 1, 3, std::vector<std::uint8_t>{255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30});
    const RasterImage g = to_grayscale(rgb);
    EXPECT_EQ(g.channels(), 1);
    // Rec.601 weights, rounded half up.
    EXPECT_EQ(g.at(0, 0), 76);
    EXPECT_EQ(g.at(1, 0), 150);
    EXPECT_EQ(g.at(2, 0), 29);
    EXPECT_EQ(to_grayscale(g), g);
    EXPECT_EQ(to_rgb(g).at(1, 0, 2), 150);
}

TEST(Resize, BilinearConstantAndNearestIdentity) {
    const RasterImage c(13, 7, 3, 77);
    const RasterImage up = resize_bilinear(c, 256, 256);
    for (auto v : up.pixels()) EXPECT_EQ(v, 77);
    BinaryImage m(5, 3);
    m.set(1, 1, true);
    EXPECT_EQ(resize_nearest(m, 5, 3), m);
    const BinaryImage big = resize_nearest(m, 10, 6);
    EXPECT_EQ(big.count(), 4u);
    EXPECT_TRUE(big.at(2, 2) && big.at(3, 3));
}

TEST(Threshold, MidIntensityAndMaskImage) {
    BinaryImage m(3, 2);
    m.set(0, 0, true);
    m.set(2, 1, true);
    const RasterImage img = mask_to_image(m);
    EXPECT_EQ(img.at(0, 0), 0);
    EXPECT_EQ(img.at(1, 0), 255);
    EXPECT_EQ(threshold_mid(img), m);
    RasterImage g(2, 1, 1, std::vector<std::uint8_t>{127, 128});
    const BinaryImage t = threshold_mid(g);
    EXPECT_TRUE(t.at(0, 0));
    EXPECT_FALSE(t.at(1, 0));
}

TEST(RedDominance, GridColorsOnly) {
    RasterImage img(3, 1, 3, std::vector<std::uint8_t>{240, 160, 160, 20, 20, 30, 250, 240, 240});
    const auto r = red_dominance(img, 20);
    EXPECT_EQ(r, (std::vector<std::uint8_t>{1, 0, 0}));
    EXPECT_EQ(red_dominance(to_grayscale(img), 20), (std::vector<std::uint8_t>(3, 0)));
}

TEST(Otsu, SeparatesTwoModes) {
    std::array<std::uint64_t, 256> h{};
    h[20] = 100;
    h[230] = 900;
    const int t = otsu_threshold(h);
    EXPECT_GE(t, 20);
    EXPECT_LT(t, 230);
}

TEST(PngIo, RoundTripRgbGrayAndMask) {
    testing_support::TempDir dir;
    RasterImage rgb(5, 4, 3);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x)
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = static_cast<std::uint8_t>(x * 40 + y * 11 + c * 3);
    write_png(dir / "rgb.png", rgb);
    EXPECT_EQ(read_png(dir / "rgb.png"), rgb);
    const RasterImage gray = to_grayscale(rgb);
    write_png(dir / "gray.png", gray);
    EXPECT_EQ(read_png(dir / "gray.png"), gray);
    BinaryImage m(9, 3);
    m.set(0, 0, true);
    m.set(8, 2, true);
    write_mask_png(dir / "m.png", m);
    EXPECT_EQ(read_mask_png(dir / "m.png"), m);
}

TEST(PngIo, MissingFileIsIoError) {
    try {
        read_png("/nonexistent/page.png");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
        EXPECT_NE(std::string(e.what()).find("/nonexistent/page.png"), std::string::npos);
    }
}
