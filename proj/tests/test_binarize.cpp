#include "ecgdigi/binarize.hpp"
#include "ecgdigi/image_io.hpp"
#include "ecgdigi/metrics.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace ecgdigi;

namespace {

RasterImage patterned(int w, int h) {
    RasterImage img(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x * 37 + y * 11 + c * 71) % 256);
    return img;
}

// Wandering one-pixel-thick trace, 4-connected.
BinaryImage walk_mask(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    BinaryImage m(w, h);
    int y = h / 2;
    for (int x = 0; x < w; ++x) {
        const int step = static_cast<int>(rng.uniform() * 5.0) - 2;
        const int ny = std::clamp(y + step, 2, h - 3);
        for (int r = std::min(y, ny); r <= std::max(y, ny); ++r) m.set(x, r, true);
        y = ny;
    }
    return m;
}

}  // namespace

TEST(Preprocess, IdentityKernelAndZeroSigmaIsBitIdentical) {
    PreprocessSpec spec;
    spec.sharpen_kernel = Kernel{};
    spec.gaussian_sigma = 0.0;
    const RasterImage img = patterned(31, 17);
    EXPECT_EQ(preprocess(img, spec), img);
}

TEST(Preprocess, ConstantImageUnchanged) {
    const RasterImage img(20, 12, 3, 140);
    EXPECT_EQ(preprocess(img, PreprocessSpec{}), img);
}

TEST(Preprocess, SingleBrightPixelFollowsCenterWeight) {
    // Dark 40 background, one pixel at 60: sharpen gives 40 + 5*20 = 140 at
    // the center and 40 - 20 = 20 at the four neighbours.
    RasterImage img(9, 9, 1, 40);
    img.at(4, 4) = 60;
    PreprocessSpec spec;
    spec.gaussian_sigma = 0.0;
    const RasterImage out = preprocess(img, spec);
    EXPECT_EQ(out.at(4, 4), 140);
    EXPECT_EQ(out.at(3, 4), 20);
    EXPECT_EQ(out.at(4, 5), 20);
    EXPECT_EQ(out.at(3, 3), 40);
    EXPECT_EQ(out.at(0, 0), 40);
}

TEST(Preprocess, DeterministicAndDimensionPreserving) {
    const RasterImage img = patterned(23, 14);
    const RasterImage a = preprocess(img, PreprocessSpec{});
    EXPECT_EQ(a.width(), 23);
    EXPECT_EQ(a.height(), 14);
    EXPECT_EQ(a.channels(), 3);
    EXPECT_EQ(a, preprocess(img, PreprocessSpec{}));
}

TEST(Preprocess, RejectsBadSpec) {
    PreprocessSpec s;
    s.gaussian_kernel_size = 4;
    EXPECT_THROW(preprocess(patterned(5, 5), s), Error);
    s = {};
    s.sharpen_kernel = Kernel{3, {1, 2}};
    EXPECT_THROW(preprocess(patterned(5, 5), s), Error);
}

TEST(BinarizeBuiltin, AllWhiteIsBackground) {
    EXPECT_EQ(binarize_builtin(RasterImage(40, 30, 3, 255), ThresholdSpec{}).count(), 0u);
}

TEST(BinarizeBuiltin, AllBlackIsBackgroundForPositiveBias) {
    // Every local mean is 0, and 0 < 0 - bias never holds.
    EXPECT_EQ(binarize_builtin(RasterImage(40, 30, 3, 0), ThresholdSpec{}).count(), 0u);
    ThresholdSpec s;
    s.bias = 1.0;
    EXPECT_EQ(binarize_builtin(RasterImage(40, 30, 1, 0), s).count(), 0u);
}

TEST(BinarizeBuiltin, SpecValidation) {
    ThresholdSpec s;
    s.window = 4;
    EXPECT_THROW(binarize_builtin(RasterImage(5, 5, 3), s), Error);
    s.window = 1;
    EXPECT_THROW(binarize_builtin(RasterImage(5, 5, 3), s), Error);
    s = {};
    s.min_component_area = -1;
    EXPECT_THROW(binarize_builtin(RasterImage(5, 5, 3), s), Error);
}

TEST(BinarizeBuiltin, RedGridIsSuppressed) {
    RasterImage img(60, 40, 3, 255);
    for (int x = 0; x < 60; x += 5)
        for (int y = 0; y < 40; ++y) {
            img.at(x, y, 0) = 240;
            img.at(x, y, 1) = 160;
            img.at(x, y, 2) = 160;
        }
    EXPECT_EQ(binarize_builtin(img, ThresholdSpec{}).count(), 0u);
}

TEST(BinarizeBuiltin, IdempotentOnRenderedMask) {
    ThresholdSpec s;
    s.min_component_area = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const BinaryImage m = walk_mask(120, 60, seed);
        EXPECT_EQ(binarize_builtin(to_rgb(mask_to_image(m)), s), m) << seed;
        EXPECT_EQ(binarize_builtin(mask_to_image(m), s), m) << seed;
    }
}

TEST(BinarizeBuiltin, DarkeningForegroundKeepsForeground) {
    const BinaryImage m = walk_mask(80, 40, 9);
    RasterImage img(80, 40, 1, 230);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 80; ++x)
            if (m.at(x, y)) img.at(x, y) = 120;
    const Plane lum = luminance_plane(img);
    const Plane means = local_mean(lum, 25);
    const BinaryImage before = threshold_against(lum, means, 10.0);
    Plane darker = lum;
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 80; ++x)
            if (before.at(x, y)) darker.at(x, y) -= 50.0;
    const BinaryImage after = threshold_against(darker, means, 10.0);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 80; ++x)
            if (before.at(x, y)) EXPECT_TRUE(after.at(x, y));
}

TEST(BinarizeBuiltin, LocalMeanClipsWindow) {
    Plane p(3, 1);
    p.data = {0.0, 3.0, 6.0};
    const Plane m = local_mean(p, 3);
    EXPECT_DOUBLE_EQ(m.at(0, 0), 1.5);
    EXPECT_DOUBLE_EQ(m.at(1, 0), 3.0);
    EXPECT_DOUBLE_EQ(m.at(2, 0), 4.5);
}

TEST(BinarizeBuiltin, SmallComponentsRemoved) {
    BinaryImage m(10, 10);
    m.set(1, 1, true);
    for (int x = 3; x < 9; ++x) m.set(x, 5, true);
    const BinaryImage out = remove_small_components(m, 3);
    EXPECT_FALSE(out.at(1, 1));
    EXPECT_EQ(out.count(), 6u);
    // Diagonal neighbours are connected.
    BinaryImage d(4, 4);
    d.set(0, 0, true);
    d.set(1, 1, true);
    d.set(2, 2, true);
    EXPECT_EQ(remove_small_components(d, 3).count(), 3u);
}

TEST(BinarizeBuiltin, CleanSynthCropsMeetAccuracyTarget) {
    const SynthOptions opts{};  // 10 px/mm
    const SyntheticPage page = synthesize_page(7, opts);
    ConfusionCounts pooled;
    for (std::size_t i = 0; i < page.rendered.boxes.size(); ++i) {
        const RasterImage c = crop(page.rendered.page, page.rendered.boxes[i]);
        const BinaryImage pred = binarize_builtin(preprocess(c, PreprocessSpec{}), ThresholdSpec{});
        EXPECT_EQ(pred.width(), c.width());
        EXPECT_EQ(pred.height(), c.height());
        const ConfusionCounts k = pixel_counts(pred, page.rendered.masks[i]);
        pooled.tp += k.tp;
        pooled.fp += k.fp;
        pooled.tn += k.tn;
        pooled.fn += k.fn;
        EXPECT_GE(pixel_accuracy(pred, page.rendered.masks[i]), 0.974) << page.signals[i].lead_name;
    }
    EXPECT_GE(static_cast<double>(pooled.tp + pooled.tn) / pooled.total(), 0.974);
}

TEST(BinarizeBuiltin, DegradedSynthCropsMeetAccuracyBound) {
    const SynthOptions opts{};
    const SyntheticPage page = synthesize_page(8, opts);
    DegradationSpec d;
    d.gaussian_blur_sigma = 1.5;
    d.contrast_scale = 0.6;
    d.to_grayscale = true;
    const RasterImage degraded = degrade(page.rendered.page, d);
    for (std::size_t i = 0; i < page.rendered.boxes.size(); ++i) {
        const RasterImage c = crop(degraded, page.rendered.boxes[i]);
        const BinaryImage pred = binarize_builtin(preprocess(c, PreprocessSpec{}), ThresholdSpec{});
        EXPECT_GE(pixel_accuracy(pred, page.rendered.masks[i]), 0.95) << page.signals[i].lead_name;
    }
}

class ExternalBinarizer : public ::testing::Test {
protected:
    testing_support::TempDir dir;
    RasterImage lead = patterned(70, 33);
};

TEST_F(ExternalBinarizer, IdentityProgramEqualsMidThresholdOfResizedInput) {
    const BinaryImage out = binarize_external(lead, {"cp {input} {output}"});
    const BinaryImage expect =
        resize_nearest(threshold_mid(resize_bilinear(lead, kExternalSide, kExternalSide)), 70, 33);
    EXPECT_EQ(out, expect);
}

TEST_F(ExternalBinarizer, AllBlackOutputIsAllForeground) {
    write_png(dir / "black.png", RasterImage(kExternalSide, kExternalSide, 3, 0));
    const BinaryImage out = binarize_external(lead, {"cp '" + (dir / "black.png").string() + "' {output} # {input}"});
    EXPECT_EQ(out.width(), 70);
    EXPECT_EQ(out.height(), 33);
    EXPECT_EQ(out.count(), out.size());
}

TEST_F(ExternalBinarizer, ExtraPlaceholdersExpand) {
    write_png(dir / "V3.png", RasterImage(kExternalSide, kExternalSide, 1, 0));
    const BinaryImage out =
        binarize_external(lead, {"cp '" + dir.path().string() + "/{lead}.png' {output} # {input}"}, {{"lead", "V3"}});
    EXPECT_EQ(out.count(), out.size());
}

TEST_F(ExternalBinarizer, FailuresAreStageErrors) {
    auto code_of = [&](const std::string& cmd) {
        try {
            binarize_external(lead, {cmd});
        } catch (const Error& e) {
            return std::pair{e.code(), std::string(e.what())};
        }
        return std::pair{ErrorCode::InvalidArgument, std::string("no error")};
    };
    auto [c1, m1] = code_of("echo broken >&2; exit 3 # {input} {output}");
    EXPECT_EQ(c1, ErrorCode::StageFailure);
    EXPECT_NE(m1.find("status 3"), std::string::npos);
    EXPECT_NE(m1.find("broken"), std::string::npos);

    auto [c2, m2] = code_of("true {input} {output}");
    EXPECT_EQ(c2, ErrorCode::StageFailure);
    EXPECT_NE(m2.find("no output"), std::string::npos);

    write_png(dir / "small.png", RasterImage(10, 10, 3, 0));
    auto [c3, m3] = code_of("cp '" + (dir / "small.png").string() + "' {output} # {input}");
    EXPECT_EQ(c3, ErrorCode::StageFailure);
    EXPECT_NE(m3.find("10x10"), std::string::npos);

    EXPECT_THROW(binarize_external(lead, {"cp {input} /tmp/x.png"}), Error);
}
