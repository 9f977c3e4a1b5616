#pragma once

#include "ecgdigi/core.hpp"

#include <vector>

namespace ecgdigi {

/// Floating-point single-channel plane, used for intermediate filter math.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    /// Clamp-to-border access.
    double clamped(int x, int y) const;
};

Plane channel_plane(const RasterImage& image, int channel);
Plane luminance_plane(const RasterImage& image);

/// Writes a plane into one channel, rounding half up and clipping to [0,255].
void store_plane(const Plane& plane, RasterImage& image, int channel);

/// Odd-sized square kernel, row-major.
struct Kernel {
    int size = 1;
    std::vector<double> weights{1.0};
};

/// Correlation with a square kernel, clamp-to-border edges.
Plane convolve(const Plane& in, const Kernel& kernel);

/// Normalized 1-D Gaussian taps of odd length `size`. sigma 0 gives a unit impulse.
std::vector<double> gaussian_taps(double sigma, int size);

/// Separable Gaussian, clamp-to-border edges.
Plane gaussian_blur(const Plane& in, double sigma, int size);

/// Kernel size covering +-3 sigma, always odd.
int gaussian_size_for(double sigma);

/// Per-channel filter helpers operating on whole images.
RasterImage convolve(const RasterImage& image, const Kernel& kernel);
RasterImage gaussian_blur(const RasterImage& image, double sigma, int size);

RasterImage to_grayscale(const RasterImage& image);
RasterImage to_rgb(const RasterImage& image);

RasterImage resize_bilinear(const RasterImage& image, int width, int height);
BinaryImage resize_nearest(const BinaryImage& mask, int width, int height);

/// Black ink on white paper, gray.
RasterImage mask_to_image(const BinaryImage& mask);
/// Foreground iff luminance < 128.
BinaryImage threshold_mid(const RasterImage& image);

/// True where r > g + t and r > b + t. All false for gray images.
std::vector<std::uint8_t> red_dominance(const RasterImage& image, int tolerance);

/// Otsu threshold over a 256-bin histogram; returns t such that class 0 is v <= t.
int otsu_threshold(std::span<const std::uint64_t, 256> histogram);

}  // namespace ecgdigi
