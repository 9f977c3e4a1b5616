#include "ecgdigi/imgproc.hpp"

#include <algorithm>
#include <cmath>

namespace ecgdigi {

double Plane::clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

Plane channel_plane(const RasterImage& image, int channel) {
    Plane p(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) p.at(x, y) = image.at(x, y, channel);
    return p;
}

Plane luminance_plane(const RasterImage& image) {
    Plane p(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) p.at(x, y) = image.luminance(x, y);
    return p;
}

void store_plane(const Plane& plane, RasterImage& image, int channel) {
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const double v = std::floor(plane.at(x, y) + 0.5);
            image.at(x, y, channel) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
}

Plane convolve(const Plane& in, const Kernel& kernel) {
    const int r = kernel.size / 2;
    Plane out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int ky = -r; ky <= r; ++ky)
                for (int kx = -r; kx <= r; ++kx)
                    acc += kernel.weights[(ky + r) * kernel.size + (kx + r)] * in.clamped(x + kx, y + ky);
            out.at(x, y) = acc;
        }
    return out;
}

std::vector<double> gaussian_taps(double sigma, int size) {
    if (size < 1 || size % 2 == 0) fail(ErrorCode::InvalidArgument, "gaussian kernel size must be odd and >= 1");
    if (!(sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "gaussian sigma must be >= 0");
    std::vector<double> taps(size, 0.0);
    const int r = size / 2;
    if (sigma == 0.0) {
        taps[r] = 1.0;
        return taps;
    }
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        taps[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += taps[i + r];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

int gaussian_size_for(double sigma) { return 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1; }

Plane gaussian_blur(const Plane& in, double sigma, int size) {
    const auto taps = gaussian_taps(sigma, size);
    if (sigma == 0.0) return in;
    const int r = size / 2;
    Plane tmp(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += taps[i + r] * in.clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    Plane out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += taps[i + r] * tmp.clamped(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

RasterImage convolve(const RasterImage& image, const Kernel& kernel) {
    RasterImage out = image;
    for (int c = 0; c < image.channels(); ++c) store_plane(convolve(channel_plane(image, c), kernel), out, c);
    return out;
}

RasterImage gaussian_blur(const RasterImage& image, double sigma, int size) {
    if (sigma == 0.0) {
        gaussian_taps(sigma, size);
        return image;
    }
    RasterImage out = image;
    for (int c = 0; c < image.channels(); ++c)
        store_plane(gaussian_blur(channel_plane(image, c), sigma, size), out, c);
    return out;
}

RasterImage to_grayscale(const RasterImage& image) {
    if (image.channels() == 1) return image;
    RasterImage out(image.width(), image.height(), 1);
    store_plane(luminance_plane(image), out, 0);
    return out;
}

RasterImage to_rgb(const RasterImage& image) {
    if (image.channels() == 3) return image;
    RasterImage out(image.width(), image.height(), 3);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = image.at(x, y, 0);
    return out;
}

RasterImage resize_bilinear(const RasterImage& image, int width, int height) {
    RasterImage out(width, height, image.channels());
    const double sx = static_cast<double>(image.width()) / width;
    const double sy = static_cast<double>(image.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, image.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, image.width() - 1);
            const double wx = fx - x0;
            for (int c = 0; c < image.channels(); ++c) {
                const double top = image.at(x0, y0, c) * (1 - wx) + image.at(x1, y0, c) * wx;
                const double bot = image.at(x0, y1, c) * (1 - wx) + image.at(x1, y1, c) * wx;
                const double v = std::floor(top * (1 - wy) + bot * wy + 0.5);
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }
    }
    return out;
}

BinaryImage resize_nearest(const BinaryImage& mask, int width, int height) {
    BinaryImage out(width, height);
    for (int y = 0; y < height; ++y) {
        const int sy = std::min(static_cast<int>((y + 0.5) * mask.height() / height), mask.height() - 1);
        for (int x = 0; x < width; ++x) {
            const int sx = std::min(static_cast<int>((x + 0.5) * mask.width() / width), mask.width() - 1);
            out.set(x, y, mask.at(sx, sy));
        }
    }
    return out;
}

RasterImage mask_to_image(const BinaryImage& mask) {
    RasterImage out(mask.width(), mask.height(), 1);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) out.at(x, y) = mask.at(x, y) ? 0 : 255;
    return out;
}

BinaryImage threshold_mid(const RasterImage& image) {
    BinaryImage out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) out.set(x, y, image.luminance(x, y) < 128.0);
    return out;
}

std::vector<std::uint8_t> red_dominance(const RasterImage& image, int tolerance) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(image.width()) * image.height(), 0);
    if (image.channels() != 3) return out;
    auto px = image.pixels();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int r = px[3 * i], g = px[3 * i + 1], b = px[3 * i + 2];
        out[i] = (r > g + tolerance && r > b + tolerance) ? 1 : 0;
    }
    return out;
}

int otsu_threshold(std::span<const std::uint64_t, 256> histogram) {
    double total = 0.0, sum_all = 0.0;
    for (int i = 0; i < 256; ++i) {
        total += static_cast<double>(histogram[i]);
        sum_all += static_cast<double>(i) * histogram[i];
    }
    if (total == 0.0) return 127;
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_t = 0;
    for (int t = 0; t < 255; ++t) {
        w0 += static_cast<double>(histogram[t]);
        sum0 += static_cast<double>(t) * histogram[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

}  // namespace ecgdigi
