#pragma once

#include "ecgdigi/core.hpp"
#include "ecgdigi/imgproc.hpp"

#include <chrono>
#include <map>
#include <string>

namespace ecgdigi {

struct PreprocessSpec {
    Kernel sharpen_kernel{3, {0, -1, 0, -1, 5, -1, 0, -1, 0}};
    double gaussian_sigma = 0.5;
    int gaussian_kernel_size = 5;

    void validate() const;
};

/// Sharpen, then Gaussian blur; each step re-quantized to 8 bits.
RasterImage preprocess(const RasterImage& lead, const PreprocessSpec& spec);

struct ThresholdSpec {
    int window = 25;
    double bias = 50.0;
    int min_component_area = 8;
    int red_tolerance = 20;

    void validate() const;
};

/// Window mean of a plane, the window clipped to the image.
Plane local_mean(const Plane& plane, int window);

/// The per-pixel rule: foreground iff value < mean - bias.
BinaryImage threshold_against(const Plane& luminance, const Plane& means, double bias);

/// Drops 8-connected foreground components smaller than min_area.
BinaryImage remove_small_components(const BinaryImage& mask, int min_area);

/// Local-mean thresholding with red-grid suppression on RGB input.
BinaryImage binarize_builtin(const RasterImage& lead, const ThresholdSpec& spec);

struct ExternalCommand {
    std::string command_template;
    std::chrono::milliseconds timeout{60000};
};

/// Side length of the external binarizer's square RGB contract.
inline constexpr int kExternalSide = 256;

/// Resizes to 256x256x3, runs the program with {input}/{output} (plus any
/// `extra` placeholders such as {lead}), thresholds its output at mid
/// intensity and maps it back to the lead's size with nearest neighbour.
BinaryImage binarize_external(const RasterImage& lead, const ExternalCommand& command,
                              const std::map<std::string, std::string>& extra = {});

}  // namespace ecgdigi
