#pragma once

#include "ecgdigi/core.hpp"

#include <span>
#include <vector>

namespace ecgdigi {

struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;

    long long total() const noexcept { return tp + fp + tn + fn; }
};

/// A ratio whose denominator may vanish; value is 0 when !defined.
struct Ratio {
    double value = 0.0;
    bool defined = true;
};

double iou(const PixelBox& a, const PixelBox& b);

Ratio precision(const ConfusionCounts& c);
Ratio recall(const ConfusionCounts& c);
Ratio f1(const ConfusionCounts& c);
/// Harmonic mean of a precision/recall pair.
Ratio f1(double precision, double recall);

/// A detection in pixel space with its confidence.
struct ScoredBox {
    PixelBox box;
    double pc = 1.0;
};

/// Detections and ground truth of one image.
struct ImageDetections {
    std::vector<ScoredBox> detections;
    std::vector<PixelBox> truths;
};

/// All-point interpolated AP over one or more images. Detections are ranked
/// by descending pc across images, ties in input order. Throws when there is
/// no ground truth at all.
double average_precision(std::span<const ImageDetections> images, double iou_threshold);
double average_precision(const ImageDetections& image, double iou_threshold);

double mean_average_precision(std::span<const double> per_class_ap);

/// Pixel confusion counts, foreground = positive.
ConfusionCounts pixel_counts(const BinaryImage& pred, const BinaryImage& truth);
double pixel_accuracy(const BinaryImage& pred, const BinaryImage& truth);
double rmse_image(const BinaryImage& pred, const BinaryImage& truth);

/// Sample-wise RMSE in mV; both signals must share period and length.
double rmse_signal(const LeadSignal& a, const LeadSignal& b);
double max_abs_error(const LeadSignal& a, const LeadSignal& b);

struct DetectionSummary {
    int images = 0;
    ConfusionCounts counts;  // tn unused
    Ratio precision;
    Ratio recall;
    Ratio f1;
    double average_iou = 0.0;  // over matched pairs
    double map50 = 0.0;
};

DetectionSummary evaluate_detections(std::span<const ImageDetections> images, double iou_threshold = 0.5);

}  // namespace ecgdigi
