#include "ecgdigi/metrics.hpp"

#include "ecgdigi/roi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecgdigi {

double iou(const PixelBox& a, const PixelBox& b) {
    const long long ow = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const long long oh = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const long long overlap = ow * oh;
    const long long uni = a.area() + b.area() - overlap;
    if (uni <= 0) return 0.0;
    return static_cast<double>(overlap) / static_cast<double>(uni);
}

namespace {

Ratio safe_ratio(long long num, long long den) {
    if (den == 0) return {0.0, false};
    return {static_cast<double>(num) / static_cast<double>(den), true};
}

void check_same_size(const BinaryImage& a, const BinaryImage& b) {
    if (a.width() != b.width() || a.height() != b.height())
        fail(ErrorCode::InvalidArgument, "mask dimensions differ: " + std::to_string(a.width()) + "x" +
                                             std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                             "x" + std::to_string(b.height()));
}

}  // namespace

Ratio precision(const ConfusionCounts& c) { return safe_ratio(c.tp, c.tp + c.fp); }
Ratio recall(const ConfusionCounts& c) { return safe_ratio(c.tp, c.tp + c.fn); }

Ratio f1(double p, double r) {
    if (p + r == 0.0) return {0.0, false};
    return {2.0 * p * r / (p + r), true};
}

Ratio f1(const ConfusionCounts& c) {
    const Ratio p = precision(c), r = recall(c);
    Ratio out = f1(p.value, r.value);
    out.defined = out.defined && p.defined && r.defined;
    return out;
}

double average_precision(std::span<const ImageDetections> images, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        fail(ErrorCode::InvalidArgument, "IOU threshold must lie in (0, 1]");

    struct Ranked {
        double pc;
        bool tp;
    };
    std::vector<Ranked> ranked;
    long long truths = 0;
    for (const auto& img : images) {
        truths += static_cast<long long>(img.truths.size());
        const MatchResult m = match_detections(img.detections, img.truths, iou_threshold);
        std::vector<bool> tp(img.detections.size(), false);
        for (const auto& p : m.pairs) tp[p.detection] = true;
        for (std::size_t i = 0; i < img.detections.size(); ++i) ranked.push_back({img.detections[i].pc, tp[i]});
    }
    if (truths == 0) fail(ErrorCode::InvalidArgument, "AP undefined without ground truth");
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.pc > b.pc; });

    std::vector<double> prec(ranked.size()), rec(ranked.size());
    long long tp = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (ranked[k].tp) ++tp;
        prec[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        rec[k] = static_cast<double>(tp) / static_cast<double>(truths);
    }
    // Precision envelope, non-increasing from the right.
    for (std::size_t k = ranked.size(); k-- > 1;) prec[k - 1] = std::max(prec[k - 1], prec[k]);
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        ap += (rec[k] - prev_recall) * prec[k];
        prev_recall = rec[k];
    }
    return ap;
}

double average_precision(const ImageDetections& image, double iou_threshold) {
    return average_precision(std::span<const ImageDetections>(&image, 1), iou_threshold);
}

double mean_average_precision(std::span<const double> per_class_ap) {
    if (per_class_ap.empty()) fail(ErrorCode::InvalidArgument, "mAP needs at least one class");
    return std::accumulate(per_class_ap.begin(), per_class_ap.end(), 0.0) / static_cast<double>(per_class_ap.size());
}

ConfusionCounts pixel_counts(const BinaryImage& pred, const BinaryImage& truth) {
    check_same_size(pred, truth);
    ConfusionCounts c;
    for (int y = 0; y < pred.height(); ++y)
        for (int x = 0; x < pred.width(); ++x) {
            const bool p = pred.at(x, y), t = truth.at(x, y);
            if (p && t) ++c.tp;
            else if (p) ++c.fp;
            else if (t) ++c.fn;
            else ++c.tn;
        }
    return c;
}

double pixel_accuracy(const BinaryImage& pred, const BinaryImage& truth) {
    const ConfusionCounts c = pixel_counts(pred, truth);
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double rmse_image(const BinaryImage& pred, const BinaryImage& truth) {
    const ConfusionCounts c = pixel_counts(pred, truth);
    const double n = static_cast<double>(c.total());
    const double acc = static_cast<double>(c.tp + c.tn) / n;
    const double r = std::sqrt(static_cast<double>(c.fp + c.fn) / n);
    // Within an ulp of r, prefer a value for which r*r + accuracy rounds to exactly 1.
    for (double base : {r, std::sqrt(1.0 - acc)})
        for (double v : {base, std::nextafter(base, 0.0), std::nextafter(base, 2.0)})
            if (v * v + acc == 1.0) return v;
    return r;
}

namespace {

void check_comparable(const LeadSignal& a, const LeadSignal& b) {
    if (a.samples.size() != b.samples.size())
        fail(ErrorCode::InvalidArgument, "signal lengths differ: " + std::to_string(a.samples.size()) + " vs " +
                                             std::to_string(b.samples.size()));
    if (a.samples.empty()) fail(ErrorCode::InvalidArgument, "signals are empty");
    if (std::abs(a.sample_period - b.sample_period) > 1e-12 * std::max(a.sample_period, b.sample_period))
        fail(ErrorCode::InvalidArgument, "signals have different sample periods");
}

}  // namespace

double rmse_signal(const LeadSignal& a, const LeadSignal& b) {
    check_comparable(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = a.samples[i] - b.samples[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.samples.size()));
}

double max_abs_error(const LeadSignal& a, const LeadSignal& b) {
    check_comparable(a, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) worst = std::max(worst, std::abs(a.samples[i] - b.samples[i]));
    return worst;
}

DetectionSummary evaluate_detections(std::span<const ImageDetections> images, double iou_threshold) {
    DetectionSummary s;
    s.images = static_cast<int>(images.size());
    double iou_sum = 0.0;
    for (const auto& img : images) {
        const MatchResult m = match_detections(img.detections, img.truths, iou_threshold);
        s.counts.tp += static_cast<long long>(m.pairs.size());
        s.counts.fp += static_cast<long long>(m.unmatched_detections.size());
        s.counts.fn += static_cast<long long>(m.unmatched_truths.size());
        for (const auto& p : m.pairs) iou_sum += p.iou;
    }
    s.precision = precision(s.counts);
    s.recall = recall(s.counts);
    s.f1 = f1(s.counts);
    s.average_iou = s.counts.tp > 0 ? iou_sum / static_cast<double>(s.counts.tp) : 0.0;
    const double ap = average_precision(images, iou_threshold);
    s.map50 = mean_average_precision(std::span<const double>(&ap, 1));
    return s;
}

}  // namespace ecgdigi
