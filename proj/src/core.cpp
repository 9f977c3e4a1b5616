#include "ecgdigi/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ecgdigi {

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

std::string_view library_version() noexcept { return "1.0.0"; }

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
    if (channels != 1 && channels != 3) fail(ErrorCode::InvalidArgument, "image must have 1 or 3 channels");
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
    if (channels != 1 && channels != 3) fail(ErrorCode::InvalidArgument, "image must have 1 or 3 channels");
    if (pixels_.size() != static_cast<std::size_t>(width) * height * channels)
        fail(ErrorCode::InvalidArgument, "pixel buffer length does not match width*height*channels");
}

double RasterImage::luminance(int x, int y) const {
    const std::size_t i = index(x, y, 0);
    if (channels_ == 1) return pixels_[i];
    return 0.299 * pixels_[i] + 0.587 * pixels_[i + 1] + 0.114 * pixels_[i + 2];
}

BinaryImage::BinaryImage(int width, int height, bool fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "mask dimensions must be >= 1");
    mask_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryImage::count() const noexcept {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

void DetectionBox::validate() const {
    auto in01 = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (!in01(pc)) fail(ErrorCode::InvalidArgument, "detection confidence outside [0,1]");
    if (!in01(bx) || !in01(by)) fail(ErrorCode::InvalidArgument, "detection center outside [0,1]");
    if (!in01(bw) || !in01(bh) || bw <= 0.0 || bh <= 0.0)
        fail(ErrorCode::InvalidArgument, "detection size outside (0,1]");
    if (c1 < 0) fail(ErrorCode::InvalidArgument, "negative class index");
}

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

PixelBox yolo_to_pixel_box(const DetectionBox& box, int width, int height) {
    if (width < 1 || height < 1) fail(ErrorCode::InvalidArgument, "frame dimensions must be >= 1");
    PixelBox out{
        std::clamp(round_half_up((box.bx - box.bw / 2.0) * width), 0, width),
        std::clamp(round_half_up((box.by - box.bh / 2.0) * height), 0, height),
        std::clamp(round_half_up((box.bx + box.bw / 2.0) * width), 0, width),
        std::clamp(round_half_up((box.by + box.bh / 2.0) * height), 0, height),
    };
    if (!out.valid()) fail(ErrorCode::InvalidArgument, "box lies outside the frame");
    return out;
}

DetectionBox pixel_to_yolo_box(const PixelBox& box, int width, int height, double pc) {
    if (!box.within(width, height)) fail(ErrorCode::InvalidArgument, "box outside frame");
    DetectionBox out;
    out.pc = pc;
    out.bx = (box.x_min + box.x_max) / 2.0 / width;
    out.by = (box.y_min + box.y_max) / 2.0 / height;
    out.bw = static_cast<double>(box.width()) / width;
    out.bh = static_cast<double>(box.height()) / height;
    out.c1 = 0;
    return out;
}

RasterImage crop(const RasterImage& image, const PixelBox& box) {
    if (!box.within(image.width(), image.height())) fail(ErrorCode::InvalidArgument, "crop box outside frame");
    const int c = image.channels();
    RasterImage out(box.width(), box.height(), c);
    auto src = image.pixels();
    auto dst = out.pixels();
    const std::size_t row_len = static_cast<std::size_t>(box.width()) * c;
    for (int y = 0; y < box.height(); ++y) {
        const std::size_t s = (static_cast<std::size_t>(box.y_min + y) * image.width() + box.x_min) * c;
        std::copy_n(src.begin() + s, row_len, dst.begin() + y * row_len);
    }
    return out;
}

BinaryImage crop(const BinaryImage& mask, const PixelBox& box) {
    if (!box.within(mask.width(), mask.height())) fail(ErrorCode::InvalidArgument, "crop box outside frame");
    BinaryImage out(box.width(), box.height());
    for (int y = 0; y < box.height(); ++y)
        for (int x = 0; x < box.width(); ++x) out.set(x, y, mask.at(box.x_min + x, box.y_min + y));
    return out;
}

void Calibration::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(px_per_mm) || !ok(mm_per_mv) || !ok(mm_per_s))
        fail(ErrorCode::InvalidArgument, "calibration values must be positive and finite");
}

std::optional<int> lead_index(std::string_view name) {
    for (std::size_t i = 0; i < kLeadNames.size(); ++i)
        if (kLeadNames[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

void LeadSignal::validate() const {
    if (!lead_index(lead_name)) fail(ErrorCode::InvalidArgument, "unknown lead name '" + lead_name + "'");
    if (!(std::isfinite(sample_period) && sample_period > 0.0))
        fail(ErrorCode::InvalidArgument, "lead " + lead_name + ": sample period must be positive");
    if (samples.size() < 2) fail(ErrorCode::InvalidArgument, "lead " + lead_name + ": needs at least 2 samples");
    for (double v : samples)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "lead " + lead_name + ": non-finite sample");
}

bool EcgRecord::complete() const {
    if (leads.size() != kLeadNames.size()) return false;
    std::set<std::string> seen;
    for (const auto& l : leads) seen.insert(l.lead_name);
    return seen.size() == kLeadNames.size();
}

void EcgRecord::validate() const {
    calibration.validate();
    if (leads.size() > kLeadNames.size()) fail(ErrorCode::InvalidArgument, "record has more than 12 leads");
    std::set<std::string> seen;
    for (const auto& l : leads) {
        l.validate();
        if (!seen.insert(l.lead_name).second)
            fail(ErrorCode::InvalidArgument, "duplicate lead '" + l.lead_name + "'");
    }
}

const LeadSignal* EcgRecord::find(std::string_view lead) const {
    for (const auto& l : leads)
        if (l.lead_name == lead) return &l;
    return nullptr;
}

}  // namespace ecgdigi
