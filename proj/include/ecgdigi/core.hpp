#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecgdigi {

// Error categories. The numeric values double as the C API status codes and
// as the CLI exit-code taxonomy, so do not renumber.
enum class ErrorCode : int {
    InvalidArgument = 1,
    NoLeads = 2,
    PartialLeads = 3,
    StageFailure = 4,
    Io = 5,
    Format = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, std::uint8_t fill = 255);
    RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::uint8_t at(int x, int y, int c = 0) const { return pixels_[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) { return pixels_[index(x, y, c)]; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    /// Rec.601 luma of pixel (x, y) in [0, 255].
    double luminance(int x, int y) const;

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> pixels_;
};

/// Foreground (ink) = true.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool at(int x, int y) const { return mask_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) { mask_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

    std::size_t size() const noexcept { return mask_.size(); }
    std::size_t count() const noexcept;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> mask_;
};

// ---------------------------------------------------------------------------
// Boxes
// ---------------------------------------------------------------------------

/// Detector output for one lead: confidence plus normalized center/size.
struct DetectionBox {
    double pc = 1.0;
    double bx = 0.5;
    double by = 0.5;
    double bw = 1.0;
    double bh = 1.0;
    int c1 = 0;

    void validate() const;
};

/// Pixel box, inclusive-exclusive: [x_min, x_max) x [y_min, y_max).
struct PixelBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const noexcept { return x_max - x_min; }
    int height() const noexcept { return y_max - y_min; }
    long long area() const noexcept { return static_cast<long long>(width()) * height(); }
    bool valid() const noexcept { return x_min < x_max && y_min < y_max; }
    bool within(int w, int h) const noexcept {
        return valid() && x_min >= 0 && y_min >= 0 && x_max <= w && y_max <= h;
    }

    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Normalized YOLO box to pixels, round-half-up, clamped to the frame.
/// Throws ErrorCode::InvalidArgument when nothing of the box remains in frame.
PixelBox yolo_to_pixel_box(const DetectionBox& box, int width, int height);

DetectionBox pixel_to_yolo_box(const PixelBox& box, int width, int height, double pc = 1.0);

/// Exact sub-image copy, no resampling.
RasterImage crop(const RasterImage& image, const PixelBox& box);
BinaryImage crop(const BinaryImage& mask, const PixelBox& box);

// ---------------------------------------------------------------------------
// Calibration and signals
// ---------------------------------------------------------------------------

struct Calibration {
    double px_per_mm = 10.0;
    double mm_per_mv = 10.0;
    double mm_per_s = 25.0;

    void validate() const;

    double px_per_mv() const noexcept { return px_per_mm * mm_per_mv; }
    double px_per_s() const noexcept { return px_per_mm * mm_per_s; }
    /// Voltage for a trace row relative to the baseline row (rows grow downwards).
    double row_to_mv(double baseline_row, double row) const noexcept {
        return (baseline_row - row) / px_per_mv();
    }
};

inline constexpr std::array<std::string_view, 12> kLeadNames = {
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6"};

/// Index into kLeadNames, or nullopt for an unknown name.
std::optional<int> lead_index(std::string_view name);

struct LeadSignal {
    std::string lead_name;
    double sample_period = 0.002;
    std::vector<double> samples;

    double duration() const noexcept {
        return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) * sample_period;
    }
    void validate() const;
};

struct EcgRecord {
    std::vector<LeadSignal> leads;
    Calibration calibration;
    std::string source_image_id;
    std::string created_at;
    std::string pipeline_version;

    /// All 12 standard leads, each once.
    bool complete() const;
    /// Checks every lead and name uniqueness; partial records pass.
    void validate() const;
    const LeadSignal* find(std::string_view lead) const;
};

std::string_view library_version() noexcept;

}  // namespace ecgdigi
