#pragma once

#include "ecgdigi/core.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ecgdigi {

/// SplitMix64. Used instead of <random> distributions, whose output is
/// implementation-defined, so generated data is identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept;
    /// Uniform in [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller).
    double normal() noexcept;

private:
    std::uint64_t state_;
};

/// Mixes a base seed with a stream index into an independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// One Gaussian bump of a heartbeat.
struct Wave {
    double amplitude_mv = 0.0;
    double center_s = 0.0;  // offset from beat onset
    double width_s = 0.01;  // standard deviation
};

enum WaveIndex : int { kP = 0, kQ, kR, kS, kT };

struct WaveformParams {
    double heart_rate = 72.0;  // beats/min
    std::array<Wave, 5> waves{};
    double onset_s = 0.0;   // time of the first beat onset
    double noise_mv = 0.0;  // white-noise sigma
    std::uint64_t rng_seed = 0;

    void validate() const;

    /// Lead-II-like normal sinus beat.
    static WaveformParams normal_sinus(double heart_rate = 72.0);
};

/// Per-beat sum of Gaussian bumps sampled at t = k * sample_period,
/// k = 0..floor(duration/sample_period).
LeadSignal generate_waveform(const WaveformParams& params, double duration, double sample_period,
                             const std::string& lead_name = "II");

/// Lead-specific morphology around a common rhythm, jittered by `seed`.
WaveformParams lead_waveform(int lead, double heart_rate, double onset_s, std::uint64_t seed);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

struct PageLayout {
    int rows = 3;
    int cols = 4;
    int page_width = 2880;
    int page_height = 2160;
    int margin = 60;
    int col_gap = 40;
    int row_gap = 40;
    int trace_inset = 20;  // horizontal gap between panel edge and trace start

    bool draw_grid = true;
    int minor_thickness = 1;
    int major_thickness = 2;
    int major_every = 5;  // minor cells per major cell
    Rgb paper{255, 255, 255};
    Rgb minor_color{250, 205, 205};
    Rgb major_color{240, 160, 160};

    Rgb trace_color{20, 20, 30};
    int trace_thickness = 5;

    std::array<std::string, 12> lead_order{"I", "aVR", "V1", "V4", "II", "aVL",
                                           "V2", "V5", "III", "aVF", "V3", "V6"};

    void validate() const;
    int panel_width() const noexcept { return (page_width - 2 * margin - (cols - 1) * col_gap) / cols; }
    int panel_height() const noexcept { return (page_height - 2 * margin - (rows - 1) * row_gap) / rows; }
    /// Panel rectangle for slot `index` (row-major).
    PixelBox panel(int index) const;
    int baseline_row(int index) const { return panel(index).y_min + panel_height() / 2; }
    int trace_start_x(int index) const { return panel(index).x_min + trace_inset; }
    /// Slot of a lead name in lead_order, or -1.
    int slot_of(std::string_view lead) const;

    /// Default 288 x 216 mm page at the given resolution.
    static PageLayout for_resolution(double px_per_mm);
};

/// Margin added around the trace extent for ground-truth boxes.
inline constexpr int kTruthBoxMargin = 3;

struct RenderedRecord {
    RasterImage page;
    // Indexed like the input signals.
    std::vector<PixelBox> boxes;
    std::vector<BinaryImage> masks;  // box-sized, aligned with `boxes`
    std::vector<int> baseline_rows;  // page coordinates
};

/// Draws every signal into the panel given by its lead name. The time axis
/// puts t = 0 at the center of the first trace column.
RenderedRecord render_record(std::span<const LeadSignal> signals, const PageLayout& layout,
                             const Calibration& calibration);

struct DegradationSpec {
    double gaussian_blur_sigma = 0.0;
    double contrast_scale = 1.0;
    double brightness_shift = 0.0;
    bool to_grayscale = false;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Applied in order: grayscale, blur, contrast/brightness about 127.5, noise.
RasterImage degrade(const RasterImage& image, const DegradationSpec& spec);

/// YOLO lines `0 bx by bw bh`, six decimals.
std::string emit_ground_truth(std::span<const PixelBox> boxes, int page_width, int page_height);

/// Full 12-lead synthetic record: signals in layout order plus rendering.
struct SyntheticPage {
    std::vector<LeadSignal> signals;  // layout order
    RenderedRecord rendered;
    std::uint64_t seed = 0;
};

struct SynthOptions {
    Calibration calibration;
    PageLayout layout = PageLayout::for_resolution(10.0);
    double sample_period = 0.002;
    double lead_duration = 2.5;
};

SyntheticPage synthesize_page(std::uint64_t seed, const SynthOptions& options);

}  // namespace ecgdigi
