#include "ecgdigi/synthgen.hpp"

#include "ecgdigi/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace ecgdigi {

std::uint64_t Rng::next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    Rng r(base ^ (stream * 0xD1B54A32D192ED03ULL));
    r.next();
    return r.next();
}

// ---------------------------------------------------------------------------
// Waveforms
// ---------------------------------------------------------------------------

void WaveformParams::validate() const {
    if (!(heart_rate >= 20.0 && heart_rate <= 300.0))
        fail(ErrorCode::InvalidArgument, "heart rate must lie in [20, 300] beats/min");
    for (const auto& w : waves)
        if (!(w.width_s > 0.0) || !std::isfinite(w.amplitude_mv) || !std::isfinite(w.center_s))
            fail(ErrorCode::InvalidArgument, "wave widths must be positive and parameters finite");
    if (!(noise_mv >= 0.0)) fail(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
}

WaveformParams WaveformParams::normal_sinus(double heart_rate) {
    WaveformParams p;
    p.heart_rate = heart_rate;
    p.waves[kP] = {0.15, 0.100, 0.025};
    p.waves[kQ] = {-0.10, 0.200, 0.012};
    p.waves[kR] = {1.10, 0.240, 0.018};
    p.waves[kS] = {-0.25, 0.280, 0.016};
    p.waves[kT] = {0.30, 0.480, 0.045};
    return p;
}

LeadSignal generate_waveform(const WaveformParams& params, double duration, double sample_period,
                             const std::string& lead_name) {
    params.validate();
    if (!(duration > 0.0) || !(sample_period > 0.0))
        fail(ErrorCode::InvalidArgument, "duration and sample period must be positive");

    const auto n = static_cast<std::size_t>(std::floor(duration / sample_period + 1e-9)) + 1;
    const double rr = 60.0 / params.heart_rate;
    const int first_beat = static_cast<int>(std::floor(-params.onset_s / rr)) - 1;
    const int last_beat = static_cast<int>(std::ceil((duration - params.onset_s) / rr)) + 1;

    LeadSignal out;
    out.lead_name = lead_name;
    out.sample_period = sample_period;
    out.samples.assign(n, 0.0);
    Rng rng(params.rng_seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * sample_period;
        double v = 0.0;
        for (int k = first_beat; k <= last_beat; ++k) {
            const double beat = params.onset_s + k * rr;
            for (const auto& w : params.waves) {
                if (w.amplitude_mv == 0.0) continue;
                const double d = t - beat - w.center_s;
                v += w.amplitude_mv * std::exp(-d * d / (2.0 * w.width_s * w.width_s));
            }
        }
        if (params.noise_mv > 0.0) v += params.noise_mv * rng.normal();
        out.samples[i] = v;
    }
    return out;
}

WaveformParams lead_waveform(int lead, double heart_rate, double onset_s, std::uint64_t seed) {
    // P, Q, R, S, T multipliers of the lead-II template, kLeadNames order.
    static constexpr std::array<std::array<double, 5>, 12> kScale{{
        {0.8, 0.8, 0.70, 0.6, 0.8},      // I
        {1.0, 1.0, 1.00, 1.0, 1.0},      // II
        {0.5, 0.5, 0.45, 0.6, 0.4},      // III
        {-0.8, -0.5, -0.80, -0.5, -0.8}, // aVR
        {0.4, 0.6, 0.40, 0.5, 0.4},      // aVL
        {0.7, 0.7, 0.75, 0.8, 0.7},      // aVF
        {0.6, 0.0, 0.30, 3.2, -0.3},     // V1
        {0.6, 0.0, 0.60, 3.6, 1.2},      // V2
        {0.6, 0.3, 0.90, 2.4, 1.3},      // V3
        {0.6, 0.6, 1.30, 1.4, 1.2},      // V4
        {0.6, 0.8, 1.20, 0.8, 1.0},      // V5
        {0.6, 0.8, 1.00, 0.5, 0.8},      // V6
    }};
    if (lead < 0 || lead >= 12) fail(ErrorCode::InvalidArgument, "lead index out of range");
    WaveformParams p = WaveformParams::normal_sinus(heart_rate);
    p.onset_s = onset_s;
    Rng rng(seed);
    for (int w = 0; w < 5; ++w) p.waves[w].amplitude_mv *= kScale[lead][w] * rng.uniform(0.85, 1.15);
    p.rng_seed = rng.next();
    return p;
}

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

void PageLayout::validate() const {
    if (rows * cols != 12) fail(ErrorCode::InvalidArgument, "layout must hold exactly 12 panels");
    if (margin < 0 || col_gap < 0 || row_gap < 0 || trace_inset < 0)
        fail(ErrorCode::InvalidArgument, "layout margins and gaps must be >= 0");
    if (panel_width() < 2 * trace_inset + 8 || panel_height() < 16)
        fail(ErrorCode::InvalidArgument, "layout panels do not fit on the page");
    if (trace_thickness < 1) fail(ErrorCode::InvalidArgument, "trace thickness must be >= 1");
    if (minor_thickness < 0 || major_thickness < 0 || major_every < 1)
        fail(ErrorCode::InvalidArgument, "invalid grid line parameters");
    std::array<bool, 12> seen{};
    for (const auto& name : lead_order) {
        const auto idx = lead_index(name);
        if (!idx || seen[*idx]) fail(ErrorCode::InvalidArgument, "layout lead order must list each lead once");
        seen[*idx] = true;
    }
}

PixelBox PageLayout::panel(int index) const {
    const int r = index / cols;
    const int c = index % cols;
    const int x = margin + c * (panel_width() + col_gap);
    const int y = margin + r * (panel_height() + row_gap);
    return {x, y, x + panel_width(), y + panel_height()};
}

int PageLayout::slot_of(std::string_view lead) const {
    for (int i = 0; i < static_cast<int>(lead_order.size()); ++i)
        if (lead_order[i] == lead) return i;
    return -1;
}

PageLayout PageLayout::for_resolution(double px_per_mm) {
    auto mm = [px_per_mm](double v) { return static_cast<int>(std::lround(v * px_per_mm)); };
    PageLayout l;
    l.page_width = mm(288.0);
    l.page_height = mm(216.0);
    l.margin = mm(6.0);
    l.col_gap = mm(4.0);
    l.row_gap = mm(4.0);
    l.trace_inset = mm(2.0);
    return l;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

void paint(RasterImage& page, int x, int y, Rgb c) {
    if (page.channels() == 3) {
        page.at(x, y, 0) = c.r;
        page.at(x, y, 1) = c.g;
        page.at(x, y, 2) = c.b;
    } else {
        page.at(x, y, 0) = static_cast<std::uint8_t>(std::lround(0.299 * c.r + 0.587 * c.g + 0.114 * c.b));
    }
}

void draw_grid(RasterImage& page, const PageLayout& layout, double px_per_mm) {
    const int w = page.width(), h = page.height();
    auto draw_lines = [&](bool major) {
        const int thickness = major ? layout.major_thickness : layout.minor_thickness;
        const Rgb color = major ? layout.major_color : layout.minor_color;
        if (thickness == 0) return;
        const double step = major ? px_per_mm * layout.major_every : px_per_mm;
        for (int k = 0;; ++k) {
            const int pos = static_cast<int>(std::lround(k * step));
            if (pos >= std::max(w, h)) break;
            for (int d = 0; d < thickness; ++d) {
                const int p = pos + d;
                if (p < w)
                    for (int y = 0; y < h; ++y) paint(page, p, y, color);
                if (p < h)
                    for (int x = 0; x < w; ++x) paint(page, x, p, color);
            }
        }
    };
    draw_lines(false);
    draw_lines(true);
}

}  // namespace

RenderedRecord render_record(std::span<const LeadSignal> signals, const PageLayout& layout,
                             const Calibration& calibration) {
    layout.validate();
    calibration.validate();
    RenderedRecord out;
    out.page = RasterImage(layout.page_width, layout.page_height, 3, 255);
    for (int y = 0; y < out.page.height(); ++y)
        for (int x = 0; x < out.page.width(); ++x) paint(out.page, x, y, layout.paper);
    if (layout.draw_grid) draw_grid(out.page, layout, calibration.px_per_mm);

    const double half = layout.trace_thickness / 2.0;
    const double pxs = calibration.px_per_s();
    const double pxv = calibration.px_per_mv();

    for (const auto& sig : signals) {
        sig.validate();
        const int slot = layout.slot_of(sig.lead_name);
        if (slot < 0) fail(ErrorCode::InvalidArgument, "lead " + sig.lead_name + " is not in the layout");
        const PixelBox panel = layout.panel(slot);
        const int baseline = layout.baseline_row(slot);
        const double x_first = layout.trace_start_x(slot) + 0.5;
        const double dx = sig.sample_period * pxs;
        const std::size_t n = sig.samples.size();
        const double x_last = x_first + static_cast<double>(n - 1) * dx;

        auto vx = [&](std::size_t i) { return x_first + static_cast<double>(i) * dx; };
        auto vy = [&](std::size_t i) { return baseline + 0.5 - sig.samples[i] * pxv; };
        // End segments extend linearly to the outer column edges (square caps).
        auto y_at = [&](double x) {
            const double f = (x - x_first) / dx;
            const auto i = f <= 0.0 ? 0 : std::min(static_cast<std::size_t>(f), n - 2);
            const double u = f - static_cast<double>(i);
            return vy(i) * (1.0 - u) + vy(i + 1) * u;
        };

        if (x_last + kTruthBoxMargin >= panel.x_max)
            fail(ErrorCode::InvalidArgument, "lead " + sig.lead_name + " is longer than its panel");

        // Column spans of the polyline, thickened vertically.
        const int c_first = static_cast<int>(std::floor(x_first));
        const int c_last = static_cast<int>(std::floor(x_last));
        std::vector<std::pair<int, int>> spans;
        spans.reserve(c_last - c_first + 1);
        std::size_t v = 0;
        for (int c = c_first; c <= c_last; ++c) {
            const double lo = c;
            const double hi = c + 1;
            double y_min = std::min(y_at(lo), y_at(hi));
            double y_max = std::max(y_at(lo), y_at(hi));
            while (v < n && vx(v) < lo) ++v;
            for (std::size_t j = v; j < n && vx(j) <= hi; ++j) {
                y_min = std::min(y_min, vy(j));
                y_max = std::max(y_max, vy(j));
            }
            const int r0 = static_cast<int>(std::ceil(y_min - half - 0.5));
            const int r1 = static_cast<int>(std::floor(y_max + half - 0.5));
            if (r0 - kTruthBoxMargin < panel.y_min || r1 + kTruthBoxMargin >= panel.y_max)
                fail(ErrorCode::InvalidArgument, "lead " + sig.lead_name + " exceeds its panel height");
            spans.emplace_back(r0, r1);
        }

        int top = spans.front().first, bottom = spans.front().second;
        for (const auto& [r0, r1] : spans) {
            top = std::min(top, r0);
            bottom = std::max(bottom, r1);
        }
        const PixelBox box{c_first - kTruthBoxMargin, top - kTruthBoxMargin, c_last + 1 + kTruthBoxMargin,
                           bottom + 1 + kTruthBoxMargin};
        BinaryImage mask(box.width(), box.height());
        for (int c = c_first; c <= c_last; ++c) {
            const auto [r0, r1] = spans[c - c_first];
            for (int r = r0; r <= r1; ++r) {
                paint(out.page, c, r, layout.trace_color);
                mask.set(c - box.x_min, r - box.y_min, true);
            }
        }
        out.boxes.push_back(box);
        out.masks.push_back(std::move(mask));
        out.baseline_rows.push_back(baseline);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Degradation
// ---------------------------------------------------------------------------

void DegradationSpec::validate() const {
    if (!(gaussian_blur_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "blur sigma must be >= 0");
    if (!(contrast_scale > 0.0 && contrast_scale <= 1.0))
        fail(ErrorCode::InvalidArgument, "contrast scale must lie in (0, 1]");
    if (!(noise_sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
    if (!std::isfinite(brightness_shift)) fail(ErrorCode::InvalidArgument, "brightness shift must be finite");
}

RasterImage degrade(const RasterImage& image, const DegradationSpec& spec) {
    spec.validate();
    RasterImage out = spec.to_grayscale ? to_grayscale(image) : image;
    if (spec.gaussian_blur_sigma > 0.0)
        out = gaussian_blur(out, spec.gaussian_blur_sigma, gaussian_size_for(spec.gaussian_blur_sigma));
    const bool tone = spec.contrast_scale != 1.0 || spec.brightness_shift != 0.0;
    if (tone || spec.noise_sigma > 0.0) {
        Rng rng(spec.rng_seed);
        for (auto& p : out.pixels()) {
            double v = 127.5 + spec.contrast_scale * (p - 127.5) + spec.brightness_shift;
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
            p = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
        }
    }
    return out;
}

std::string emit_ground_truth(std::span<const PixelBox> boxes, int page_width, int page_height) {
    std::string out;
    char line[96];
    for (const auto& b : boxes) {
        const DetectionBox d = pixel_to_yolo_box(b, page_width, page_height);
        std::snprintf(line, sizeof line, "0 %.6f %.6f %.6f %.6f\n", d.bx, d.by, d.bw, d.bh);
        out += line;
    }
    return out;
}

SyntheticPage synthesize_page(std::uint64_t seed, const SynthOptions& options) {
    Rng rng(seed);
    const double heart_rate = rng.uniform(55.0, 95.0);
    const double onset = rng.uniform(-0.6, 0.0);
    const double window = options.lead_duration;

    SyntheticPage page;
    page.seed = seed;
    for (int slot = 0; slot < 12; ++slot) {
        const std::string& name = options.layout.lead_order[slot];
        const int lead = *lead_index(name);
        const int col = slot % options.layout.cols;
        // Columns show consecutive time windows of one continuous recording.
        auto params = lead_waveform(lead, heart_rate, onset - col * window, derive_seed(seed, lead + 1));
        page.signals.push_back(generate_waveform(params, window, options.sample_period, name));
    }
    page.rendered = render_record(page.signals, options.layout, options.calibration);
    return page;
}

}  // namespace ecgdigi
