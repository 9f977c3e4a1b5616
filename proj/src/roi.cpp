#include "ecgdigi/roi.hpp"

#include "ecgdigi/imgproc.hpp"
#include "ecgdigi/subprocess.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ecgdigi {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

[[noreturn]] void line_error(int line, const std::string& what) {
    fail(ErrorCode::Format, "line " + std::to_string(line) + ": " + what);
}

// Calls fn(line_number, fields) for every non-blank line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        ++line_no;
        const auto fields = split_fields(line);
        if (!fields.empty()) fn(line_no, fields);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

double parse_coordinate(int line, std::string_view field) {
    double v = 0.0;
    if (!parse_number(field, v)) line_error(line, "non-numeric field '" + std::string(field) + "'");
    if (!(v >= 0.0 && v <= 1.0)) line_error(line, "coordinate " + std::string(field) + " outside [0,1]");
    return v;
}

int parse_class(int line, std::string_view field) {
    int c = 0;
    if (!parse_number(field, c)) line_error(line, "non-numeric class '" + std::string(field) + "'");
    if (c < 0) line_error(line, "negative class index");
    return c;
}

}  // namespace

AnnotationFile parse_annotations(std::string_view text) {
    AnnotationFile out;
    for_each_line(text, [&](int line, const std::vector<std::string_view>& f) {
        if (f.size() != 5)
            line_error(line, "expected 5 fields, found " + std::to_string(f.size()));
        AnnotationEntry e;
        e.class_index = parse_class(line, f[0]);
        e.bx = parse_coordinate(line, f[1]);
        e.by = parse_coordinate(line, f[2]);
        e.bw = parse_coordinate(line, f[3]);
        e.bh = parse_coordinate(line, f[4]);
        if (e.bw == 0.0 || e.bh == 0.0) line_error(line, "box has zero size");
        out.entries.push_back(e);
    });
    return out;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

AnnotationFile read_annotations(const std::filesystem::path& path) {
    const std::string text = slurp(path);
    try {
        return parse_annotations(text);
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

std::vector<DetectionBox> parse_detections(std::string_view text) {
    std::vector<DetectionBox> out;
    for_each_line(text, [&](int line, const std::vector<std::string_view>& f) {
        if (f.size() != 6 && f.size() != 5)
            line_error(line, "expected 6 fields, found " + std::to_string(f.size()));
        const std::size_t off = f.size() == 6 ? 2 : 1;
        DetectionBox d;
        d.c1 = parse_class(line, f[0]);
        d.pc = f.size() == 6 ? parse_coordinate(line, f[1]) : 1.0;
        d.bx = parse_coordinate(line, f[off]);
        d.by = parse_coordinate(line, f[off + 1]);
        d.bw = parse_coordinate(line, f[off + 2]);
        d.bh = parse_coordinate(line, f[off + 3]);
        try {
            d.validate();
        } catch (const Error& e) {
            line_error(line, e.what());
        }
        out.push_back(d);
    });
    return out;
}

std::string format_detections(std::span<const DetectionBox> boxes) {
    std::string out;
    char line[128];
    for (const auto& d : boxes) {
        std::snprintf(line, sizeof line, "%d %.6f %.6f %.6f %.6f %.6f\n", d.c1, d.pc, d.bx, d.by, d.bw, d.bh);
        out += line;
    }
    return out;
}

std::string detections_to_json(std::span<const DetectionBox> boxes, int page_width, int page_height) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& d : boxes) {
        const PixelBox p = yolo_to_pixel_box(d, page_width, page_height);
        arr.push_back({{"class", d.c1},
                       {"pc", d.pc},
                       {"bx", d.bx},
                       {"by", d.by},
                       {"bw", d.bw},
                       {"bh", d.bh},
                       {"pixel_box", {p.x_min, p.y_min, p.x_max, p.y_max}}});
    }
    nlohmann::ordered_json doc{{"page_width", page_width}, {"page_height", page_height}, {"detections", arr}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Built-in detector
// ---------------------------------------------------------------------------

namespace {

struct Interval {
    int begin;
    int end;  // exclusive
};

// Runs of indices with profile > 0, merging runs separated by fewer than min_gap empties.
std::vector<Interval> runs(const std::vector<int>& profile, int min_gap) {
    std::vector<Interval> out;
    const int n = static_cast<int>(profile.size());
    for (int i = 0; i < n;) {
        if (profile[i] == 0) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && profile[j] > 0) ++j;
        if (!out.empty() && i - out.back().end < min_gap) out.back().end = j;
        else out.push_back({i, j});
        i = j;
    }
    return out;
}

}  // namespace

DetectionResult detect_leads(const RasterImage& page, const DetectorOptions& options) {
    if (page.channels() != 1 && page.channels() != 3)
        fail(ErrorCode::InvalidArgument, "page must be gray or RGB");
    const int w = page.width(), h = page.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;

    const auto grid = red_dominance(page, options.red_tolerance);
    std::vector<std::uint8_t> lum(n);
    std::array<std::uint64_t, 256> hist{};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            lum[i] = static_cast<std::uint8_t>(std::lround(page.luminance(x, y)));
            if (!grid[i]) ++hist[lum[i]];
        }

    // Otsu; when the dark class is large it is mostly gray grid, so split it again.
    auto class_means = [](const std::array<std::uint64_t, 256>& hh, int t, double& m0, double& m1, double& w0) {
        double c0 = 0, s0 = 0, c1 = 0, s1 = 0;
        for (int i = 0; i < 256; ++i) {
            if (i <= t) c0 += hh[i], s0 += static_cast<double>(i) * hh[i];
            else c1 += hh[i], s1 += static_cast<double>(i) * hh[i];
        }
        m0 = c0 > 0 ? s0 / c0 : 0;
        m1 = c1 > 0 ? s1 / c1 : 255;
        w0 = (c0 + c1) > 0 ? c0 / (c0 + c1) : 0;
    };
    int threshold = otsu_threshold(hist);
    double m0 = 0, m1 = 0, w0 = 0;
    class_means(hist, threshold, m0, m1, w0);
    if (w0 > 0.15) {
        std::array<std::uint64_t, 256> dark{};
        std::copy_n(hist.begin(), threshold + 1, dark.begin());
        threshold = otsu_threshold(dark);
        class_means(hist, threshold, m0, m1, w0);
    }
    const bool has_ink = w0 > 0.0 && m1 - m0 >= 40.0;

    std::vector<std::uint8_t> ink(n, 0);
    std::vector<int> row_profile(h, 0);
    if (has_ink)
        for (std::size_t i = 0; i < n; ++i)
            if (!grid[i] && lum[i] <= threshold) {
                ink[i] = 1;
                ++row_profile[i / w];
            }

    const int min_gap = std::max(2, static_cast<int>(std::lround(options.min_gap_fraction * w)));
    const double min_area = options.min_area_fraction * static_cast<double>(n);

    struct Candidate {
        PixelBox box;
        long long ink;
        int band;
    };
    std::vector<Candidate> found;
    int band_index = 0;
    for (const Interval& band : runs(row_profile, 3)) {
        std::vector<int> col_profile(w, 0);
        for (int y = band.begin; y < band.end; ++y)
            for (int x = 0; x < w; ++x) col_profile[x] += ink[static_cast<std::size_t>(y) * w + x];
        bool any = false;
        for (const Interval& cols : runs(col_profile, min_gap)) {
            PixelBox tight{cols.end, band.end, cols.begin, band.begin};
            long long count = 0;
            for (int y = band.begin; y < band.end; ++y)
                for (int x = cols.begin; x < cols.end; ++x)
                    if (ink[static_cast<std::size_t>(y) * w + x]) {
                        ++count;
                        tight.x_min = std::min(tight.x_min, x);
                        tight.x_max = std::max(tight.x_max, x + 1);
                        tight.y_min = std::min(tight.y_min, y);
                        tight.y_max = std::max(tight.y_max, y + 1);
                    }
            if (static_cast<double>(count) < min_area) continue;
            const int m = options.box_margin;
            found.push_back({{std::max(0, tight.x_min - m), std::max(0, tight.y_min - m), std::min(w, tight.x_max + m),
                              std::min(h, tight.y_max + m)},
                             count, band_index});
            any = true;
        }
        if (any) ++band_index;
    }

    DetectionResult out;
    long long densest = 0;
    for (const auto& c : found) densest = std::max(densest, c.ink);
    for (const auto& c : found) {
        out.boxes.push_back(pixel_to_yolo_box(c.box, w, h, static_cast<double>(c.ink) / static_cast<double>(densest)));
        out.row_band.push_back(c.band);
    }
    out.warnings = std::max(0, options.expected_count - static_cast<int>(out.boxes.size()));
    return out;
}

std::vector<DetectionBox> run_external_detector(const std::filesystem::path& page_path,
                                                const ExternalCommand& command) {
    if (command.command_template.find("{input}") == std::string::npos)
        fail(ErrorCode::InvalidArgument, "detector command must contain {input}");
    const std::string cmd = expand_template(command.command_template, {{"input", page_path.string()}});
    const CommandResult res = run_command(cmd, command.timeout);
    if (res.timed_out) fail(ErrorCode::StageFailure, "external detector timed out: " + res.err);
    if (res.exit_status != 0)
        fail(ErrorCode::StageFailure,
             "external detector exited with status " + std::to_string(res.exit_status) + ": " + res.err);
    try {
        return parse_detections(res.out);
    } catch (const Error& e) {
        fail(ErrorCode::StageFailure, std::string("external detector output: ") + e.what() + "; stderr: " + res.err);
    }
}

MatchResult match_detections(std::span<const ScoredBox> detections, std::span<const PixelBox> truths,
                             double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        fail(ErrorCode::InvalidArgument, "IOU threshold must lie in (0, 1]");
    std::vector<int> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return detections[a].pc > detections[b].pc; });

    MatchResult out;
    std::vector<bool> taken(truths.size(), false);
    for (int d : order) {
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t t = 0; t < truths.size(); ++t) {
            if (taken[t]) continue;
            const double v = iou(detections[d].box, truths[t]);
            if (v >= iou_threshold && v > best_iou) {
                best = static_cast<int>(t);
                best_iou = v;
            }
        }
        if (best >= 0) {
            taken[best] = true;
            out.pairs.push_back({d, best, best_iou});
        } else {
            out.unmatched_detections.push_back(d);
        }
    }
    std::sort(out.unmatched_detections.begin(), out.unmatched_detections.end());
    for (std::size_t t = 0; t < truths.size(); ++t)
        if (!taken[t]) out.unmatched_truths.push_back(static_cast<int>(t));
    return out;
}

}  // namespace ecgdigi
