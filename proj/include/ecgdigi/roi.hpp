#pragma once

#include "ecgdigi/binarize.hpp"
#include "ecgdigi/core.hpp"
#include "ecgdigi/metrics.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ecgdigi {

struct AnnotationEntry {
    int class_index = 0;
    double bx = 0.0, by = 0.0, bw = 0.0, bh = 0.0;
};

struct AnnotationFile {
    std::vector<AnnotationEntry> entries;
};

/// YOLO text: `class bx by bw bh` per line, blank lines skipped.
/// Errors carry the 1-based line number.
AnnotationFile parse_annotations(std::string_view text);
AnnotationFile read_annotations(const std::filesystem::path& path);

/// Detector protocol line format: `class pc bx by bw bh`. Five-field YOLO
/// lines are accepted too and read as pc = 1.
std::vector<DetectionBox> parse_detections(std::string_view text);
std::string format_detections(std::span<const DetectionBox> boxes);
std::string detections_to_json(std::span<const DetectionBox> boxes, int page_width, int page_height);

struct DetectorOptions {
    int expected_count = 12;
    int red_tolerance = 20;
    int box_margin = 3;
    double min_gap_fraction = 0.005;  // of page width, separating leads within a row
    double min_area_fraction = 1e-4;  // of page area, below which regions are noise
};

struct DetectionResult {
    std::vector<DetectionBox> boxes;
    std::vector<int> row_band;  // row band of each box, top to bottom
    int warnings = 0;           // expected_count - found, when positive
};

/// Ink-profile lead detector. Boxes are ordered by row band, then bx.
DetectionResult detect_leads(const RasterImage& page, const DetectorOptions& options = {});

/// Runs `command` (must contain {input}) on the page file and parses its
/// standard output with parse_detections.
std::vector<DetectionBox> run_external_detector(const std::filesystem::path& page_path,
                                                const ExternalCommand& command);

struct MatchPair {
    int detection = 0;
    int truth = 0;
    double iou = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<int> unmatched_detections;
    std::vector<int> unmatched_truths;
};

/// Greedy matching in descending pc order (ties by index); each detection takes
/// the highest-IOU free truth with iou >= threshold, ties to the lower index.
MatchResult match_detections(std::span<const ScoredBox> detections, std::span<const PixelBox> truths,
                             double iou_threshold = 0.5);

}  // namespace ecgdigi
