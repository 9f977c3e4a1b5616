#pragma once

#include "ecgdigi/binarize.hpp"
#include "ecgdigi/core.hpp"
#include "ecgdigi/roi.hpp"
#include "ecgdigi/scan.hpp"
#include "ecgdigi/synthgen.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ecgdigi {

struct DetectorChoice {
    enum class Kind { Builtin, External, Annotations };
    Kind kind = Kind::Builtin;
    std::string command;                 // External
    std::filesystem::path annotations;   // Annotations
};

struct BinarizerChoice {
    enum class Kind { Builtin, External };
    Kind kind = Kind::Builtin;
    std::string command;  // External; {input} {output}, optional {lead}
};

struct PipelineConfig {
    Calibration calibration;
    PreprocessSpec preprocess;
    ThresholdSpec threshold;
    DetectorChoice detector;
    DetectorOptions detector_options;
    BinarizerChoice binarizer;
    ScanOptions scan;
    PageLayout layout = PageLayout::for_resolution(10.0);

    // Synthesis
    double sample_period = 0.002;
    double lead_duration = 2.5;
    std::optional<DegradationSpec> degradation;

    std::filesystem::path output_dir = ".";
    std::uint64_t seed = 0;
    bool reproducible = false;
    bool save_intermediates = false;
    int timeout_ms = 60000;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

/// Overlays the fields present in `patch` onto `config`. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
void apply_config_json(PipelineConfig& config, const nlohmann::json& patch);
nlohmann::json config_to_json(const PipelineConfig& config);

/// Lead slot for a normalized box center on a rows x cols page.
int lead_slot(const DetectionBox& box, const PageLayout& layout);

struct LeadOutcome {
    std::string lead;
    PixelBox box;
    ScanReport scan;
};

struct DigitizeResult {
    EcgRecord record;
    std::vector<DetectionBox> detections;
    std::vector<LeadOutcome> leads;
    std::vector<std::string> missing_leads;
    int detector_warnings = 0;

    /// 0 on a complete record, otherwise NoLeads or PartialLeads.
    int status() const;
    std::string diagnostics_json() const;
};

/// Intermediate products of one lead, for stage replay.
struct LeadArtifacts {
    std::string lead;
    PixelBox box;
    RasterImage crop;
    BinaryImage mask;
};

/// Detection stage only.
std::vector<DetectionBox> run_detection(const std::filesystem::path& page_path, const RasterImage& page,
                                        const PipelineConfig& config, int* warnings = nullptr);

/// Crop, preprocess and binarize one lead region.
LeadArtifacts binarize_lead(const RasterImage& page, const PixelBox& box, const std::string& lead,
                            const PipelineConfig& config);

/// Runs every stage in memory. `artifacts`, when given, receives the per-lead
/// intermediates in standard lead order.
DigitizeResult digitize_page(const std::filesystem::path& page_path, const PipelineConfig& config,
                             std::vector<LeadArtifacts>* artifacts = nullptr);

/// Scan stage over masks, assembling a record exactly as digitize_page does.
EcgRecord record_from_masks(std::span<const LeadArtifacts> leads, const PipelineConfig& config,
                            const std::string& source_image_id);

/// digitize_page plus persistence: <stem>.json, <stem>_<lead>.csv, <stem>.svg,
/// and with save_intermediates crops/ masks/ and <stem>_detections.json.
DigitizeResult digitize_to_disk(const std::filesystem::path& page_path, const PipelineConfig& config);

/// Writes `count` synthetic pages with ground truth plus manifest.json.
void synthesize_dataset(const PipelineConfig& config, int count);

struct FrameSize {
    int width = 2880;
    int height = 2160;
};

struct EvalReport {
    std::string json;
    std::string table;
};

/// Detection files (`<stem>.txt`, 6 or 5 fields) against YOLO truths.
/// `pages_dir`, when set, supplies each stem's frame size from its PNG.
EvalReport evaluate_detection_dirs(const std::filesystem::path& detections_dir,
                                   const std::filesystem::path& truths_dir, FrameSize frame = {},
                                   const std::optional<std::filesystem::path>& pages_dir = std::nullopt);

/// Predicted against truth masks (`<stem>.png`).
EvalReport evaluate_mask_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& truth_dir);

/// 12-panel SVG of a record.
std::string render_svg(const EcgRecord& record);

std::string pipeline_version();

}  // namespace ecgdigi
