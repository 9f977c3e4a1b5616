#include "ecgdigi/pipeline.hpp"

#include "ecgdigi/image_io.hpp"
#include "ecgdigi/metrics.hpp"
#include "ecgdigi/record.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <set>
#include <thread>

namespace ecgdigi {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string pipeline_version() { return "ecgdigi-" + std::string(library_version()); }

int lead_slot(const DetectionBox& box, const PageLayout& layout) {
    const int row = std::clamp(static_cast<int>(std::floor(box.by * layout.rows)), 0, layout.rows - 1);
    const int col = std::clamp(static_cast<int>(std::floor(box.bx * layout.cols)), 0, layout.cols - 1);
    return row * layout.cols + col;
}

int DigitizeResult::status() const {
    if (record.leads.empty()) return static_cast<int>(ErrorCode::NoLeads);
    if (!record.complete()) return static_cast<int>(ErrorCode::PartialLeads);
    return 0;
}

std::string DigitizeResult::diagnostics_json() const {
    ordered_json leads_j = ordered_json::array();
    for (const auto& l : leads)
        leads_j.push_back({{"name", l.lead},
                           {"box", {l.box.x_min, l.box.y_min, l.box.x_max, l.box.y_max}},
                           {"baseline_row", l.scan.baseline_row},
                           {"first_column", l.scan.first_column},
                           {"filled_columns", l.scan.filled_columns},
                           {"long_gap_columns", l.scan.long_gap_columns},
                           {"multi_run_columns", l.scan.multi_run_columns}});
    ordered_json doc{{"status", status()},
                     {"detections", detections.size()},
                     {"detector_warnings", detector_warnings},
                     {"missing_leads", missing_leads},
                     {"leads", leads_j}};
    return doc.dump(2) + "\n";
}

namespace {

std::chrono::milliseconds timeout_of(const PipelineConfig& c) { return std::chrono::milliseconds(c.timeout_ms); }

std::string stem_lead_name(const std::string& stem, const std::string& lead) { return stem + "_" + lead; }

// Runs job(i) for i in [0, n) on up to `threads` workers. Results must go to
// distinct slots; the first failure in index order is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        job(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// nullopt when the mask holds no trace at all.
std::optional<LeadSignal> scan_one(const LeadArtifacts& a, const PipelineConfig& config, ScanReport& report) {
    if (a.mask.count() == 0) return std::nullopt;
    return scan_lead(a.mask, config.calibration, a.lead, config.scan, &report);
}

EcgRecord empty_record(const PipelineConfig& config, const std::string& source_id) {
    EcgRecord rec;
    rec.calibration = config.calibration;
    rec.source_image_id = source_id;
    rec.created_at = config.reproducible ? kReproducibleTimestamp : utc_timestamp();
    rec.pipeline_version = pipeline_version();
    return rec;
}

}  // namespace

std::vector<DetectionBox> run_detection(const fs::path& page_path, const RasterImage& page,
                                        const PipelineConfig& config, int* warnings) {
    if (warnings) *warnings = 0;
    switch (config.detector.kind) {
    case DetectorChoice::Kind::Builtin: {
        auto result = detect_leads(page, config.detector_options);
        if (warnings) *warnings = result.warnings;
        return std::move(result.boxes);
    }
    case DetectorChoice::Kind::External:
        return run_external_detector(page_path, {config.detector.command, timeout_of(config)});
    case DetectorChoice::Kind::Annotations: {
        std::vector<DetectionBox> boxes;
        for (const auto& e : read_annotations(config.detector.annotations).entries)
            boxes.push_back({1.0, e.bx, e.by, e.bw, e.bh, e.class_index});
        return boxes;
    }
    }
    return {};
}

LeadArtifacts binarize_lead(const RasterImage& page, const PixelBox& box, const std::string& lead,
                            const PipelineConfig& config) {
    LeadArtifacts a{lead, box, crop(page, box), {}};
    if (config.binarizer.kind == BinarizerChoice::Kind::External) {
        a.mask = binarize_external(a.crop, {config.binarizer.command, timeout_of(config)}, {{"lead", lead}});
    } else {
        a.mask = binarize_builtin(preprocess(a.crop, config.preprocess), config.threshold);
    }
    return a;
}

EcgRecord record_from_masks(std::span<const LeadArtifacts> leads, const PipelineConfig& config,
                            const std::string& source_image_id) {
    EcgRecord rec = empty_record(config, source_image_id);
    for (const auto& a : leads) {
        ScanReport report;
        if (auto sig = scan_one(a, config, report)) rec.leads.push_back(std::move(*sig));
    }
    return rec;
}

DigitizeResult digitize_page(const fs::path& page_path, const PipelineConfig& config,
                             std::vector<LeadArtifacts>* artifacts) {
    config.validate();
    const RasterImage page = read_png(page_path);

    DigitizeResult result;
    result.detections = run_detection(page_path, page, config, &result.detector_warnings);

    // One box per lead; a duplicate slot keeps the more confident box.
    std::array<std::optional<DetectionBox>, 12> by_lead;
    for (const auto& d : result.detections) {
        const int slot = lead_slot(d, config.layout);
        const auto idx = lead_index(config.layout.lead_order[static_cast<std::size_t>(slot)]);
        if (!idx) continue;
        auto& cur = by_lead[static_cast<std::size_t>(*idx)];
        if (!cur || d.pc > cur->pc) cur = d;
    }

    struct Job {
        std::string lead;
        PixelBox box;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < kLeadNames.size(); ++i) {
        const std::string name(kLeadNames[i]);
        if (!by_lead[i]) {
            result.missing_leads.push_back(name);
            continue;
        }
        try {
            jobs.push_back({name, yolo_to_pixel_box(*by_lead[i], page.width(), page.height())});
        } catch (const Error&) {
            result.missing_leads.push_back(name);
        }
    }

    std::vector<LeadArtifacts> stage(jobs.size());
    std::vector<std::optional<LeadSignal>> signals(jobs.size());
    std::vector<ScanReport> reports(jobs.size());
    parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
        try {
            stage[i] = binarize_lead(page, jobs[i].box, jobs[i].lead, config);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Io) throw;
            fail(ErrorCode::StageFailure, "lead " + jobs[i].lead + ": " + e.what());
        }
        signals[i] = scan_one(stage[i], config, reports[i]);
    });

    result.record = empty_record(config, page_path.filename().string());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!signals[i]) {
            result.missing_leads.push_back(jobs[i].lead);
            continue;
        }
        result.record.leads.push_back(std::move(*signals[i]));
        result.leads.push_back({jobs[i].lead, jobs[i].box, reports[i]});
    }
    std::sort(result.missing_leads.begin(), result.missing_leads.end(),
              [](const std::string& a, const std::string& b) { return *lead_index(a) < *lead_index(b); });
    if (artifacts) *artifacts = std::move(stage);
    return result;
}

DigitizeResult digitize_to_disk(const fs::path& page_path, const PipelineConfig& config) {
    std::vector<LeadArtifacts> artifacts;
    DigitizeResult result = digitize_page(page_path, config, config.save_intermediates ? &artifacts : nullptr);
    const fs::path out = config.output_dir;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(ErrorCode::Io, "cannot create '" + out.string() + "': " + ec.message());
    const std::string stem = page_path.stem().string();

    if (config.save_intermediates) {
        fs::create_directories(out / "crops", ec);
        fs::create_directories(out / "masks", ec);
        if (ec) fail(ErrorCode::Io, "cannot create intermediate directories under '" + out.string() + "'");
        for (const auto& a : artifacts) {
            write_png(out / "crops" / (stem_lead_name(stem, a.lead) + ".png"), a.crop);
            write_mask_png(out / "masks" / (stem_lead_name(stem, a.lead) + ".png"), a.mask);
        }
        const RasterImage page = read_png(page_path);
        write_text(out / (stem + "_detections.json"),
                   detections_to_json(result.detections, page.width(), page.height()));
    }
    if (result.record.leads.empty()) return result;
    write_record(out / (stem + ".json"), result.record);
    for (const auto& l : result.record.leads)
        write_text(out / (stem_lead_name(stem, l.lead_name) + ".csv"), signal_to_csv(l));
    write_text(out / (stem + ".svg"), render_svg(result.record));
    return result;
}

void synthesize_dataset(const PipelineConfig& config, int count) {
    config.validate();
    if (count < 0) fail(ErrorCode::InvalidArgument, "count must be >= 0");
    const fs::path out = config.output_dir;
    std::error_code ec;
    for (const char* sub : {"pages", "labels", "masks", "signals"}) {
        fs::create_directories(out / sub, ec);
        if (ec) fail(ErrorCode::Io, "cannot create '" + (out / sub).string() + "': " + ec.message());
    }
    const SynthOptions opts{config.calibration, config.layout, config.sample_period, config.lead_duration};

    std::vector<ordered_json> entries(static_cast<std::size_t>(count));
    parallel_for(entries.size(), config.threads, [&](std::size_t i) {
        char stem_buf[32];
        std::snprintf(stem_buf, sizeof stem_buf, "page_%04zu", i);
        const std::string stem = stem_buf;
        const std::uint64_t seed = derive_seed(config.seed, i);
        SyntheticPage page = synthesize_page(seed, opts);
        RasterImage image = std::move(page.rendered.page);
        if (config.degradation) {
            DegradationSpec d = *config.degradation;
            d.rng_seed = derive_seed(seed, d.rng_seed);
            image = degrade(image, d);
        }
        auto& files = entries[i];
        files = ordered_json::array();
        auto add = [&](const std::string& rel, const char* kind, const std::string& lead) {
            ordered_json f{{"path", rel}, {"kind", kind}, {"page", stem}, {"seed", seed}};
            if (!lead.empty()) f["lead"] = lead;
            files.push_back(std::move(f));
        };
        write_png(out / "pages" / (stem + ".png"), image);
        add("pages/" + stem + ".png", "page", "");
        write_text(out / "labels" / (stem + ".txt"),
                   emit_ground_truth(page.rendered.boxes, image.width(), image.height()));
        add("labels/" + stem + ".txt", "labels", "");
        for (std::size_t k = 0; k < page.signals.size(); ++k) {
            const std::string name = stem_lead_name(stem, page.signals[k].lead_name);
            write_mask_png(out / "masks" / (name + ".png"), page.rendered.masks[k]);
            add("masks/" + name + ".png", "mask", page.signals[k].lead_name);
        }
        for (std::size_t k = 0; k < page.signals.size(); ++k) {
            const std::string name = stem_lead_name(stem, page.signals[k].lead_name);
            write_text(out / "signals" / (name + ".csv"), signal_to_csv(page.signals[k]));
            add("signals/" + name + ".csv", "signal", page.signals[k].lead_name);
        }
    });

    ordered_json files = ordered_json::array();
    for (auto& e : entries)
        for (auto& f : e) files.push_back(std::move(f));
    nlohmann::json cfg = config_to_json(config);
    cfg.erase("output_dir");
    cfg.erase("threads");
    ordered_json manifest{{"version", 1},
                          {"created_at", config.reproducible ? kReproducibleTimestamp : utc_timestamp()},
                          {"pipeline_version", pipeline_version()},
                          {"seed", config.seed},
                          {"count", count},
                          {"config", cfg},
                          {"files", files}};
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Evaluation reports
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, fs::path> files_by_stem(const fs::path& dir, const std::string& ext) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) fail(ErrorCode::Io, "not a directory: '" + dir.string() + "'");
    std::map<std::string, fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out[e.path().stem().string()] = e.path();
    return out;
}

void require_same_stems(const std::map<std::string, fs::path>& a, const std::map<std::string, fs::path>& b,
                        const fs::path& a_dir, const fs::path& b_dir) {
    std::vector<std::string> missing;
    for (const auto& [s, p] : a)
        if (!b.contains(s)) missing.push_back(s + " (only in " + a_dir.string() + ")");
    for (const auto& [s, p] : b)
        if (!a.contains(s)) missing.push_back(s + " (only in " + b_dir.string() + ")");
    if (missing.empty()) return;
    std::string msg = "unmatched stems:";
    for (const auto& m : missing) msg += " " + m;
    fail(ErrorCode::InvalidArgument, msg);
}

ordered_json ratio_json(const Ratio& r) { return r.defined ? ordered_json(r.value) : ordered_json(nullptr); }

std::string fixed4(const Ratio& r) {
    if (!r.defined) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", r.value);
    return buf;
}

std::string fixed4(double v) { return fixed4(Ratio{v, true}); }

std::string table_row(const std::string& label, const std::string& value, int width = 16) {
    std::string row = label;
    row.resize(static_cast<std::size_t>(std::max<int>(width, static_cast<int>(label.size()) + 1)), ' ');
    return row + value + "\n";
}

ordered_json summary_json(const DetectionSummary& s) {
    return {{"images", s.images},
            {"tp", s.counts.tp},
            {"fp", s.counts.fp},
            {"fn", s.counts.fn},
            {"precision", ratio_json(s.precision)},
            {"recall", ratio_json(s.recall)},
            {"f1", ratio_json(s.f1)},
            {"average_iou", s.average_iou},
            {"map50", s.map50}};
}

}  // namespace

EvalReport evaluate_detection_dirs(const fs::path& detections_dir, const fs::path& truths_dir, FrameSize frame,
                                   const std::optional<fs::path>& pages_dir) {
    const auto dets = files_by_stem(detections_dir, ".txt");
    const auto truths = files_by_stem(truths_dir, ".txt");
    require_same_stems(dets, truths, detections_dir, truths_dir);

    std::vector<ImageDetections> images;
    std::vector<std::string> stems;
    for (const auto& [stem, det_path] : dets) {
        FrameSize f = frame;
        if (pages_dir) {
            const RasterImage page = read_png(*pages_dir / (stem + ".png"));
            f = {page.width(), page.height()};
        }
        ImageDetections img;
        try {
            for (const auto& d : parse_detections(read_text(det_path)))
                img.detections.push_back({yolo_to_pixel_box(d, f.width, f.height), d.pc});
            for (const auto& t : read_annotations(truths.at(stem)).entries)
                img.truths.push_back(yolo_to_pixel_box({1.0, t.bx, t.by, t.bw, t.bh, t.class_index}, f.width, f.height));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Io) throw;
            fail(e.code(), stem + ": " + e.what());
        }
        images.push_back(std::move(img));
        stems.push_back(stem);
    }

    ordered_json per_image = ordered_json::array();
    for (std::size_t i = 0; i < images.size(); ++i) {
        ordered_json j{{"stem", stems[i]}};
        if (images[i].truths.empty()) {
            j["detections"] = images[i].detections.size();
            j["note"] = "no ground truth";
        } else {
            j.update(summary_json(evaluate_detections(std::span(&images[i], 1))));
        }
        per_image.push_back(std::move(j));
    }

    bool any_truth = false;
    for (const auto& img : images) any_truth = any_truth || !img.truths.empty();
    ordered_json aggregate = nullptr;
    std::string table = table_row("Metric", "Value") + table_row("Images", std::to_string(images.size()));
    if (any_truth) {
        const DetectionSummary s = evaluate_detections(images);
        aggregate = summary_json(s);
        table += table_row("Precision", fixed4(s.precision));
        table += table_row("Recall", fixed4(s.recall));
        table += table_row("F1-score", fixed4(s.f1));
        table += table_row("Average IoU", fixed4(s.average_iou));
        table += table_row("mAP @ 50%", fixed4(s.map50));
    } else {
        table += table_row("Note", "no ground truth boxes");
    }
    ordered_json doc{{"iou_threshold", 0.5},
                     {"average_iou_over", "matched pairs"},
                     {"images", per_image},
                     {"aggregate", aggregate}};
    return {doc.dump(2) + "\n", table};
}

namespace {

struct MaskStats {
    int images = 0;
    double accuracy_sum = 0.0;
    double rmse_sum = 0.0;
    ConfusionCounts pooled;

    void add(const ConfusionCounts& c) {
        const double acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
        ++images;
        accuracy_sum += acc;
        rmse_sum += std::sqrt(1.0 - acc);
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.tn += c.tn;
        pooled.fn += c.fn;
    }
    double pooled_accuracy() const {
        return static_cast<double>(pooled.tp + pooled.tn) / static_cast<double>(pooled.total());
    }
    ordered_json to_json() const {
        if (images == 0) return {{"images", 0}};
        const double pa = pooled_accuracy();
        return {{"images", images},
                {"pixels", pooled.total()},
                {"mean_accuracy", accuracy_sum / images},
                {"mean_rmse", rmse_sum / images},
                {"pooled_accuracy", pa},
                {"pooled_rmse", std::sqrt(static_cast<double>(pooled.fp + pooled.fn) /
                                          static_cast<double>(pooled.total()))}};
    }
};

std::string lead_of_stem(const std::string& stem) {
    const auto pos = stem.rfind('_');
    if (pos == std::string::npos) return {};
    const std::string tail = stem.substr(pos + 1);
    return lead_index(tail) ? tail : std::string{};
}

}  // namespace

EvalReport evaluate_mask_dirs(const fs::path& pred_dir, const fs::path& truth_dir) {
    const auto preds = files_by_stem(pred_dir, ".png");
    const auto truths = files_by_stem(truth_dir, ".png");
    require_same_stems(preds, truths, pred_dir, truth_dir);

    ordered_json files = ordered_json::array();
    std::map<int, MaskStats> per_lead;  // keyed by lead index, -1 = unnamed
    MaskStats all;
    for (const auto& [stem, pred_path] : preds) {
        const BinaryImage pred = read_mask_png(pred_path);
        const BinaryImage truth = read_mask_png(truths.at(stem));
        if (pred.width() != truth.width() || pred.height() != truth.height())
            fail(ErrorCode::InvalidArgument,
                 pred_path.string() + ": size " + std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                     " does not match truth " + std::to_string(truth.width()) + "x" + std::to_string(truth.height()));
        const ConfusionCounts c = pixel_counts(pred, truth);
        const std::string lead = lead_of_stem(stem);
        all.add(c);
        per_lead[lead.empty() ? -1 : *lead_index(lead)].add(c);
        files.push_back({{"stem", stem},
                         {"lead", lead.empty() ? ordered_json(nullptr) : ordered_json(lead)},
                         {"pixels", c.total()},
                         {"accuracy", pixel_accuracy(pred, truth)},
                         {"rmse", rmse_image(pred, truth)}});
    }

    ordered_json leads = ordered_json::object();
    std::string table = table_row("Lead", "Images  MeanAcc  PooledAcc  MeanRMSE  PooledRMSE", 8);
    auto add_row = [&](const std::string& label, const MaskStats& s) {
        const auto j = s.to_json();
        char buf[96];
        std::snprintf(buf, sizeof buf, "%6d  %7s  %9s  %8s  %10s", s.images,
                      fixed4(j["mean_accuracy"].get<double>()).c_str(),
                      fixed4(j["pooled_accuracy"].get<double>()).c_str(),
                      fixed4(j["mean_rmse"].get<double>()).c_str(), fixed4(j["pooled_rmse"].get<double>()).c_str());
        table += table_row(label, buf, 8);
    };
    for (const auto& [idx, stats] : per_lead) {
        const std::string name = idx < 0 ? "other" : std::string(kLeadNames[static_cast<std::size_t>(idx)]);
        leads[name] = stats.to_json();
        add_row(name, stats);
    }
    if (all.images > 0) add_row("All", all);
    ordered_json doc{{"files", files}, {"leads", leads}, {"aggregate", all.to_json()}};
    return {doc.dump(2) + "\n", table};
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

std::string render_svg(const EcgRecord& record) {
    record.validate();
    constexpr int kCols = 4, kRows = 3;
    constexpr double kPanelW = 300, kPanelH = 180, kPadL = 50, kPadT = 24, kGapX = 20, kGapY = 36;
    static constexpr std::array<std::string_view, 12> kOrder = {"I",   "aVR", "V1", "V4", "II",  "aVL",
                                                                "V2",  "V5",  "III", "aVF", "V3", "V6"};
    double vmax = 0.0, tmax = 0.0;
    for (const auto& l : record.leads) {
        tmax = std::max(tmax, l.duration());
        for (double v : l.samples) vmax = std::max(vmax, std::abs(v));
    }
    // Symmetric range in 0.5 mV steps, at least +-1 mV.
    const double range = std::max(1.0, std::ceil(vmax / 0.5) * 0.5);
    if (tmax <= 0.0) tmax = 1.0;

    const double width = kPadL + kCols * (kPanelW + kGapX);
    const double height = kPadT + kRows * (kPanelH + kGapY);
    std::string out;
    char buf[256];
    auto emit = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
    };
    emit("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
         width, height, width, height);
    emit("<title>%s</title>\n", record.source_image_id.empty() ? "ECG record" : record.source_image_id.c_str());
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t slot = 0; slot < kOrder.size(); ++slot) {
        const double x0 = kPadL + static_cast<double>(slot % kCols) * (kPanelW + kGapX);
        const double y0 = kPadT + static_cast<double>(slot / kCols) * (kPanelH + kGapY);
        const double mid = y0 + kPanelH / 2;
        const std::string name(kOrder[slot]);
        emit("<g class=\"panel\" data-lead=\"%s\" data-vmin=\"%.2f\" data-vmax=\"%.2f\">\n", name.c_str(), -range,
             range);
        emit("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"#f0a0a0\"/>\n", x0, y0,
             kPanelW, kPanelH);
        emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#f0a0a0\" stroke-dasharray=\"2,2\"/>\n", x0,
             mid, x0 + kPanelW, mid);
        emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" font-family=\"sans-serif\">%s</text>\n", x0 + 4, y0 + 14,
             name.c_str());
        emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"end\">%+.1f mV</text>\n", x0 - 3, y0 + 8, range);
        emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"end\">0 mV</text>\n", x0 - 3, mid + 3);
        emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"end\">%+.1f mV</text>\n", x0 - 3,
             y0 + kPanelH, -range);
        emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\">0 s</text>\n", x0, y0 + kPanelH + 12);
        emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"end\">%.2f s</text>\n", x0 + kPanelW,
             y0 + kPanelH + 12, tmax);
        if (const LeadSignal* l = record.find(name)) {
            out += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
            for (std::size_t k = 0; k < l->samples.size(); ++k) {
                const double t = static_cast<double>(k) * l->sample_period;
                emit("%s%.2f,%.2f", k ? " " : "", x0 + t / tmax * kPanelW,
                     mid - l->samples[k] / range * (kPanelH / 2));
            }
            out += "\"/>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace ecgdigi
