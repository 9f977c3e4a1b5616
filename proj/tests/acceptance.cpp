// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "ecgdigi/image_io.hpp"
#include "ecgdigi/metrics.hpp"
#include "ecgdigi/pipeline.hpp"
#include "ecgdigi/record.hpp"
#include "ecgdigi/roi.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace ecgdigi;
namespace fs = std::filesystem;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

constexpr int kPages = 20;
constexpr std::uint64_t kSeed = 2024;

int run_cli(const std::string& args, const std::string& redirect = ">/dev/null 2>&1") {
    const std::string cmd = std::string("'") + ECGDIGI_CLI_PATH + "' " + args + " " + redirect;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

std::string page_stem(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "page_%04d", i);
    return buf;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int n, const std::string& title, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", n, title.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// Shared 20-page clean dataset at 10 px/mm, generated and digitized by the CLI.
struct Dataset {
    TempDir dir;
    double seconds = 0.0;
    int synth_status = -1;
    std::vector<int> digitize_status;
};

Dataset& dataset() {
    static Dataset ds;
    static bool ready = false;
    if (ready) return ds;
    ready = true;
    const auto t0 = std::chrono::steady_clock::now();
    ds.synth_status = run_cli("synth --count " + std::to_string(kPages) + " --seed " + std::to_string(kSeed) +
                              " --reproducible -o " + quote(ds.dir / "syn"));
    for (int i = 0; i < kPages; ++i)
        ds.digitize_status.push_back(run_cli("digitize --reproducible -o " + quote(ds.dir / "dig") + " " +
                                             quote(ds.dir / "syn/pages" / (page_stem(i) + ".png"))));
    ds.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return ds;
}

Outcome criterion_round_trip() {
    Dataset& ds = dataset();
    if (ds.synth_status != 0) return {false, "synth exited " + std::to_string(ds.synth_status)};
    const Calibration cal;
    const double bound = (PageLayout{}.trace_thickness / 2.0 + 1.0) / cal.px_per_mv();
    double worst_rmse = 0.0, worst_max = 0.0;
    int leads = 0, bad = 0;
    for (int i = 0; i < kPages; ++i) {
        if (ds.digitize_status[i] != 0) {
            ++bad;
            continue;
        }
        const EcgRecord rec = read_record(ds.dir / "dig" / (page_stem(i) + ".json"));
        for (auto name : kLeadNames) {
            const std::string lead(name);
            const LeadSignal truth =
                signal_from_csv(read_text(ds.dir / "syn/signals" / (page_stem(i) + "_" + lead + ".csv")), lead);
            const LeadSignal* got = rec.find(lead);
            if (!got) {
                ++bad;
                continue;
            }
            LeadSignal a = resample(*got, truth.sample_period), b = truth;
            const std::size_t n = std::min(a.samples.size(), b.samples.size());
            if (n + 2 < b.samples.size()) ++bad;  // more than one source sample short
            a.samples.resize(n);
            b.samples.resize(n);
            const double r = rmse_signal(a, b), m = max_abs_error(a, b);
            worst_rmse = std::max(worst_rmse, r);
            worst_max = std::max(worst_max, m);
            if (r > 0.1 || m > bound) ++bad;
            ++leads;
        }
    }
    const bool pass = bad == 0 && leads == 12 * kPages && ds.seconds <= 60.0;
    return {pass, fmt("%.0f leads, worst rmse %.4f mV (<= 0.1), worst max %.4f mV (<= %.4f), ", leads, worst_rmse,
                      worst_max, bound) +
                      fmt("%.1f s for synth+digitize (<= 60)", ds.seconds)};
}

Outcome criterion_detection() {
    Dataset& ds = dataset();
    std::vector<ImageDetections> images;
    for (int i = 0; i < kPages; ++i) {
        const RasterImage page = read_png(ds.dir / "syn/pages" / (page_stem(i) + ".png"));
        ImageDetections img;
        for (const auto& d : detect_leads(page).boxes)
            img.detections.push_back({yolo_to_pixel_box(d, page.width(), page.height()), d.pc});
        for (const auto& t : read_annotations(ds.dir / "syn/labels" / (page_stem(i) + ".txt")).entries)
            img.truths.push_back(yolo_to_pixel_box({1.0, t.bx, t.by, t.bw, t.bh}, page.width(), page.height()));
        images.push_back(std::move(img));
    }
    const DetectionSummary s = evaluate_detections(images);
    const bool pass = s.map50 >= 0.95 && s.precision.value >= 0.95 && s.recall.value >= 0.95 && s.average_iou >= 0.72;
    return {pass, fmt("mAP@50 %.4f, precision %.4f, recall %.4f, average IoU %.4f", s.map50, s.precision.value,
                      s.recall.value, s.average_iou)};
}

void add_counts(ConfusionCounts& pooled, const SyntheticPage& page, const RasterImage& image) {
    const PipelineConfig cfg;
    for (std::size_t k = 0; k < page.rendered.boxes.size(); ++k) {
        const LeadArtifacts a = binarize_lead(image, page.rendered.boxes[k], page.signals[k].lead_name, cfg);
        const ConfusionCounts c = pixel_counts(a.mask, page.rendered.masks[k]);
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.tn += c.tn;
        pooled.fn += c.fn;
    }
}

Outcome criterion_binarization() {
    DegradationSpec d;
    d.gaussian_blur_sigma = 1.5;
    d.contrast_scale = 0.6;
    d.to_grayscale = true;
    ConfusionCounts clean, degraded;
    for (int i = 0; i < kPages; ++i) {
        const SyntheticPage page = synthesize_page(derive_seed(kSeed, static_cast<std::uint64_t>(i)), SynthOptions{});
        add_counts(clean, page, page.rendered.page);
        d.rng_seed = static_cast<std::uint64_t>(i);
        add_counts(degraded, page, degrade(page.rendered.page, d));
    }
    auto acc = [](const ConfusionCounts& c) { return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()); };
    const double a_clean = acc(clean), a_degraded = acc(degraded);
    return {a_clean >= 0.974 && a_degraded >= 0.95,
            fmt("pooled accuracy clean %.4f (>= 0.974), degraded blur 1.5/contrast 0.6/grayscale %.4f (>= 0.95)",
                a_clean, a_degraded)};
}

Outcome criterion_metric_oracles() {
    Rng rng(99);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const ConfusionCounts c{static_cast<long long>(rng.uniform() * 30), static_cast<long long>(rng.uniform() * 30),
                                static_cast<long long>(rng.uniform() * 30), static_cast<long long>(rng.uniform() * 30)};
        const double p = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
        const double r = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
        const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        mismatches += precision(c).value != p || recall(c).value != r || f1(c).value != f;
    }
    for (int i = 0; i < 1000; ++i) {
        const PixelBox a = oracle::random_box(rng, 14), b = oracle::random_box(rng, 14);
        mismatches += iou(a, b) != oracle::pixel_iou(a, b);
    }
    for (int i = 0; i < 1000; ++i) {
        ImageDetections img;
        const int nt = 1 + static_cast<int>(rng.uniform() * 3), nd = static_cast<int>(rng.uniform() * 6);
        for (int t = 0; t < nt; ++t) img.truths.push_back(oracle::random_box(rng, 10));
        for (int k = 0; k < nd; ++k) {
            const PixelBox b = rng.uniform() < 0.5 ? img.truths[static_cast<std::size_t>(rng.uniform() * nt)]
                                                   : oracle::random_box(rng, 10);
            img.detections.push_back({b, std::round(rng.uniform() * 5.0) / 5.0});
        }
        mismatches += average_precision(img, 0.5) != oracle::average_precision(img.detections, img.truths, 0.5);
    }
    int identity_failures = 0;
    std::string failures;
    for (int i = 0; i < 100; ++i) {
        const int w = 1 + static_cast<int>(rng.uniform() * 64), h = 1 + static_cast<int>(rng.uniform() * 64);
        BinaryImage a(w, h), b(w, h);
        const double pa = rng.uniform(), pb = rng.uniform();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                a.set(x, y, rng.uniform() < pa);
                b.set(x, y, rng.uniform() < pb);
            }
        const double r = rmse_image(a, b);
        const double acc = pixel_accuracy(a, b);
        if (r * r + acc == 1.0) continue;
        ++identity_failures;
        // Is there any double at all whose square completes the sum?
        bool attainable = false;
        double v = std::sqrt(1.0 - acc);
        for (int s = 0; s < 2000; ++s) v = std::nextafter(v, 0.0);
        for (int s = 0; s < 4001 && !attainable; ++s, v = std::nextafter(v, 2.0)) attainable = v * v + acc == 1.0;
        const ConfusionCounts k = pixel_counts(a, b);
        failures += fmt(" [%.0f of %.0f pixels differ, ", static_cast<double>(k.fp + k.fn), static_cast<double>(k.total())) +
                    (attainable ? "a double exists]" : "no double within 2000 ulps satisfies it]");
    }
    return {mismatches == 0 && identity_failures == 0,
            fmt("%.0f oracle mismatches over 3000 cases, %.0f identity failures over 100 mask pairs", mismatches,
                identity_failures) + failures};
}

Outcome criterion_f1() {
    const double f = f1(0.97, 0.94).value;
    return {std::abs(f - 0.9548) <= 1e-4 && std::round(f * 100.0) / 100.0 == 0.95, fmt("F1 = %.6f", f)};
}

Outcome criterion_round_trips() {
    // YOLO emit -> parse.
    Rng rng(7);
    int worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const int w = 50 + static_cast<int>(rng.uniform() * 4000), h = 50 + static_cast<int>(rng.uniform() * 4000);
        const int x0 = static_cast<int>(rng.uniform() * (w - 1)), y0 = static_cast<int>(rng.uniform() * (h - 1));
        const int x1 = x0 + 1 + static_cast<int>(rng.uniform() * (w - x0 - 1));
        const int y1 = y0 + 1 + static_cast<int>(rng.uniform() * (h - y0 - 1));
        const std::vector<PixelBox> in{{x0, y0, x1, y1}};
        const auto e = parse_annotations(emit_ground_truth(in, w, h)).entries.at(0);
        const PixelBox out = yolo_to_pixel_box({1.0, e.bx, e.by, e.bw, e.bh}, w, h);
        worst = std::max({worst, std::abs(out.x_min - x0), std::abs(out.x_max - x1), std::abs(out.y_min - y0),
                          std::abs(out.y_max - y1)});
    }

    // Record JSON write -> read -> write over the digitized dataset.
    Dataset& ds = dataset();
    int json_diffs = 0, records = 0;
    for (int i = 0; i < kPages; ++i) {
        const fs::path p = ds.dir / "dig" / (page_stem(i) + ".json");
        if (!fs::exists(p)) continue;
        const std::string first = read_text(p);
        json_diffs += record_to_json(record_from_json(first)) != first;
        ++records;
    }

    // Every command twice with the same seed and --reproducible.
    TempDir work;
    for (const char* run : {"a", "b"}) {
        const fs::path r = work / run;
        const std::string common = " --seed 5 --reproducible";
        run_cli("synth --count 2 -o " + quote(r / "syn") + common);
        const std::string page = quote(r / "syn/pages/page_0001.png");
        run_cli("digitize --save-intermediates -o " + quote(r / "dig") + " " + page + common,
                ">" + quote(r / "digitize.out") + " 2>&1");
        fs::create_directories(r / "det");
        fs::create_directories(r / "truth");
        run_cli("detect -o " + quote(r / "det/page_0001.txt") + " --json " + quote(r / "det.json") + " " + page +
                common);
        fs::copy(r / "syn/labels/page_0001.txt", r / "truth/page_0001.txt");
        run_cli("eval-detect " + quote(r / "det") + " " + quote(r / "truth") + " --pages " + quote(r / "syn/pages") +
                    " --report " + quote(r / "ed.json") + common,
                ">" + quote(r / "ed.txt") + " 2>&1");
        fs::create_directories(r / "gt_masks");
        for (const auto& e : fs::directory_iterator(r / "dig/masks"))
            fs::copy(r / "syn/masks" / e.path().filename(), r / "gt_masks" / e.path().filename());
        run_cli("eval-binarize " + quote(r / "dig/masks") + " " + quote(r / "gt_masks") + " --report " +
                    quote(r / "eb.json") + common,
                ">" + quote(r / "eb.txt") + " 2>&1");
        run_cli("plot -o " + quote(r / "plot.svg") + " " + quote(r / "dig/page_0001.json") + common);
    }
    const auto a = tree(work / "a"), b = tree(work / "b");
    int tree_diffs = a.size() == b.size() ? 0 : 1;
    for (const auto& [rel, body] : a) tree_diffs += !b.contains(rel) || b.at(rel) != body;
    // Expected products present: 2 pages x 26 + manifest, 12 crops + 12 masks, outputs.
    const bool complete = a.size() >= 53 + 24 + 14 + 8;
    return {worst <= 1 && json_diffs == 0 && records == kPages && tree_diffs == 0 && complete,
            fmt("YOLO drift max %.0f px (<= 1); JSON byte diffs %.0f of %.0f records; ", worst, json_diffs, records) +
                fmt("reproducible tree diffs %.0f over %.0f files", tree_diffs, static_cast<double>(a.size()))};
}

Outcome criterion_pluggability() {
    Dataset& ds = dataset();
    TempDir work;
    int diffs = 0, checked = 0;
    for (int i = 0; i < 3; ++i) {
        const std::string stem = page_stem(i);
        const fs::path page = ds.dir / "syn/pages" / (stem + ".png");
        const fs::path labels = ds.dir / "syn/labels" / (stem + ".txt");

        // Detector: stub replaying ground truth vs ground-truth boxes fed directly.
        const fs::path stub_out = work / ("det_stub_" + stem), direct_out = work / ("det_direct_" + stem);
        const std::string stub = "awk '{print \\$1, 1.0, \\$2, \\$3, \\$4, \\$5}' " + quote(labels) + " # {input}";
        const int s1 = run_cli("digitize --reproducible --detector external --detector-cmd \"" + stub + "\" -o " +
                               quote(stub_out) + " " + quote(page));
        const int s2 = run_cli("digitize --reproducible --annotations " + quote(labels) + " -o " + quote(direct_out) +
                               " " + quote(page));
        diffs += s1 != 0 || s2 != 0 || tree(stub_out) != tree(direct_out);
        ++checked;

        // Binarizer: stub replaying ground-truth masks through the 256x256
        // contract vs the same masks handed straight to the scan stage.
        PipelineConfig cfg;
        cfg.reproducible = true;
        const SyntheticPage truth = synthesize_page(derive_seed(kSeed, static_cast<std::uint64_t>(i)), SynthOptions{});
        const fs::path mask_dir = work / ("masks_" + stem);
        fs::create_directories(mask_dir);
        std::vector<LeadArtifacts> direct;
        for (auto name : kLeadNames) {
            const std::string lead(name);
            const int slot = cfg.layout.slot_of(lead);
            const BinaryImage& m = truth.rendered.masks[static_cast<std::size_t>(slot)];
            const BinaryImage contract = resize_nearest(m, kExternalSide, kExternalSide);
            write_png(mask_dir / (lead + ".png"), mask_to_image(contract));
            direct.push_back({lead, truth.rendered.boxes[static_cast<std::size_t>(slot)], {},
                              resize_nearest(contract, m.width(), m.height())});
        }
        const fs::path bin_out = work / ("bin_stub_" + stem);
        const std::string bstub = "cp " + quote(mask_dir) + "/{lead}.png {output} # {input}";
        const int s3 = run_cli("digitize --reproducible --annotations " + quote(labels) +
                               " --binarizer external --binarizer-cmd \"" + bstub + "\" -o " + quote(bin_out) + " " +
                               quote(page));
        const std::string expect = record_to_json(record_from_masks(direct, cfg, stem + ".png"));
        diffs += s3 != 0 || !fs::exists(bin_out / (stem + ".json")) || read_text(bin_out / (stem + ".json")) != expect;
        ++checked;
    }
    return {diffs == 0, fmt("%.0f of %.0f stub-vs-direct comparisons differ", diffs, checked)};
}

}  // namespace

int main() {
    report(1, "round-trip fidelity on 20 clean pages", criterion_round_trip);
    report(2, "built-in detector on 20 clean pages", criterion_detection);
    report(3, "built-in binarizer accuracy, clean and degraded", criterion_binarization);
    report(4, "metric implementations against brute-force oracles", criterion_metric_oracles);
    report(5, "F1 from precision 0.97 and recall 0.94", criterion_f1);
    report(6, "format round trips and reproducible commands", criterion_round_trips);
    report(7, "stub external stages equal direct ground-truth feeding", criterion_pluggability);
    std::printf("%d of 7 criteria passed\n", 7 - failures);
    return failures == 0 ? 0 : 1;
}
