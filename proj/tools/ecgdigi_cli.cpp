// ecgdigi command line. Talks to the library only through the C interface.
#include "ecgdigi/ecgdigi.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

struct CString {
    char* p = nullptr;
    ~CString() { ecgd_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct ConfigPtr {
    ecgd_config* p = nullptr;
    ~ConfigPtr() { ecgd_config_free(p); }
};

struct RecordPtr {
    ecgd_record* p = nullptr;
    ~RecordPtr() { ecgd_record_free(p); }
};

const char* status_name(int s) {
    switch (s) {
    case ECGD_OK: return "ok";
    case ECGD_INVALID_ARGUMENT: return "invalid_argument";
    case ECGD_NO_LEADS: return "no_leads";
    case ECGD_PARTIAL_LEADS: return "partial_leads";
    case ECGD_STAGE_FAILURE: return "stage_failure";
    case ECGD_IO: return "io_error";
    case ECGD_FORMAT: return "format_error";
    }
    return "unknown";
}

int report(int status, const std::string& command, const std::string& message) {
    json err{{"error", {{"command", command}, {"code", status}, {"kind", status_name(status)}, {"message", message}}}};
    std::cerr << err.dump() << "\n";
    return status;
}

int report_last(int status, const std::string& command) { return report(status, command, ecgd_last_error()); }

bool write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    return static_cast<bool>(out);
}

// Options shared by every subcommand; flags override the config file.
struct Common {
    std::string config_path;
    std::optional<unsigned long long> seed;
    bool reproducible = false;
    std::optional<int> threads;
    json patch = json::object();

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "Random seed");
        app->add_flag("--reproducible", reproducible, "Pin timestamps for byte-identical output");
        app->add_option("--threads", threads, "Worker threads (0 = all cores)");
    }

    // Returns 0 or an exit status.
    int build(ConfigPtr& cfg, const std::string& command) {
        if (int s = ecgd_config_create(&cfg.p)) return report_last(s, command);
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) return report(ECGD_IO, command, "cannot read '" + config_path + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            if (int s = ecgd_config_merge_json(cfg.p, ss.str().c_str()))
                return report(s, command, config_path + ": " + ecgd_last_error());
        }
        if (seed) patch["seed"] = *seed;
        if (reproducible) patch["reproducible"] = true;
        if (threads) patch["threads"] = *threads;
        if (int s = ecgd_config_merge_json(cfg.p, patch.dump().c_str())) return report_last(s, command);
        return 0;
    }
};

template <typename T>
void set_if(json& patch, const std::optional<T>& v, const json::json_pointer& where) {
    if (v) patch[where] = *v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digitize photographed 12-lead ECG paper into calibrated signals"};
    app.set_version_flag("--version", std::string(ecgd_version()));
    app.require_subcommand(1);

    // Calibration flags are shared by synth, digitize and detect.
    struct Calib {
        std::optional<double> px_per_mm, mm_per_mv, mm_per_s;
        void attach(CLI::App* a) {
            a->add_option("--px-per-mm", px_per_mm, "Image resolution");
            a->add_option("--mm-per-mv", mm_per_mv, "Vertical gain");
            a->add_option("--mm-per-s", mm_per_s, "Paper speed");
        }
        void apply(json& p) const {
            set_if(p, px_per_mm, "/calibration/px_per_mm"_json_pointer);
            set_if(p, mm_per_mv, "/calibration/mm_per_mv"_json_pointer);
            set_if(p, mm_per_s, "/calibration/mm_per_s"_json_pointer);
        }
    };

    // synth
    Common synth_common;
    Calib synth_calib;
    int synth_count = 20;
    std::optional<std::string> synth_out;
    std::optional<double> blur, contrast, brightness, noise;
    bool grayscale = false;
    auto* synth = app.add_subcommand("synth", "Generate synthetic pages with ground truth");
    synth_common.attach(synth);
    synth_calib.attach(synth);
    synth->add_option("--count", synth_count, "Number of pages")->check(CLI::NonNegativeNumber);
    synth->add_option("-o,--out", synth_out, "Output directory");
    synth->add_option("--blur", blur, "Gaussian blur sigma (px)");
    synth->add_option("--contrast", contrast, "Contrast scale");
    synth->add_option("--brightness", brightness, "Brightness shift");
    synth->add_option("--noise", noise, "Additive noise sigma");
    synth->add_flag("--grayscale", grayscale, "Convert pages to grayscale");

    // digitize
    Common dig_common;
    Calib dig_calib;
    std::string dig_page;
    std::optional<std::string> dig_out, detector, detector_cmd, annotations, binarizer, binarizer_cmd;
    std::optional<double> resample, bias;
    std::optional<int> max_gap, window;
    bool save_intermediates = false;
    auto* digitize = app.add_subcommand("digitize", "Digitize one ECG page image");
    dig_common.attach(digitize);
    dig_calib.attach(digitize);
    digitize->add_option("page", dig_page, "Page PNG")->required();
    digitize->add_option("-o,--out", dig_out, "Output directory");
    digitize->add_option("--detector", detector, "builtin | external | annotations")
        ->check(CLI::IsMember({"builtin", "external", "annotations"}));
    digitize->add_option("--detector-cmd", detector_cmd, "External detector command with {input}");
    digitize->add_option("--annotations", annotations, "YOLO annotation file used as detections")
        ->check(CLI::ExistingFile);
    digitize->add_option("--binarizer", binarizer, "builtin | external")
        ->check(CLI::IsMember({"builtin", "external"}));
    digitize->add_option("--binarizer-cmd", binarizer_cmd, "External binarizer command with {input} {output}");
    digitize->add_option("--resample", resample, "Resample period in seconds");
    digitize->add_option("--max-gap", max_gap, "Largest gap (columns) bridged by interpolation");
    digitize->add_option("--bias", bias, "Threshold bias below the local mean");
    digitize->add_option("--window", window, "Threshold window (px)");
    digitize->add_flag("--save-intermediates", save_intermediates, "Keep crops, masks and detections");

    // detect
    Common det_common;
    Calib det_calib;
    std::string det_page;
    std::optional<std::string> det_out, det_json, det_detector, det_cmd, det_annotations;
    auto* detect = app.add_subcommand("detect", "Run lead detection only");
    det_common.attach(detect);
    det_calib.attach(detect);
    detect->add_option("page", det_page, "Page PNG")->required();
    detect->add_option("-o,--out", det_out, "Write detection lines here instead of stdout");
    detect->add_option("--json", det_json, "Also write detections as JSON");
    detect->add_option("--detector", det_detector, "builtin | external | annotations")
        ->check(CLI::IsMember({"builtin", "external", "annotations"}));
    detect->add_option("--detector-cmd", det_cmd, "External detector command with {input}");
    detect->add_option("--annotations", det_annotations, "YOLO annotation file")->check(CLI::ExistingFile);

    // eval-detect
    Common ed_common;
    std::string ed_det, ed_truth;
    std::optional<std::string> ed_pages, ed_report;
    int ed_width = 2880, ed_height = 2160;
    auto* eval_detect = app.add_subcommand("eval-detect", "Score detections against ground-truth boxes");
    ed_common.attach(eval_detect);
    eval_detect->add_option("detections", ed_det, "Directory of <stem>.txt detections")->required();
    eval_detect->add_option("truths", ed_truth, "Directory of <stem>.txt YOLO annotations")->required();
    eval_detect->add_option("--pages", ed_pages, "Directory of <stem>.png pages giving each frame size");
    eval_detect->add_option("--width", ed_width, "Frame width when --pages is absent");
    eval_detect->add_option("--height", ed_height, "Frame height when --pages is absent");
    eval_detect->add_option("--report", ed_report, "Write the JSON report here");

    // eval-binarize
    Common eb_common;
    std::string eb_pred, eb_truth;
    std::optional<std::string> eb_report;
    auto* eval_bin = app.add_subcommand("eval-binarize", "Score predicted masks against truth masks");
    eb_common.attach(eval_bin);
    eval_bin->add_option("predicted", eb_pred, "Directory of predicted <stem>.png masks")->required();
    eval_bin->add_option("truths", eb_truth, "Directory of truth <stem>.png masks")->required();
    eval_bin->add_option("--report", eb_report, "Write the JSON report here");

    // plot
    Common plot_common;
    std::string plot_record;
    std::optional<std::string> plot_out;
    auto* plot = app.add_subcommand("plot", "Render a record as SVG");
    plot_common.attach(plot);
    plot->add_option("record", plot_record, "Record JSON")->required();
    plot->add_option("-o,--out", plot_out, "SVG path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report(ECGD_INVALID_ARGUMENT, "", e.what());
    }

    if (synth->parsed()) {
        auto& p = synth_common.patch;
        synth_calib.apply(p);
        set_if(p, synth_out, "/output_dir"_json_pointer);
        if (blur || contrast || brightness || noise || grayscale) {
            set_if(p, blur, "/synth/degrade/gaussian_blur_sigma"_json_pointer);
            set_if(p, contrast, "/synth/degrade/contrast_scale"_json_pointer);
            set_if(p, brightness, "/synth/degrade/brightness_shift"_json_pointer);
            set_if(p, noise, "/synth/degrade/noise_sigma"_json_pointer);
            if (grayscale) p["synth"]["degrade"]["to_grayscale"] = true;
        }
        ConfigPtr cfg;
        if (int s = synth_common.build(cfg, "synth")) return s;
        if (int s = ecgd_synth(cfg.p, synth_count)) return report_last(s, "synth");
        return 0;
    }

    if (digitize->parsed()) {
        auto& p = dig_common.patch;
        dig_calib.apply(p);
        set_if(p, dig_out, "/output_dir"_json_pointer);
        if (annotations && !detector) detector = "annotations";
        if (detector_cmd && !detector) detector = "external";
        if (binarizer_cmd && !binarizer) binarizer = "external";
        set_if(p, detector, "/detector/kind"_json_pointer);
        set_if(p, detector_cmd, "/detector/command"_json_pointer);
        set_if(p, annotations, "/detector/annotations"_json_pointer);
        set_if(p, binarizer, "/binarizer/kind"_json_pointer);
        set_if(p, binarizer_cmd, "/binarizer/command"_json_pointer);
        set_if(p, resample, "/scan/resample_period"_json_pointer);
        set_if(p, max_gap, "/scan/max_gap"_json_pointer);
        set_if(p, bias, "/threshold/bias"_json_pointer);
        set_if(p, window, "/threshold/window"_json_pointer);
        if (save_intermediates) p["save_intermediates"] = true;
        ConfigPtr cfg;
        if (int s = dig_common.build(cfg, "digitize")) return s;
        RecordPtr rec;
        CString diag;
        const int s = ecgd_digitize(cfg.p, dig_page.c_str(), &rec.p, &diag.p);
        if (s == ECGD_OK || s == ECGD_PARTIAL_LEADS || s == ECGD_NO_LEADS) std::cout << diag.str();
        if (s) return report_last(s, "digitize");
        return 0;
    }

    if (detect->parsed()) {
        auto& p = det_common.patch;
        det_calib.apply(p);
        if (det_annotations && !det_detector) det_detector = "annotations";
        if (det_cmd && !det_detector) det_detector = "external";
        set_if(p, det_detector, "/detector/kind"_json_pointer);
        set_if(p, det_cmd, "/detector/command"_json_pointer);
        set_if(p, det_annotations, "/detector/annotations"_json_pointer);
        ConfigPtr cfg;
        if (int s = det_common.build(cfg, "detect")) return s;
        CString lines, js;
        const int s = ecgd_detect(cfg.p, det_page.c_str(), &lines.p, &js.p);
        if (s && s != ECGD_NO_LEADS) return report_last(s, "detect");
        if (det_out) {
            if (!write_file(*det_out, lines.str())) return report(ECGD_IO, "detect", "cannot write '" + *det_out + "'");
        } else {
            std::cout << lines.str();
        }
        if (det_json && !write_file(*det_json, js.str()))
            return report(ECGD_IO, "detect", "cannot write '" + *det_json + "'");
        if (s) return report_last(s, "detect");
        return 0;
    }

    if (eval_detect->parsed()) {
        ConfigPtr cfg;
        if (int s = ed_common.build(cfg, "eval-detect")) return s;
        CString js, table;
        const int s = ecgd_eval_detect(ed_det.c_str(), ed_truth.c_str(), ed_width, ed_height,
                                       ed_pages ? ed_pages->c_str() : nullptr, &js.p, &table.p);
        if (s) return report_last(s, "eval-detect");
        std::cout << table.str();
        if (ed_report && !write_file(*ed_report, js.str()))
            return report(ECGD_IO, "eval-detect", "cannot write '" + *ed_report + "'");
        return 0;
    }

    if (eval_bin->parsed()) {
        ConfigPtr cfg;
        if (int s = eb_common.build(cfg, "eval-binarize")) return s;
        CString js, table;
        const int s = ecgd_eval_binarize(eb_pred.c_str(), eb_truth.c_str(), &js.p, &table.p);
        if (s) return report_last(s, "eval-binarize");
        std::cout << table.str();
        if (eb_report && !write_file(*eb_report, js.str()))
            return report(ECGD_IO, "eval-binarize", "cannot write '" + *eb_report + "'");
        return 0;
    }

    if (plot->parsed()) {
        ConfigPtr cfg;
        if (int s = plot_common.build(cfg, "plot")) return s;
        RecordPtr rec;
        if (int s = ecgd_record_load(plot_record.c_str(), &rec.p)) return report_last(s, "plot");
        CString svg;
        if (int s = ecgd_plot(rec.p, &svg.p)) return report_last(s, "plot");
        if (plot_out) {
            if (!write_file(*plot_out, svg.str())) return report(ECGD_IO, "plot", "cannot write '" + *plot_out + "'");
        } else {
            std::cout << svg.str();
        }
        return 0;
    }
    return 0;
}
