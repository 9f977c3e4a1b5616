#include "ecgdigi/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace ecgdigi {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    fail(ErrorCode::InvalidArgument, "config " + where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) config_error(where, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!allowed.contains(k)) config_error(where + "/" + k, "unknown key");
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        config_error(where + "/" + key, "wrong type");
    }
}

void read_rgb(const json& obj, const std::string& where, const char* key, Rgb& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_array() || it->size() != 3) config_error(where + "/" + key, "expected [r, g, b]");
    std::array<int, 3> v{};
    for (int i = 0; i < 3; ++i) {
        if (!(*it)[i].is_number_integer()) config_error(where + "/" + key, "expected integers");
        v[i] = (*it)[i].get<int>();
        if (v[i] < 0 || v[i] > 255) config_error(where + "/" + key, "component outside [0,255]");
    }
    out = {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
}

}  // namespace

void apply_config_json(PipelineConfig& c, const json& patch) {
    only_keys(patch, "", {"calibration", "preprocess", "threshold", "detector", "binarizer", "scan", "layout",
                          "synth", "output_dir", "seed", "reproducible", "save_intermediates", "timeout_s",
                          "threads"});
    if (auto it = patch.find("calibration"); it != patch.end()) {
        only_keys(*it, "/calibration", {"px_per_mm", "mm_per_mv", "mm_per_s"});
        const bool resolution_changed = it->contains("px_per_mm");
        read(*it, "/calibration", "px_per_mm", c.calibration.px_per_mm);
        read(*it, "/calibration", "mm_per_mv", c.calibration.mm_per_mv);
        read(*it, "/calibration", "mm_per_s", c.calibration.mm_per_s);
        if (resolution_changed && !patch.contains("layout")) {
            const PageLayout scaled = PageLayout::for_resolution(c.calibration.px_per_mm);
            c.layout.page_width = scaled.page_width;
            c.layout.page_height = scaled.page_height;
            c.layout.margin = scaled.margin;
            c.layout.col_gap = scaled.col_gap;
            c.layout.row_gap = scaled.row_gap;
            c.layout.trace_inset = scaled.trace_inset;
        }
    }
    if (auto it = patch.find("preprocess"); it != patch.end()) {
        only_keys(*it, "/preprocess", {"sharpen_kernel", "gaussian_sigma", "gaussian_kernel_size"});
        if (auto k = it->find("sharpen_kernel"); k != it->end()) {
            std::vector<double> w;
            read(*it, "/preprocess", "sharpen_kernel", w);
            int size = 1;
            while (size * size < static_cast<int>(w.size())) ++size;
            if (size * size != static_cast<int>(w.size())) config_error("/preprocess/sharpen_kernel", "not square");
            c.preprocess.sharpen_kernel = {size, w};
        }
        read(*it, "/preprocess", "gaussian_sigma", c.preprocess.gaussian_sigma);
        read(*it, "/preprocess", "gaussian_kernel_size", c.preprocess.gaussian_kernel_size);
    }
    if (auto it = patch.find("threshold"); it != patch.end()) {
        only_keys(*it, "/threshold", {"window", "bias", "min_component_area", "red_tolerance"});
        read(*it, "/threshold", "window", c.threshold.window);
        read(*it, "/threshold", "bias", c.threshold.bias);
        read(*it, "/threshold", "min_component_area", c.threshold.min_component_area);
        read(*it, "/threshold", "red_tolerance", c.threshold.red_tolerance);
    }
    if (auto it = patch.find("detector"); it != patch.end()) {
        only_keys(*it, "/detector", {"kind", "command", "annotations", "expected_count"});
        std::string kind;
        read(*it, "/detector", "kind", kind);
        if (kind == "builtin") c.detector.kind = DetectorChoice::Kind::Builtin;
        else if (kind == "external") c.detector.kind = DetectorChoice::Kind::External;
        else if (kind == "annotations") c.detector.kind = DetectorChoice::Kind::Annotations;
        else if (!kind.empty()) config_error("/detector/kind", "expected builtin, external or annotations");
        read(*it, "/detector", "command", c.detector.command);
        std::string ann;
        read(*it, "/detector", "annotations", ann);
        if (!ann.empty()) c.detector.annotations = ann;
        read(*it, "/detector", "expected_count", c.detector_options.expected_count);
    }
    if (auto it = patch.find("binarizer"); it != patch.end()) {
        only_keys(*it, "/binarizer", {"kind", "command"});
        std::string kind;
        read(*it, "/binarizer", "kind", kind);
        if (kind == "builtin") c.binarizer.kind = BinarizerChoice::Kind::Builtin;
        else if (kind == "external") c.binarizer.kind = BinarizerChoice::Kind::External;
        else if (!kind.empty()) config_error("/binarizer/kind", "expected builtin or external");
        read(*it, "/binarizer", "command", c.binarizer.command);
    }
    if (auto it = patch.find("scan"); it != patch.end()) {
        only_keys(*it, "/scan", {"max_gap", "resample_period"});
        if (it->contains("max_gap")) {
            if ((*it)["max_gap"].is_null()) c.scan.max_gap.reset();
            else {
                int g = 0;
                read(*it, "/scan", "max_gap", g);
                c.scan.max_gap = g;
            }
        }
        if (it->contains("resample_period")) {
            if ((*it)["resample_period"].is_null()) c.scan.resample_period.reset();
            else {
                double p = 0;
                read(*it, "/scan", "resample_period", p);
                c.scan.resample_period = p;
            }
        }
    }
    if (auto it = patch.find("layout"); it != patch.end()) {
        only_keys(*it, "/layout",
                  {"rows", "cols", "page_width", "page_height", "margin", "col_gap", "row_gap", "trace_inset",
                   "draw_grid", "minor_thickness", "major_thickness", "major_every", "paper", "minor_color",
                   "major_color", "trace_color", "trace_thickness", "lead_order"});
        auto& l = c.layout;
        read(*it, "/layout", "rows", l.rows);
        read(*it, "/layout", "cols", l.cols);
        read(*it, "/layout", "page_width", l.page_width);
        read(*it, "/layout", "page_height", l.page_height);
        read(*it, "/layout", "margin", l.margin);
        read(*it, "/layout", "col_gap", l.col_gap);
        read(*it, "/layout", "row_gap", l.row_gap);
        read(*it, "/layout", "trace_inset", l.trace_inset);
        read(*it, "/layout", "draw_grid", l.draw_grid);
        read(*it, "/layout", "minor_thickness", l.minor_thickness);
        read(*it, "/layout", "major_thickness", l.major_thickness);
        read(*it, "/layout", "major_every", l.major_every);
        read_rgb(*it, "/layout", "paper", l.paper);
        read_rgb(*it, "/layout", "minor_color", l.minor_color);
        read_rgb(*it, "/layout", "major_color", l.major_color);
        read_rgb(*it, "/layout", "trace_color", l.trace_color);
        read(*it, "/layout", "trace_thickness", l.trace_thickness);
        if (it->contains("lead_order")) {
            std::vector<std::string> order;
            read(*it, "/layout", "lead_order", order);
            if (order.size() != 12) config_error("/layout/lead_order", "expected 12 lead names");
            std::copy(order.begin(), order.end(), l.lead_order.begin());
        }
    }
    if (auto it = patch.find("synth"); it != patch.end()) {
        only_keys(*it, "/synth", {"sample_period", "lead_duration", "degrade"});
        read(*it, "/synth", "sample_period", c.sample_period);
        read(*it, "/synth", "lead_duration", c.lead_duration);
        if (auto d = it->find("degrade"); d != it->end()) {
            if (d->is_null()) c.degradation.reset();
            else {
                only_keys(*d, "/synth/degrade",
                          {"gaussian_blur_sigma", "contrast_scale", "brightness_shift", "to_grayscale", "noise_sigma",
                           "rng_seed"});
                DegradationSpec s = c.degradation.value_or(DegradationSpec{});
                read(*d, "/synth/degrade", "gaussian_blur_sigma", s.gaussian_blur_sigma);
                read(*d, "/synth/degrade", "contrast_scale", s.contrast_scale);
                read(*d, "/synth/degrade", "brightness_shift", s.brightness_shift);
                read(*d, "/synth/degrade", "to_grayscale", s.to_grayscale);
                read(*d, "/synth/degrade", "noise_sigma", s.noise_sigma);
                read(*d, "/synth/degrade", "rng_seed", s.rng_seed);
                c.degradation = s;
            }
        }
    }
    std::string out_dir;
    read(patch, "", "output_dir", out_dir);
    if (!out_dir.empty()) c.output_dir = out_dir;
    read(patch, "", "seed", c.seed);
    read(patch, "", "reproducible", c.reproducible);
    read(patch, "", "save_intermediates", c.save_intermediates);
    if (patch.contains("timeout_s")) {
        double s = 0;
        read(patch, "", "timeout_s", s);
        c.timeout_ms = static_cast<int>(s * 1000.0);
    }
    read(patch, "", "threads", c.threads);
}

json config_to_json(const PipelineConfig& c) {
    auto rgb = [](Rgb v) { return json::array({v.r, v.g, v.b}); };
    json j;
    j["calibration"] = {{"px_per_mm", c.calibration.px_per_mm},
                        {"mm_per_mv", c.calibration.mm_per_mv},
                        {"mm_per_s", c.calibration.mm_per_s}};
    j["preprocess"] = {{"sharpen_kernel", c.preprocess.sharpen_kernel.weights},
                       {"gaussian_sigma", c.preprocess.gaussian_sigma},
                       {"gaussian_kernel_size", c.preprocess.gaussian_kernel_size}};
    j["threshold"] = {{"window", c.threshold.window},
                      {"bias", c.threshold.bias},
                      {"min_component_area", c.threshold.min_component_area},
                      {"red_tolerance", c.threshold.red_tolerance}};
    static constexpr const char* kDet[] = {"builtin", "external", "annotations"};
    j["detector"] = {{"kind", kDet[static_cast<int>(c.detector.kind)]},
                     {"command", c.detector.command},
                     {"annotations", c.detector.annotations.string()},
                     {"expected_count", c.detector_options.expected_count}};
    j["binarizer"] = {{"kind", c.binarizer.kind == BinarizerChoice::Kind::Builtin ? "builtin" : "external"},
                      {"command", c.binarizer.command}};
    j["scan"] = {{"max_gap", c.scan.max_gap ? json(*c.scan.max_gap) : json(nullptr)},
                 {"resample_period", c.scan.resample_period ? json(*c.scan.resample_period) : json(nullptr)}};
    const auto& l = c.layout;
    j["layout"] = {{"rows", l.rows},
                   {"cols", l.cols},
                   {"page_width", l.page_width},
                   {"page_height", l.page_height},
                   {"margin", l.margin},
                   {"col_gap", l.col_gap},
                   {"row_gap", l.row_gap},
                   {"trace_inset", l.trace_inset},
                   {"draw_grid", l.draw_grid},
                   {"minor_thickness", l.minor_thickness},
                   {"major_thickness", l.major_thickness},
                   {"major_every", l.major_every},
                   {"paper", rgb(l.paper)},
                   {"minor_color", rgb(l.minor_color)},
                   {"major_color", rgb(l.major_color)},
                   {"trace_color", rgb(l.trace_color)},
                   {"trace_thickness", l.trace_thickness},
                   {"lead_order", l.lead_order}};
    json degrade = nullptr;
    if (c.degradation) {
        const auto& d = *c.degradation;
        degrade = {{"gaussian_blur_sigma", d.gaussian_blur_sigma},
                   {"contrast_scale", d.contrast_scale},
                   {"brightness_shift", d.brightness_shift},
                   {"to_grayscale", d.to_grayscale},
                   {"noise_sigma", d.noise_sigma},
                   {"rng_seed", d.rng_seed}};
    }
    j["synth"] = {{"sample_period", c.sample_period}, {"lead_duration", c.lead_duration}, {"degrade", degrade}};
    j["output_dir"] = c.output_dir.string();
    j["seed"] = c.seed;
    j["reproducible"] = c.reproducible;
    j["save_intermediates"] = c.save_intermediates;
    j["timeout_s"] = c.timeout_ms / 1000.0;
    j["threads"] = c.threads;
    return j;
}

void PipelineConfig::validate() const {
    calibration.validate();
    preprocess.validate();
    threshold.validate();
    layout.validate();
    if (detector.kind == DetectorChoice::Kind::External && detector.command.find("{input}") == std::string::npos)
        fail(ErrorCode::InvalidArgument, "external detector needs a command containing {input}");
    if (detector.kind == DetectorChoice::Kind::Annotations && detector.annotations.empty())
        fail(ErrorCode::InvalidArgument, "annotations detector needs an annotation file");
    if (binarizer.kind == BinarizerChoice::Kind::External &&
        (binarizer.command.find("{input}") == std::string::npos ||
         binarizer.command.find("{output}") == std::string::npos))
        fail(ErrorCode::InvalidArgument, "external binarizer needs a command containing {input} and {output}");
    if (scan.max_gap && *scan.max_gap < 0) fail(ErrorCode::InvalidArgument, "scan max_gap must be >= 0");
    if (scan.resample_period && !(*scan.resample_period > 0.0))
        fail(ErrorCode::InvalidArgument, "resample period must be positive");
    if (!(sample_period > 0.0) || !(lead_duration > 0.0))
        fail(ErrorCode::InvalidArgument, "synthesis sample period and lead duration must be positive");
    if (degradation) degradation->validate();
    if (timeout_ms <= 0) fail(ErrorCode::InvalidArgument, "timeout must be positive");
    if (threads < 0) fail(ErrorCode::InvalidArgument, "threads must be >= 0");
}

}  // namespace ecgdigi
