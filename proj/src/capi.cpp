#include "ecgdigi/ecgdigi.h"

#include "ecgdigi/image_io.hpp"
#include "ecgdigi/pipeline.hpp"
#include "ecgdigi/record.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>

struct ecgd_config {
    ecgdigi::PipelineConfig config;
};

struct ecgd_record {
    ecgdigi::EcgRecord record;
};

namespace {

thread_local std::string last_error;

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void give(char** out, const std::string& s) {
    if (out) *out = dup(s);
}

template <typename F>
ecgd_status guarded(F&& body) {
    last_error.clear();
    try {
        return body();
    } catch (const ecgdigi::Error& e) {
        last_error = e.what();
        return static_cast<ecgd_status>(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return ECGD_IO;
    } catch (const nlohmann::json::exception& e) {
        last_error = e.what();
        return ECGD_FORMAT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return ECGD_STAGE_FAILURE;
    } catch (const std::exception& e) {
        last_error = e.what();
        return ECGD_STAGE_FAILURE;
    }
}

ecgd_status null_arg(const char* what) {
    last_error = std::string(what) + " must not be NULL";
    return ECGD_INVALID_ARGUMENT;
}

const ecgdigi::LeadSignal* lead_at(const ecgd_record* r, size_t i) {
    if (!r || i >= r->record.leads.size()) return nullptr;
    return &r->record.leads[i];
}

}  // namespace

extern "C" {

const char* ecgd_version(void) { return ecgdigi::library_version().data(); }

const char* ecgd_last_error(void) { return last_error.c_str(); }

void ecgd_string_free(char* s) { std::free(s); }

ecgd_status ecgd_config_create(ecgd_config** out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new ecgd_config{};
        return ECGD_OK;
    });
}

void ecgd_config_free(ecgd_config* config) { delete config; }

ecgd_status ecgd_config_merge_json(ecgd_config* config, const char* json) {
    if (!config || !json) return null_arg("config and json");
    return guarded([&] {
        nlohmann::json patch;
        try {
            patch = nlohmann::json::parse(json);
        } catch (const nlohmann::json::parse_error& e) {
            ecgdigi::fail(ecgdigi::ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
        }
        ecgdigi::PipelineConfig next = config->config;
        ecgdigi::apply_config_json(next, patch);
        next.validate();
        config->config = std::move(next);
        return ECGD_OK;
    });
}

ecgd_status ecgd_config_to_json(const ecgd_config* config, char** json) {
    if (!config || !json) return null_arg("config and json");
    return guarded([&] {
        give(json, ecgdigi::config_to_json(config->config).dump(2) + "\n");
        return ECGD_OK;
    });
}

ecgd_status ecgd_synth(const ecgd_config* config, int count) {
    if (!config) return null_arg("config");
    return guarded([&] {
        ecgdigi::synthesize_dataset(config->config, count);
        return ECGD_OK;
    });
}

ecgd_status ecgd_digitize(const ecgd_config* config, const char* page_path, ecgd_record** record,
                          char** diagnostics) {
    if (!config || !page_path) return null_arg("config and page_path");
    return guarded([&] {
        auto result = ecgdigi::digitize_to_disk(page_path, config->config);
        give(diagnostics, result.diagnostics_json());
        const auto status = static_cast<ecgd_status>(result.status());
        if (status == ECGD_NO_LEADS) last_error = "no leads found in '" + std::string(page_path) + "'";
        if (status == ECGD_PARTIAL_LEADS) {
            last_error = "missing leads:";
            for (const auto& l : result.missing_leads) last_error += " " + l;
        }
        if (record) *record = new ecgd_record{std::move(result.record)};
        return status;
    });
}

ecgd_status ecgd_detect(const ecgd_config* config, const char* page_path, char** lines, char** json) {
    if (!config || !page_path) return null_arg("config and page_path");
    return guarded([&] {
        const auto page = ecgdigi::read_png(page_path);
        const auto boxes = ecgdigi::run_detection(page_path, page, config->config);
        give(lines, ecgdigi::format_detections(boxes));
        give(json, ecgdigi::detections_to_json(boxes, page.width(), page.height()));
        if (boxes.empty()) {
            last_error = "no leads found in '" + std::string(page_path) + "'";
            return ECGD_NO_LEADS;
        }
        return ECGD_OK;
    });
}

ecgd_status ecgd_record_load(const char* path, ecgd_record** out) {
    if (!path || !out) return null_arg("path and out");
    return guarded([&] {
        *out = new ecgd_record{ecgdigi::read_record(path)};
        return ECGD_OK;
    });
}

ecgd_status ecgd_record_from_json(const char* json, ecgd_record** out) {
    if (!json || !out) return null_arg("json and out");
    return guarded([&] {
        *out = new ecgd_record{ecgdigi::record_from_json(json)};
        return ECGD_OK;
    });
}

ecgd_status ecgd_record_to_json(const ecgd_record* record, char** json) {
    if (!record || !json) return null_arg("record and json");
    return guarded([&] {
        give(json, ecgdigi::record_to_json(record->record));
        return ECGD_OK;
    });
}

void ecgd_record_free(ecgd_record* record) { delete record; }

size_t ecgd_record_lead_count(const ecgd_record* record) { return record ? record->record.leads.size() : 0; }

const char* ecgd_record_lead_name(const ecgd_record* record, size_t index) {
    const auto* l = lead_at(record, index);
    return l ? l->lead_name.c_str() : nullptr;
}

double ecgd_record_sample_period(const ecgd_record* record, size_t index) {
    const auto* l = lead_at(record, index);
    return l ? l->sample_period : 0.0;
}

size_t ecgd_record_sample_count(const ecgd_record* record, size_t index) {
    const auto* l = lead_at(record, index);
    return l ? l->samples.size() : 0;
}

const double* ecgd_record_samples(const ecgd_record* record, size_t index) {
    const auto* l = lead_at(record, index);
    return l ? l->samples.data() : nullptr;
}

ecgd_status ecgd_plot(const ecgd_record* record, char** svg) {
    if (!record || !svg) return null_arg("record and svg");
    return guarded([&] {
        give(svg, ecgdigi::render_svg(record->record));
        return ECGD_OK;
    });
}

ecgd_status ecgd_eval_detect(const char* detections_dir, const char* truths_dir, int frame_width, int frame_height,
                             const char* pages_dir, char** json, char** table) {
    if (!detections_dir || !truths_dir) return null_arg("detections_dir and truths_dir");
    return guarded([&] {
        if (frame_width <= 0 || frame_height <= 0)
            ecgdigi::fail(ecgdigi::ErrorCode::InvalidArgument, "frame size must be positive");
        std::optional<std::filesystem::path> pages;
        if (pages_dir) pages = pages_dir;
        const auto report =
            ecgdigi::evaluate_detection_dirs(detections_dir, truths_dir, {frame_width, frame_height}, pages);
        give(json, report.json);
        give(table, report.table);
        return ECGD_OK;
    });
}

ecgd_status ecgd_eval_binarize(const char* pred_dir, const char* truth_dir, char** json, char** table) {
    if (!pred_dir || !truth_dir) return null_arg("pred_dir and truth_dir");
    return guarded([&] {
        const auto report = ecgdigi::evaluate_mask_dirs(pred_dir, truth_dir);
        give(json, report.json);
        give(table, report.table);
        return ECGD_OK;
    });
}

}  // extern "C"
