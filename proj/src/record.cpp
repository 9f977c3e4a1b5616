#include "ecgdigi/record.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

namespace ecgdigi {

using ordered_json = nlohmann::ordered_json;

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string record_to_json(const EcgRecord& record) {
    ordered_json leads = ordered_json::array();
    for (const auto& l : record.leads)
        leads.push_back({{"name", l.lead_name}, {"sample_period_s", l.sample_period}, {"samples_mv", l.samples}});
    ordered_json doc{
        {"version", kRecordSchemaVersion},
        {"source_image_id", record.source_image_id},
        {"created_at", record.created_at},
        {"pipeline_version", record.pipeline_version},
        {"calibration",
         {{"px_per_mm", record.calibration.px_per_mm},
          {"mm_per_mv", record.calibration.mm_per_mv},
          {"mm_per_s", record.calibration.mm_per_s}}},
        {"leads", leads},
    };
    return doc.dump(2) + "\n";
}

namespace {

[[noreturn]] void schema_error(const std::string& pointer, const std::string& what) {
    fail(ErrorCode::Format, "record schema error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

const ordered_json& member(const ordered_json& obj, const std::string& pointer, const char* key) {
    if (!obj.is_object()) schema_error(pointer, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) schema_error(pointer + "/" + key, "missing");
    return *it;
}

double number(const ordered_json& obj, const std::string& pointer, const char* key) {
    const auto& v = member(obj, pointer, key);
    if (!v.is_number()) schema_error(pointer + "/" + key, "expected a number");
    return v.get<double>();
}

std::string text(const ordered_json& obj, const std::string& pointer, const char* key) {
    const auto& v = member(obj, pointer, key);
    if (!v.is_string()) schema_error(pointer + "/" + key, "expected a string");
    return v.get<std::string>();
}

}  // namespace

EcgRecord record_from_json(const std::string& body) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::Format, std::string("record is not valid JSON: ") + e.what());
    }
    const auto& version = member(doc, "", "version");
    if (!version.is_number_integer() || version.get<int>() != kRecordSchemaVersion)
        schema_error("/version", "unsupported schema version");

    EcgRecord rec;
    rec.source_image_id = text(doc, "", "source_image_id");
    rec.created_at = text(doc, "", "created_at");
    rec.pipeline_version = text(doc, "", "pipeline_version");
    const auto& cal = member(doc, "", "calibration");
    rec.calibration.px_per_mm = number(cal, "/calibration", "px_per_mm");
    rec.calibration.mm_per_mv = number(cal, "/calibration", "mm_per_mv");
    rec.calibration.mm_per_s = number(cal, "/calibration", "mm_per_s");

    const auto& leads = member(doc, "", "leads");
    if (!leads.is_array()) schema_error("/leads", "expected an array");
    for (std::size_t i = 0; i < leads.size(); ++i) {
        const std::string p = "/leads/" + std::to_string(i);
        LeadSignal l;
        l.lead_name = text(leads[i], p, "name");
        if (!lead_index(l.lead_name)) schema_error(p + "/name", "unknown lead '" + l.lead_name + "'");
        l.sample_period = number(leads[i], p, "sample_period_s");
        const auto& samples = member(leads[i], p, "samples_mv");
        if (!samples.is_array()) schema_error(p + "/samples_mv", "expected an array");
        l.samples.reserve(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (!samples[k].is_number()) schema_error(p + "/samples_mv/" + std::to_string(k), "expected a number");
            l.samples.push_back(samples[k].get<double>());
        }
        try {
            l.validate();
        } catch (const Error& e) {
            schema_error(p, e.what());
        }
        rec.leads.push_back(std::move(l));
    }
    try {
        rec.validate();
    } catch (const Error& e) {
        schema_error("", e.what());
    }
    return rec;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << body;
    if (!out) fail(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EcgRecord read_record(const std::filesystem::path& path) {
    try {
        return record_from_json(read_text(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        fail(e.code(), path.string() + ": " + e.what());
    }
}

void write_record(const std::filesystem::path& path, const EcgRecord& record) {
    write_text(path, record_to_json(record));
}

std::string signal_to_csv(const LeadSignal& signal) {
    std::string out = "t_seconds,millivolts\n";
    for (std::size_t k = 0; k < signal.samples.size(); ++k) {
        out += format_double(static_cast<double>(k) * signal.sample_period);
        out += ',';
        out += format_double(signal.samples[k]);
        out += '\n';
    }
    return out;
}

LeadSignal signal_from_csv(const std::string& body, const std::string& lead_name) {
    std::istringstream in(body);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t_seconds,millivolts", 0) != 0)
        fail(ErrorCode::Format, "CSV header must be 't_seconds,millivolts'");
    LeadSignal sig;
    sig.lead_name = lead_name;
    std::vector<double> times;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        double t = 0, v = 0;
        const bool ok = comma != std::string::npos &&
                        std::from_chars(line.data(), line.data() + comma, t).ec == std::errc{} &&
                        std::from_chars(line.data() + comma + 1, line.data() + line.size(), v).ec == std::errc{};
        if (!ok) fail(ErrorCode::Format, "CSV line " + std::to_string(line_no) + ": expected 't,mv'");
        times.push_back(t);
        sig.samples.push_back(v);
    }
    if (times.size() < 2) fail(ErrorCode::Format, "CSV needs at least two samples");
    sig.sample_period = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    sig.validate();
    return sig;
}

}  // namespace ecgdigi
