#include "ecgdigi/scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ecgdigi {

std::size_t ColumnTrace::present() const noexcept {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.has_value(); }));
}

ColumnTrace scan_columns(const BinaryImage& mask) {
    if (mask.size() == 0) fail(ErrorCode::InvalidArgument, "cannot scan an empty mask");
    ColumnTrace out;
    out.rows.resize(mask.width());
    out.run_counts.assign(mask.width(), 0);
    std::vector<int> fg;
    fg.reserve(mask.height());
    for (int x = 0; x < mask.width(); ++x) {
        fg.clear();
        bool prev = false;
        for (int y = 0; y < mask.height(); ++y) {
            const bool on = mask.at(x, y);
            if (on) fg.push_back(y);
            if (on && !prev) ++out.run_counts[x];
            prev = on;
        }
        if (!fg.empty()) out.rows[x] = fg[(fg.size() - 1) / 2];
    }
    return out;
}

ColumnTrace fill_gaps(const ColumnTrace& trace, int max_gap) {
    if (max_gap < 0) fail(ErrorCode::InvalidArgument, "max_gap must be >= 0");
    const auto n = static_cast<int>(trace.size());
    int first = -1, last = -1;
    for (int i = 0; i < n; ++i)
        if (trace.rows[i]) {
            if (first < 0) first = i;
            last = i;
        }
    if (first < 0) fail(ErrorCode::StageFailure, "no signal found");

    ColumnTrace out = trace;
    for (int i = 0; i < first; ++i) out.rows[i] = trace.rows[first];
    for (int i = last + 1; i < n; ++i) out.rows[i] = trace.rows[last];
    int prev = first;
    for (int i = first + 1; i <= last; ++i) {
        if (!trace.rows[i]) continue;
        const int gap = i - prev - 1;
        if (gap > 0 && gap <= max_gap) {
            const double a = *trace.rows[prev], b = *trace.rows[i];
            for (int k = prev + 1; k < i; ++k) out.rows[k] = a + (b - a) * (k - prev) / (i - prev);
        }
        prev = i;
    }
    return out;
}

int estimate_baseline(const ColumnTrace& trace) {
    std::map<long, int> freq;
    for (const auto& r : trace.rows)
        if (r) ++freq[std::lround(*r)];
    if (freq.empty()) fail(ErrorCode::StageFailure, "no signal found");
    long best = 0;
    int best_count = -1;
    for (const auto& [row, count] : freq)
        if (count >= best_count) {  // ascending rows, so >= keeps the larger row on ties
            best = row;
            best_count = count;
        }
    return static_cast<int>(best);
}

LeadSignal trace_to_signal(const ColumnTrace& trace, const Calibration& calibration, double baseline_row,
                           const std::string& lead_name) {
    calibration.validate();
    LeadSignal out;
    out.lead_name = lead_name;
    out.sample_period = 1.0 / calibration.px_per_s();
    out.samples.reserve(trace.size());
    for (const auto& r : trace.rows) {
        if (!r) fail(ErrorCode::InvalidArgument, "trace still has absent columns");
        out.samples.push_back(calibration.row_to_mv(baseline_row, *r));
    }
    return out;
}

LeadSignal resample(const LeadSignal& signal, double target_period) {
    if (!(target_period > 0.0)) fail(ErrorCode::InvalidArgument, "target period must be positive");
    if (signal.samples.empty()) fail(ErrorCode::InvalidArgument, "cannot resample an empty signal");
    if (target_period == signal.sample_period) return signal;

    const double duration = signal.duration();
    const auto n = static_cast<std::size_t>(std::floor(duration / target_period + 1e-9)) + 1;
    const std::size_t last = signal.samples.size() - 1;
    LeadSignal out;
    out.lead_name = signal.lead_name;
    out.sample_period = target_period;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = static_cast<double>(k) * target_period / signal.sample_period;
        if (f >= static_cast<double>(last)) {
            out.samples[k] = signal.samples[last];
            continue;
        }
        const auto i = static_cast<std::size_t>(f);
        const double u = f - static_cast<double>(i);
        out.samples[k] = signal.samples[i] * (1.0 - u) + signal.samples[i + 1] * u;
    }
    return out;
}

int default_max_gap(const Calibration& calibration) {
    return static_cast<int>(std::lround(0.02 * calibration.px_per_s()));
}

LeadSignal scan_lead(const BinaryImage& mask, const Calibration& calibration, const std::string& lead_name,
                     const ScanOptions& options, ScanReport* report) {
    const ColumnTrace raw = scan_columns(mask);
    int first = -1, last = -1;
    for (int i = 0; i < static_cast<int>(raw.size()); ++i)
        if (raw.rows[i]) {
            if (first < 0) first = i;
            last = i;
        }
    if (first < 0) fail(ErrorCode::StageFailure, "lead " + lead_name + ": no signal found");
    if (last == first) fail(ErrorCode::StageFailure, "lead " + lead_name + ": trace is a single column");

    ColumnTrace trimmed;
    trimmed.rows.assign(raw.rows.begin() + first, raw.rows.begin() + last + 1);
    trimmed.run_counts.assign(raw.run_counts.begin() + first, raw.run_counts.begin() + last + 1);

    const int baseline = estimate_baseline(trimmed);
    const int max_gap = options.max_gap.value_or(default_max_gap(calibration));
    ColumnTrace filled = fill_gaps(trimmed, max_gap);

    ScanReport rep;
    rep.baseline_row = baseline;
    rep.first_column = first;
    for (std::size_t i = 0; i < filled.size(); ++i) {
        if (!trimmed.rows[i] && filled.rows[i]) ++rep.filled_columns;
        if (!filled.rows[i]) {
            filled.rows[i] = static_cast<double>(baseline);
            ++rep.long_gap_columns;
        }
        if (trimmed.run_counts[i] > 1) ++rep.multi_run_columns;
    }
    if (report) *report = rep;

    LeadSignal sig = trace_to_signal(filled, calibration, baseline, lead_name);
    if (options.resample_period) sig = resample(sig, *options.resample_period);
    return sig;
}

}  // namespace ecgdigi
