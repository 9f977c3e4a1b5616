#pragma once

#include "ecgdigi/core.hpp"

#include <optional>
#include <vector>

namespace ecgdigi {

/// Per-column result of vertical scanning.
struct ColumnTrace {
    std::vector<std::optional<double>> rows;  // representative row, absent when the column is empty
    std::vector<int> run_counts;              // maximal vertical foreground runs

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t present() const noexcept;
};

/// Representative row = lower median of the column's foreground rows.
ColumnTrace scan_columns(const BinaryImage& mask);

/// Linearly bridges interior gaps of at most `max_gap` columns and clamps
/// leading/trailing gaps to the nearest present value. Longer interior gaps
/// stay absent. Throws when the trace has no present column.
ColumnTrace fill_gaps(const ColumnTrace& trace, int max_gap);

/// Most frequent rounded row; ties go to the larger (lower on the page) row.
int estimate_baseline(const ColumnTrace& trace);

/// One sample per column. Every column must be present.
LeadSignal trace_to_signal(const ColumnTrace& trace, const Calibration& calibration, double baseline_row,
                           const std::string& lead_name);

/// Linear interpolation onto k * target_period for k = 0..floor(duration / target_period).
LeadSignal resample(const LeadSignal& signal, double target_period);

struct ScanOptions {
    std::optional<int> max_gap;  // columns; defaults to 0.02 s worth
    std::optional<double> resample_period;
};

struct ScanReport {
    int baseline_row = 0;
    int first_column = 0;     // first inked column of the crop
    int filled_columns = 0;   // bridged by interpolation
    int long_gap_columns = 0; // left at baseline
    int multi_run_columns = 0;
};

/// Default gap bridge: round(0.02 s) of columns.
int default_max_gap(const Calibration& calibration);

/// Full scanning stage for one lead mask. The signal starts at the first
/// inked column; columns in gaps longer than max_gap are set to 0 mV.
LeadSignal scan_lead(const BinaryImage& mask, const Calibration& calibration, const std::string& lead_name,
                     const ScanOptions& options = {}, ScanReport* report = nullptr);

}  // namespace ecgdigi
