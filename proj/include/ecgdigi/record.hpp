#pragma once

#include "ecgdigi/core.hpp"

#include <filesystem>
#include <string>

namespace ecgdigi {

inline constexpr int kRecordSchemaVersion = 1;

/// Pinned timestamp used by reproducible runs.
inline constexpr const char* kReproducibleTimestamp = "1970-01-01T00:00:00Z";

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

/// Serializes with shortest round-trip number formatting, two-space indent.
std::string record_to_json(const EcgRecord& record);

/// Parses and validates; schema errors name the offending JSON pointer.
EcgRecord record_from_json(const std::string& text);

EcgRecord read_record(const std::filesystem::path& path);
void write_record(const std::filesystem::path& path, const EcgRecord& record);

/// `t_seconds,millivolts` with a header row.
std::string signal_to_csv(const LeadSignal& signal);
LeadSignal signal_from_csv(const std::string& text, const std::string& lead_name);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace ecgdigi
