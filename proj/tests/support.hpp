#pragma once

#include "ecgdigi/core.hpp"
#include "ecgdigi/pipeline.hpp"
#include "ecgdigi/synthgen.hpp"


#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>

namespace testing_support {

/// Fresh directory removed at scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ecgdigi-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Low-resolution page settings that keep tests fast.
inline ecgdigi::PipelineConfig small_config(double px_per_mm = 4.0) {
    ecgdigi::PipelineConfig c;
    c.calibration.px_per_mm = px_per_mm;
    c.layout = ecgdigi::PageLayout::for_resolution(px_per_mm);
    c.sample_period = 1.0 / c.calibration.px_per_s() / 2.0;
    return c;
}

inline ecgdigi::SynthOptions synth_options(const ecgdigi::PipelineConfig& c) {
    return {c.calibration, c.layout, c.sample_period, c.lead_duration};
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
