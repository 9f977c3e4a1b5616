#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

namespace ecgdigi {

struct CommandResult {
    int exit_status = -1;  // -1 when killed by a signal or timed out
    bool timed_out = false;
    std::string out;
    std::string err;
};

/// Runs `command` through /bin/sh, capturing both output streams.
CommandResult run_command(const std::string& command, std::chrono::milliseconds timeout);

/// POSIX single-quote escaping.
std::string shell_quote(const std::string& value);

/// Replaces every `{key}` with the shell-quoted value.
std::string expand_template(const std::string& templ, const std::map<std::string, std::string>& values);

/// ECGDIGI_TMPDIR if set, otherwise the system temp directory.
std::filesystem::path scratch_directory();

/// Fresh, process-unique directory under scratch_directory(). Removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag);
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace ecgdigi
