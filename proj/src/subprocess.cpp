#include "ecgdigi/subprocess.hpp"

#include "ecgdigi/core.hpp"

#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace ecgdigi {

namespace {

struct Pipe {
    int fd[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fd, O_CLOEXEC) != 0) fail(ErrorCode::StageFailure, std::string("pipe: ") + std::strerror(errno));
    }
    ~Pipe() {
        for (int f : fd)
            if (f >= 0) ::close(f);
    }
    void close_end(int i) {
        if (fd[i] >= 0) ::close(fd[i]);
        fd[i] = -1;
    }
};

}  // namespace

CommandResult run_command(const std::string& command, std::chrono::milliseconds timeout) {
    Pipe out_pipe, err_pipe;
    const pid_t pid = ::fork();
    if (pid < 0) fail(ErrorCode::StageFailure, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(out_pipe.fd[1], STDOUT_FILENO);
        ::dup2(err_pipe.fd[1], STDERR_FILENO);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::setpgid(0, 0);
        const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
        ::execve("/bin/sh", const_cast<char* const*>(argv), environ);
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out_pipe.close_end(1);
    err_pipe.close_end(1);

    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    pollfd fds[2] = {{out_pipe.fd[0], POLLIN, 0}, {err_pipe.fd[0], POLLIN, 0}};
    std::string* sinks[2] = {&result.out, &result.err};
    int open_streams = 2;
    char buf[4096];
    while (open_streams > 0) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            break;
        }
        const int rc = ::poll(fds, 2, static_cast<int>(left.count()));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            const ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
            if (n > 0) {
                sinks[i]->append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || errno != EINTR) {
                fds[i].fd = -1;
                --open_streams;
            }
        }
    }
    if (result.timed_out) ::kill(-pid, SIGKILL);

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!result.timed_out && WIFEXITED(status)) result.exit_status = WEXITSTATUS(status);
    return result;
}

std::string shell_quote(const std::string& value) {
    std::string out = "'";
    for (char c : value) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += "'";
    return out;
}

std::string expand_template(const std::string& templ, const std::map<std::string, std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < templ.size();) {
        if (templ[i] == '{') {
            const auto close = templ.find('}', i);
            if (close != std::string::npos) {
                const auto it = values.find(templ.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += shell_quote(it->second);
                    i = close + 1;
                    continue;
                }
            }
        }
        out += templ[i++];
    }
    return out;
}

std::filesystem::path scratch_directory() {
    if (const char* env = std::getenv("ECGDIGI_TMPDIR"); env && *env) return env;
    return std::filesystem::temp_directory_path();
}

ScratchDir::ScratchDir(const std::string& tag) {
    static std::atomic<unsigned long> counter{0};
    const auto base = scratch_directory();
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    path_ = base / ("ecgdigi-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + tag);
    std::filesystem::create_directories(path_, ec);
    if (ec) fail(ErrorCode::Io, "cannot create scratch directory '" + path_.string() + "': " + ec.message());
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace ecgdigi
