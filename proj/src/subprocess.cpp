#include "formeval/subprocess.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "formeval/errors.hpp"

namespace formeval {

std::string shell_quote(const std::string& text) {
    std::string quoted = "'";
    for (char c : text) {
        if (c == '\'') {
            quoted += "'\\''";
        } else {
            quoted += c;
        }
    }
    quoted += '\'';
    return quoted;
}

namespace {

struct Stream {
    int fd = -1;
    std::string* sink = nullptr;
    bool open = false;
};

void append_capped(std::string& sink, const char* data, std::size_t size, std::size_t cap) {
    if (sink.size() >= cap) return;
    sink.append(data, std::min(size, cap - sink.size()));
}

} // namespace

SubprocessResult run_shell_command(const std::string& command, double timeout_seconds,
                                   std::size_t max_capture_bytes) {
    if (!(timeout_seconds > 0.0)) throw InputError("subprocess timeout must be positive");

    int out_pipe[2];
    int err_pipe[2];
    if (pipe(out_pipe) != 0) {
        throw ConfigError(std::string("pipe() failed: ") + std::strerror(errno));
    }
    if (pipe(err_pipe) != 0) {
        const int saved = errno;
        close(out_pipe[0]);
        close(out_pipe[1]);
        throw ConfigError(std::string("pipe() failed: ") + std::strerror(saved));
    }

    const pid_t pid = fork();
    if (pid < 0) {
        const int saved = errno;
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        throw ConfigError(std::string("fork() failed: ") + std::strerror(saved));
    }

    if (pid == 0) {
        setpgid(0, 0);
        const int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            dup2(devnull, STDIN_FILENO);
            close(devnull);
        }
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    // Both sides set the group to close the startup race; failures are
    // harmless (the child may already have exec'd).
    setpgid(pid, pid);
    close(out_pipe[1]);
    close(err_pipe[1]);

    SubprocessResult result;
    Stream streams[2] = {{out_pipe[0], &result.stdout_text, true},
                         {err_pipe[0], &result.stderr_text, true}};

    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_seconds);
    bool killed = false;
    int quiet_polls_after_kill = 0;

    auto kill_group = [&]() {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
        killed = true;
    };

    while (streams[0].open || streams[1].open) {
        pollfd fds[2];
        nfds_t nfds = 0;
        for (Stream& stream : streams) {
            if (stream.open) fds[nfds++] = {stream.fd, POLLIN, 0};
        }

        int wait_ms = 100;
        if (!killed) {
            const auto remaining = deadline - Clock::now();
            if (remaining <= std::chrono::nanoseconds::zero()) {
                result.timed_out = true;
                kill_group();
            } else {
                const auto ms =
                    std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count();
                wait_ms = static_cast<int>(std::min<long long>(ms + 1, 1000));
            }
        }

        const int rc = poll(fds, nfds, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            if (killed && ++quiet_polls_after_kill > 20) break;  // escaped fd holder
            continue;
        }

        nfds_t slot = 0;
        for (Stream& stream : streams) {
            if (!stream.open) continue;
            const pollfd& entry = fds[slot++];
            if ((entry.revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
            char buffer[4096];
            const ssize_t got = read(stream.fd, buffer, sizeof buffer);
            if (got > 0) {
                append_capped(*stream.sink, buffer, static_cast<std::size_t>(got),
                              max_capture_bytes);
            } else if (got == 0 || (got < 0 && errno != EINTR && errno != EAGAIN)) {
                close(stream.fd);
                stream.open = false;
            }
        }
    }
    for (Stream& stream : streams) {
        if (stream.open) close(stream.fd);
    }

    // Reap the child, enforcing the deadline even when it closed its pipes
    // early and kept running.
    std::optional<Clock::time_point> kill_time;
    if (killed) kill_time = Clock::now();
    for (;;) {
        int status = 0;
        const pid_t reaped = waitpid(pid, &status, WNOHANG);
        if (reaped == pid) {
            if (WIFEXITED(status)) {
                result.exit_code = WEXITSTATUS(status);
            } else if (WIFSIGNALED(status)) {
                result.signaled = true;
                result.term_signal = WTERMSIG(status);
            }
            break;
        }
        if (reaped < 0) break;  // ECHILD: nothing left to reap
        const auto now = Clock::now();
        if (!killed && now >= deadline) {
            result.timed_out = true;
            kill_group();
            kill_time = now;
        }
        if (killed && kill_time && now - *kill_time > std::chrono::seconds(5)) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return result;
}

} // namespace formeval
