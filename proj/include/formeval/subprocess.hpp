#pragma once

#include <cstddef>
#include <string>

namespace formeval {

struct SubprocessResult {
    int exit_code = -1;       // meaningful when the command exited normally
    bool timed_out = false;   // deadline hit; the process group was killed
    bool signaled = false;    // terminated by a signal (including our kill)
    int term_signal = 0;
    std::string stdout_text;  // capped at max_capture_bytes
    std::string stderr_text;
};

// Runs `sh -c command` in its own process group with stdin from /dev/null,
// capturing stdout/stderr. When the deadline passes the whole group gets
// SIGKILL so stray grandchildren cannot outlive the call.
SubprocessResult run_shell_command(const std::string& command, double timeout_seconds,
                                   std::size_t max_capture_bytes = 1 << 20);

// Wraps text in single quotes, POSIX-escaping embedded quotes, so it can be
// spliced into a shell command.
std::string shell_quote(const std::string& text);

} // namespace formeval
