#include "formeval/prover.hpp"

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <vector>

#include "formeval/errors.hpp"
#include "formeval/subprocess.hpp"

namespace formeval {

namespace {

constexpr std::string_view kPlaceholder = "{file}";
constexpr std::size_t kDiagnosticsCap = 2000;

std::string capped(const std::string& text) {
    if (text.size() <= kDiagnosticsCap) return text;
    return text.substr(0, kDiagnosticsCap) + "\n...[truncated]";
}

std::string combine_diagnostics(const SubprocessResult& run) {
    std::string diagnostics;
    if (!run.stdout_text.empty()) diagnostics += "stdout:\n" + capped(run.stdout_text);
    if (!run.stderr_text.empty()) {
        if (!diagnostics.empty()) diagnostics += '\n';
        diagnostics += "stderr:\n" + capped(run.stderr_text);
    }
    return diagnostics;
}

const char* scratch_extension(const FormalLanguage& language) {
    switch (language.kind()) {
    case FormalLanguage::Kind::IsabelleHOL: return ".thy";
    case FormalLanguage::Kind::Lean4: return ".lean";
    case FormalLanguage::Kind::Other: return ".txt";
    }
    return ".txt";
}

std::filesystem::path make_scratch_dir(const std::filesystem::path& workdir) {
    std::filesystem::path base = workdir;
    if (base.empty()) {
        base = std::filesystem::temp_directory_path();
    } else {
        std::error_code ec;
        std::filesystem::create_directories(base, ec);
        if (ec) {
            throw ConfigError("cannot create prover workdir " + base.string() + ": " +
                              ec.message());
        }
    }
    std::string pattern = (base / "formeval-prover-XXXXXX").string();
    std::vector<char> buffer(pattern.begin(), pattern.end());
    buffer.push_back('\0');
    if (mkdtemp(buffer.data()) == nullptr) {
        throw ConfigError(std::string("cannot create prover scratch directory: ") +
                          std::strerror(errno));
    }
    return std::filesystem::path(buffer.data());
}

} // namespace

ValidityResult check_validity(const ProverConfig& config, const std::string& code) {
    return check_validity(config, code, config.language);
}

ValidityResult check_validity(const ProverConfig& config, const std::string& code,
                              const FormalLanguage& language) {
    const auto first = config.command_template.find(kPlaceholder);
    if (first == std::string::npos) {
        throw ConfigError("prover command template must contain the {file} placeholder");
    }
    if (config.command_template.find(kPlaceholder, first + kPlaceholder.size()) !=
        std::string::npos) {
        throw ConfigError("prover command template must contain {file} exactly once");
    }
    if (!(config.timeout_seconds > 0.0)) {
        throw ConfigError("prover timeout must be positive");
    }
    if (code.empty()) throw InputError("candidate code must not be empty");

    const std::filesystem::path scratch = make_scratch_dir(config.workdir);
    struct ScratchGuard {
        std::filesystem::path dir;
        ~ScratchGuard() {
            std::error_code ec;
            std::filesystem::remove_all(dir, ec);
        }
    } guard{scratch};

    const std::filesystem::path file =
        scratch / (std::string("candidate") + scratch_extension(language));
    {
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write scratch file " + file.string());
        out.write(code.data(), static_cast<std::streamsize>(code.size()));
        out.flush();
        if (!out) throw ConfigError("cannot write scratch file " + file.string());
    }

    std::string command = config.command_template;
    command.replace(first, kPlaceholder.size(), shell_quote(file.string()));

    const auto started = std::chrono::steady_clock::now();
    const SubprocessResult run = run_shell_command(command, config.timeout_seconds);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

    ValidityResult result;
    result.elapsed_seconds = elapsed.count();
    result.timed_out = run.timed_out;
    result.exit_code = run.signaled ? -1 : run.exit_code;
    result.diagnostics = combine_diagnostics(run);
    if (run.timed_out) {
        if (!result.diagnostics.empty()) result.diagnostics += '\n';
        result.diagnostics += "prover timed out after " +
                              std::to_string(config.timeout_seconds) + "s";
    } else if (run.signaled) {
        if (!result.diagnostics.empty()) result.diagnostics += '\n';
        result.diagnostics += "prover terminated by signal " + std::to_string(run.term_signal);
    } else if (run.exit_code == 126 || run.exit_code == 127) {
        // Shell convention: the command itself was not found / not runnable.
        throw ConfigError("prover command could not be run (exit " +
                          std::to_string(run.exit_code) + "): " + result.diagnostics);
    }
    result.valid = !run.timed_out && !run.signaled && run.exit_code == 0;
    return result;
}

ProverConfig make_mock_prover(const std::filesystem::path& scratch_dir,
                              const std::string& mode_spec) {
    std::string mode = mode_spec;
    double sleep_seconds = 5.0;
    if (const auto colon = mode_spec.find(':'); colon != std::string::npos) {
        mode = mode_spec.substr(0, colon);
        const std::string arg = mode_spec.substr(colon + 1);
        try {
            std::size_t used = 0;
            sleep_seconds = std::stod(arg, &used);
            if (used != arg.size() || !(sleep_seconds > 0.0)) throw std::invalid_argument(arg);
        } catch (const std::exception&) {
            throw ConfigError("mock prover: cannot parse sleep duration '" + arg + "'");
        }
        if (mode != "sleep") {
            throw ConfigError("mock prover: only the sleep mode takes an argument");
        }
    }

    std::string script = "#!/bin/sh\n# Mock theorem prover for tests and demos.\n";
    if (mode == "accept") {
        script += "exit 0\n";
    } else if (mode == "reject") {
        script += "echo \"mock prover: rejecting $1\" >&2\nexit 1\n";
    } else if (mode == "marker") {
        script += "if grep -q VALID \"$1\"; then\n";
        script += "    exit 0\n";
        script += "fi\n";
        script += "echo \"mock prover: no VALID marker in $1\" >&2\nexit 1\n";
    } else if (mode == "sleep") {
        script += "sleep " + std::to_string(sleep_seconds) + "\nexit 0\n";
    } else {
        throw ConfigError("mock prover: unknown mode '" + mode +
                          "' (expected accept, reject, marker, or sleep[:secs])");
    }

    std::error_code ec;
    std::filesystem::create_directories(scratch_dir, ec);
    if (ec) {
        throw ConfigError("cannot create mock prover directory " + scratch_dir.string() + ": " +
                          ec.message());
    }
    const std::filesystem::path path = scratch_dir / "mock_prover.sh";
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write mock prover script " + path.string());
        out << script;
    }
    std::filesystem::permissions(path,
                                 std::filesystem::perms::owner_all |
                                     std::filesystem::perms::group_read |
                                     std::filesystem::perms::group_exec |
                                     std::filesystem::perms::others_read |
                                     std::filesystem::perms::others_exec,
                                 ec);
    if (ec) throw ConfigError("cannot mark mock prover executable: " + ec.message());

    ProverConfig config;
    config.command_template = shell_quote(path.string()) + " {file}";
    return config;
}

} // namespace formeval
