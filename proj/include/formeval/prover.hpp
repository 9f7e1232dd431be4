#pragma once

#include <filesystem>
#include <string>

#include "formeval/core.hpp"

namespace formeval {

// External validity checker driven by a shell command template. The
// template must contain the placeholder {file} exactly once; it is replaced
// with the (quoted) path of a scratch file holding the candidate code, and
// the command counts the candidate as valid iff it exits with status 0.
struct ProverConfig {
    std::string command_template;
    double timeout_seconds = 300.0;
    // Language the command expects; determines the scratch file suffix.
    FormalLanguage language = FormalLanguage::isabelle_hol();
    // Where scratch directories are created; empty means the system temp dir.
    std::filesystem::path workdir;
};

struct ValidityResult {
    bool valid = false;
    bool timed_out = false;          // deadline hit (implies valid == false)
    int exit_code = -1;              // -1 when the process did not exit normally
    double elapsed_seconds = 0.0;
    std::string diagnostics;         // truncated stdout/stderr of the command
};

// Writes the code to a scratch file (suffix .thy for Isabelle/HOL, .lean for
// Lean4, .txt otherwise), runs the prover command on it, and interprets the
// outcome. Exit statuses 126/127 mean the command itself could not be run
// and raise ConfigError; a timeout or non-zero exit is an invalid verdict,
// not an error.
ValidityResult check_validity(const ProverConfig& config, const std::string& code);

// Same, but checks code written in `language` instead of config.language,
// for corpora that mix formal systems under one language-agnostic command.
ValidityResult check_validity(const ProverConfig& config, const std::string& code,
                              const FormalLanguage& language);

// Materializes a self-contained mock prover script under scratch_dir and
// returns a ProverConfig invoking it. Modes:
//   accept          always exit 0
//   reject          always exit 1
//   marker          exit 0 iff the file contains the literal token VALID
//   sleep[:secs]    sleep (default 5s) then exit 0, for timeout tests
ProverConfig make_mock_prover(const std::filesystem::path& scratch_dir,
                              const std::string& mode_spec);

} // namespace formeval
