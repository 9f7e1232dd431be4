#pragma once

#include <optional>
#include <string>

#include "formeval/core.hpp"
#include "formeval/criteria.hpp"

namespace formeval {

/// A fully rendered judge prompt.
struct RenderedPrompt {
    std::string text;
    std::string criterion_id;
    FormalLanguage language = FormalLanguage::isabelle_hol();
};

/// One binary judgment with its explanation, parsed from a judge response.
struct Verdict {
    int judgment = 0; // 0 or 1
    std::string explanation;
    std::string raw; // full model output the verdict was parsed from
    std::string criterion_id;
    int attempts = 1; // how many queries it took to obtain a parsable response
};

/// Result of parse_verdict: either a Verdict or a parse failure with a
/// reason. Parse failures are recoverable (the caller may re-query); they
/// are distinct from transport errors.
struct VerdictParse {
    std::optional<Verdict> verdict;
    std::string error;

    bool ok() const { return verdict.has_value(); }
};

/// Renders the judge prompt for one (criterion, language, statement, code).
/// The instruction template asks for an explanation followed by a binary
/// judgement, both wrapped between two lines of ten percent signs; the
/// statement and the candidate code are appended as two labeled blocks.
/// Rendering is pure: identical inputs yield byte-identical prompts.
/// Throws InputError on empty statement/code, ConfigError on a criterion
/// with no description.
RenderedPrompt render(const Criterion& criterion, const FormalLanguage& language,
                      const std::string& statement, const std::string& code);

/// Extracts the verdict from a raw judge response. Scans for the last block
/// wrapped between two lines of ten percent signs, takes the text after
/// "Explanation:" and the token after the last "Judgement:" line in that
/// block, and maps the token case-insensitively to true/false after trimming
/// surrounding non-alphanumerics ("True." parses, "maybe" does not).
/// Never throws on arbitrary text.
VerdictParse parse_verdict(const std::string& raw, const Criterion& criterion);

} // namespace formeval
