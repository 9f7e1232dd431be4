#include "formeval/prompts.hpp"

#include <algorithm>
#include <cctype>

namespace formeval {

namespace {

// Instruction template. {formal_language} and {aspect_description} are the
// substitution slots; the wrapper below the instructions is what
// parse_verdict looks for.
constexpr std::string_view kTemplate =
    "You are an expert in formal language {formal_language}.\n"
    "You will be given a mathematical statement written in natural language and LaTeX "
    "symbols.\n"
    "You will also be given a formal code which attempted to describe the given mathematical "
    "statement in {formal_language}.\n"
    "Your task is to evaluate a specific aspect of the formal code.\n"
    "The description of the aspect is: {aspect_description}\n"
    "Your need to give two things about your evaluation:\n"
    "1. the judgement of whether the formal code satisfies this aspect. This should be a "
    "binary value in \"True\" or \"False\".\n"
    "2. the detailed explanation of your judgement.\n"
    "You should wrap your final results in a way illustrated as the following:\n"
    "%%%%%%%%%%\n"
    "Explanation: Your Detailed Explanation\n"
    "Judgement: Your Binary Judgement\n"
    "%%%%%%%%%%\n"
    "Strictly follow the instructions that have been claimed.";

constexpr std::string_view kDelimiter = "%%%%%%%%%%";

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

bool is_delimiter_line(std::string_view line) { return trim(line) == kDelimiter; }

// A line introducing the judgment token. The template asks for
// "Judgement:"; the alternate spelling shows up often enough in model
// output to be worth accepting.
std::optional<std::string_view> judgement_payload(std::string_view line) {
    std::string_view t = trim(line);
    for (std::string_view tag : {std::string_view("Judgement:"), std::string_view("Judgment:")}) {
        if (t.size() >= tag.size() &&
            std::equal(tag.begin(), tag.end(), t.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) ==
                       std::tolower(static_cast<unsigned char>(b));
            })) {
            return t.substr(tag.size());
        }
    }
    return std::nullopt;
}

std::optional<std::string_view> explanation_payload(std::string_view line) {
    std::string_view t = trim(line);
    constexpr std::string_view tag = "Explanation:";
    if (t.size() >= tag.size() &&
        std::equal(tag.begin(), tag.end(), t.begin(), [](char a, char b) {
            return std::tolower(static_cast<unsigned char>(a)) ==
                   std::tolower(static_cast<unsigned char>(b));
        })) {
        return t.substr(tag.size());
    }
    return std::nullopt;
}

// Strips surrounding non-alphanumeric characters and lowercases; "True." and
// "**false**" reduce to "true"/"false", anything else stays ambiguous.
std::optional<int> parse_binary_token(std::string_view payload) {
    std::string_view t = trim(payload);
    while (!t.empty() && !std::isalnum(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
    while (!t.empty() && !std::isalnum(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
    std::string lowered(t);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "true") return 1;
    if (lowered == "false") return 0;
    return std::nullopt;
}

} // namespace

RenderedPrompt render(const Criterion& criterion, const FormalLanguage& language,
                      const std::string& statement, const std::string& code) {
    if (statement.empty()) throw InputError("render: statement must be non-empty");
    if (code.empty()) throw InputError("render: code must be non-empty");
    if (criterion.description.empty()) {
        throw ConfigError("render: criterion " + criterion.id + " has no description");
    }

    std::string text(kTemplate);
    replace_all(text, "{formal_language}", language.display_name());
    replace_all(text, "{aspect_description}", criterion.description);
    text += "\n\nMathematical statement:\n";
    text += statement;
    text += "\n\nFormal code:\n";
    text += code;

    return RenderedPrompt{std::move(text), criterion.id, language};
}

VerdictParse parse_verdict(const std::string& raw, const Criterion& criterion) {
    const auto lines = split_lines(raw);

    // Locate the last complete delimiter-wrapped block.
    std::vector<std::size_t> delims;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_delimiter_line(lines[i])) delims.push_back(i);
    }
    if (delims.size() < 2) {
        return {std::nullopt, "no delimiter-wrapped block (two lines of ten percent signs)"};
    }
    const std::size_t block_end = delims.back();
    const std::size_t block_begin = delims[delims.size() - 2];

    std::optional<int> judgment;
    std::size_t judgment_line = 0;
    for (std::size_t i = block_begin + 1; i < block_end; ++i) {
        if (auto payload = judgement_payload(lines[i])) {
            if (auto parsed = parse_binary_token(*payload)) {
                judgment = parsed; // last parsable Judgement line wins
                judgment_line = i;
            }
        }
    }
    if (!judgment) {
        return {std::nullopt, "no parsable true/false judgement token in the final block"};
    }

    std::string explanation;
    for (std::size_t i = block_begin + 1; i < block_end; ++i) {
        if (auto payload = explanation_payload(lines[i])) {
            explanation = std::string(trim(*payload));
            // Multi-line explanations run until the judgement line.
            for (std::size_t j = i + 1; j < judgment_line; ++j) {
                if (judgement_payload(lines[j])) break;
                explanation += '\n';
                explanation += std::string(lines[j]);
            }
            break;
        }
    }

    Verdict v;
    v.judgment = *judgment;
    v.explanation = std::string(trim(explanation));
    v.raw = raw;
    v.criterion_id = criterion.id;
    return {std::move(v), {}};
}

} // namespace formeval
