#include "formeval/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "formeval/errors.hpp"
#include "formeval/ioutil.hpp"

namespace formeval {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(std::string_view name, std::size_t line, const std::string& reason) {
    throw LoadError(std::string(name) + ":" + std::to_string(line) + ": " + reason);
}

std::string require_string(const json& object, const char* field, std::string_view name,
                           std::size_t line, bool allow_empty = false) {
    if (!object.contains(field)) {
        fail(name, line, std::string("missing required field '") + field + "'");
    }
    const json& value = object.at(field);
    if (!value.is_string()) {
        fail(name, line, std::string("field '") + field + "' must be a string");
    }
    std::string text = value.get<std::string>();
    if (text.empty() && !allow_empty) {
        fail(name, line, std::string("field '") + field + "' must not be empty");
    }
    return text;
}

CandidateFormalization parse_candidate(const json& value, const FormalLanguage& language,
                                       std::string_view name, std::size_t line) {
    if (!value.is_object()) fail(name, line, "candidates entries must be objects");
    static const std::set<std::string> known{"candidate_id", "code", "origin", "model",
                                             "prompting"};
    for (const auto& [key, ignored] : value.items()) {
        if (known.find(key) == known.end()) {
            fail(name, line, "unknown candidate field '" + key + "'");
        }
    }

    CandidateFormalization candidate;
    candidate.candidate_id = require_string(value, "candidate_id", name, line);
    candidate.code = require_string(value, "code", name, line);
    candidate.language = language;

    const std::string origin = require_string(value, "origin", name, line);
    if (origin == "ground_truth") {
        if (value.contains("model") || value.contains("prompting")) {
            fail(name, line, "ground_truth candidates take no model/prompting fields");
        }
        candidate.origin = CandidateOrigin::ground_truth();
    } else if (origin == "model_output") {
        std::string model =
            value.contains("model") ? require_string(value, "model", name, line) : "";
        std::string prompting =
            value.contains("prompting") ? require_string(value, "prompting", name, line) : "";
        candidate.origin = CandidateOrigin::model_output(std::move(model), std::move(prompting));
    } else {
        fail(name, line, "unknown candidate origin '" + origin +
                             "' (expected ground_truth or model_output)");
    }
    return candidate;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace

std::vector<StatementRecord> parse_corpus_jsonl(std::istream& in, std::string_view name) {
    std::vector<StatementRecord> records;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;

        const json value = json::parse(line, nullptr, false);
        if (value.is_discarded()) fail(name, line_no, "invalid JSON");
        if (!value.is_object()) fail(name, line_no, "record must be a JSON object");

        static const std::set<std::string> known{"id", "nl_statement", "formal_language",
                                                 "source", "candidates"};
        for (const auto& [key, ignored] : value.items()) {
            if (known.find(key) == known.end()) {
                fail(name, line_no, "unknown record field '" + key + "'");
            }
        }

        StatementRecord record;
        record.id = require_string(value, "id", name, line_no);
        if (!seen_ids.insert(record.id).second) {
            fail(name, line_no, "duplicate id '" + record.id + "'");
        }
        record.statement = require_string(value, "nl_statement", name, line_no);

        const std::string language = require_string(value, "formal_language", name, line_no);
        const auto parsed_language = FormalLanguage::from_schema_name(language);
        if (!parsed_language) {
            fail(name, line_no, "unknown formal language '" + language + "'");
        }
        record.language = *parsed_language;

        if (value.contains("source")) {
            record.source = require_string(value, "source", name, line_no);
        }

        if (value.contains("candidates")) {
            const json& candidates = value.at("candidates");
            if (!candidates.is_array()) fail(name, line_no, "field 'candidates' must be an array");
            std::set<std::string> candidate_ids;
            for (const json& entry : candidates) {
                CandidateFormalization candidate =
                    parse_candidate(entry, record.language, name, line_no);
                if (!candidate_ids.insert(candidate.candidate_id).second) {
                    fail(name, line_no,
                         "duplicate candidate_id '" + candidate.candidate_id + "'");
                }
                record.candidates.push_back(std::move(candidate));
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<StatementRecord> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open corpus file " + path.string());
    return parse_corpus_jsonl(in, path.string());
}

std::string corpus_to_jsonl(const std::vector<StatementRecord>& records) {
    std::string out;
    for (const StatementRecord& record : records) {
        ordered_json value;
        value["id"] = record.id;
        value["nl_statement"] = record.statement;
        value["formal_language"] = record.language.schema_name();
        if (!record.source.empty()) value["source"] = record.source;
        value["candidates"] = ordered_json::array();
        for (const CandidateFormalization& candidate : record.candidates) {
            if (!(candidate.language == record.language)) {
                throw InputError("candidate " + candidate.candidate_id + " of record " +
                                 record.id + " has a different language than its record");
            }
            ordered_json entry;
            entry["candidate_id"] = candidate.candidate_id;
            entry["code"] = candidate.code;
            if (candidate.origin.kind == CandidateOrigin::Kind::GroundTruth) {
                entry["origin"] = "ground_truth";
            } else {
                entry["origin"] = "model_output";
                if (!candidate.origin.model.empty()) entry["model"] = candidate.origin.model;
                if (!candidate.origin.prompting.empty()) {
                    entry["prompting"] = candidate.origin.prompting;
                }
            }
            value["candidates"].push_back(std::move(entry));
        }
        out += value.dump();
        out += '\n';
    }
    return out;
}

void save_corpus(const std::vector<StatementRecord>& records,
                 const std::filesystem::path& path) {
    atomic_write_text(path, corpus_to_jsonl(records));
}

// ---------------------------------------------------------------------------
// Annotations

namespace {

constexpr std::string_view kAnnotationHeader =
    "statement_id,candidate_id,lp,mc,fv,fq,overall_5pt";

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

int parse_int_field(const std::string& value, const char* field, std::string_view name,
                    std::size_t row) {
    try {
        std::size_t used = 0;
        const int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        fail(name, row, std::string("field '") + field + "' must be an integer, got '" + value +
                            "'");
    }
}

} // namespace

std::vector<AnnotationRecord> parse_annotations_csv(std::istream& in, std::string_view name,
                                                    const std::vector<StatementRecord>* corpus) {
    std::set<std::pair<std::string, std::string>> corpus_keys;
    if (corpus != nullptr) {
        for (const StatementRecord& record : *corpus) {
            for (const CandidateFormalization& candidate : record.candidates) {
                corpus_keys.emplace(record.id, candidate.candidate_id);
            }
        }
    }

    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) fail(name, 1, "empty file (header required)");
    ++row;
    if (trim(line) != kAnnotationHeader) {
        fail(name, row, "header must be exactly '" + std::string(kAnnotationHeader) + "'");
    }

    std::vector<AnnotationRecord> annotations;
    std::set<std::pair<std::string, std::string>> seen;
    while (std::getline(in, line)) {
        ++row;
        if (is_blank(line)) continue;
        const std::vector<std::string> fields = split_csv_row(line);
        if (fields.size() != 7) {
            fail(name, row, "expected 7 fields, got " + std::to_string(fields.size()));
        }

        AnnotationRecord annotation;
        annotation.statement_id = fields[0];
        annotation.candidate_id = fields[1];
        if (annotation.statement_id.empty() || annotation.candidate_id.empty()) {
            fail(name, row, "statement_id and candidate_id must not be empty");
        }

        const char* aspect_names[4] = {"lp", "mc", "fv", "fq"};
        int* aspect_slots[4] = {&annotation.lp, &annotation.mc, &annotation.fv, &annotation.fq};
        for (int i = 0; i < 4; ++i) {
            const int value = parse_int_field(fields[2 + i], aspect_names[i], name, row);
            if (value != 0 && value != 1) {
                fail(name, row, std::string("aspect label '") + aspect_names[i] +
                                    "' must be 0 or 1, got " + fields[2 + i]);
            }
            *aspect_slots[i] = value;
        }
        annotation.overall_5pt = parse_int_field(fields[6], "overall_5pt", name, row);
        if (annotation.overall_5pt < 1 || annotation.overall_5pt > 5) {
            fail(name, row, "overall_5pt must be in 1..5, got " + fields[6]);
        }

        const auto key = std::make_pair(annotation.statement_id, annotation.candidate_id);
        if (!seen.insert(key).second) {
            fail(name, row, "duplicate annotation for (" + annotation.statement_id + ", " +
                                annotation.candidate_id + ")");
        }
        if (corpus != nullptr && corpus_keys.find(key) == corpus_keys.end()) {
            fail(name, row, "annotation references unknown candidate (" +
                                annotation.statement_id + ", " + annotation.candidate_id + ")");
        }
        annotations.push_back(std::move(annotation));
    }
    return annotations;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open annotations file " + path.string());
    return parse_annotations_csv(in, path.string(), nullptr);
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path,
                                               const std::vector<StatementRecord>& corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open annotations file " + path.string());
    return parse_annotations_csv(in, path.string(), &corpus);
}

std::string annotations_to_csv(const std::vector<AnnotationRecord>& annotations) {
    std::string out(kAnnotationHeader);
    out += '\n';
    for (const AnnotationRecord& a : annotations) {
        out += a.statement_id + ',' + a.candidate_id + ',' + std::to_string(a.lp) + ',' +
               std::to_string(a.mc) + ',' + std::to_string(a.fv) + ',' + std::to_string(a.fq) +
               ',' + std::to_string(a.overall_5pt) + '\n';
    }
    return out;
}

void save_annotations(const std::vector<AnnotationRecord>& annotations,
                      const std::filesystem::path& path) {
    atomic_write_text(path, annotations_to_csv(annotations));
}

DesignMatrix build_design_matrix(const std::vector<AnnotationRecord>& annotations) {
    if (annotations.empty()) throw InputError("build_design_matrix: need at least one annotation");
    DesignMatrix design;
    design.X.reserve(annotations.size());
    design.y.reserve(annotations.size());
    design.keys.reserve(annotations.size());
    for (const AnnotationRecord& a : annotations) {
        for (int label : {a.lp, a.mc, a.fv, a.fq}) {
            if (label != 0 && label != 1) {
                throw InputError("build_design_matrix: aspect labels must be 0/1");
            }
        }
        design.X.push_back({static_cast<double>(a.lp), static_cast<double>(a.mc),
                            static_cast<double>(a.fv), static_cast<double>(a.fq)});
        design.y.push_back(normalize_rating(a.overall_5pt));
        design.keys.emplace_back(a.statement_id, a.candidate_id);
    }
    return design;
}

std::vector<StatementRecord> import_public_jsonl(const std::filesystem::path& path,
                                                 const PublicDatasetMapping& mapping) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open dataset file " + path.string());
    const std::string name = path.string();

    std::vector<StatementRecord> records;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const json value = json::parse(line, nullptr, false);
        if (value.is_discarded()) fail(name, line_no, "invalid JSON");
        if (!value.is_object()) fail(name, line_no, "record must be a JSON object");

        StatementRecord record;
        record.id = require_string(value, mapping.id_field.c_str(), name, line_no);
        if (!seen_ids.insert(record.id).second) {
            fail(name, line_no, "duplicate id '" + record.id + "'");
        }
        record.statement = require_string(value, mapping.statement_field.c_str(), name, line_no);
        record.language = mapping.language;
        record.source = mapping.source;

        CandidateFormalization candidate;
        candidate.candidate_id = "gt";
        candidate.code = require_string(value, mapping.code_field.c_str(), name, line_no);
        candidate.language = mapping.language;
        candidate.origin = CandidateOrigin::ground_truth();
        record.candidates.push_back(std::move(candidate));

        records.push_back(std::move(record));
    }
    return records;
}

} // namespace formeval
