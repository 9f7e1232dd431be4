#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "formeval/core.hpp"

namespace formeval {

// Corpora are line-delimited JSON, one statement record per line:
//
//   {"id": "...", "nl_statement": "...", "formal_language": "isabelle_hol",
//    "source": "...",                                      (optional)
//    "candidates": [{"candidate_id": "...", "code": "...",
//                    "origin": "ground_truth" | "model_output",
//                    "model": "...", "prompting": "..."}]} (model_output only)
//
// Loading is all-or-nothing: the first malformed line aborts with a
// LoadError citing "<name>:<line>: <reason>". Unknown fields, duplicate
// ids, and unrecognized languages are errors, not warnings.
std::vector<StatementRecord> load_corpus(const std::filesystem::path& path);
std::vector<StatementRecord> parse_corpus_jsonl(std::istream& in, std::string_view name);

std::string corpus_to_jsonl(const std::vector<StatementRecord>& records);
// Atomic write (temp + rename). load_corpus(save_corpus(x)) == x.
void save_corpus(const std::vector<StatementRecord>& records,
                 const std::filesystem::path& path);

// Annotations are CSV with the exact header
//   statement_id,candidate_id,lp,mc,fv,fq,overall_5pt
// one row per (statement_id, candidate_id). Aspect labels must be 0/1 and
// overall_5pt in 1..5; violations raise LoadError citing "<name>:<row>:".
// When a corpus is supplied, every row must join against one of its
// candidates and orphans are cited by row and key.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path,
                                               const std::vector<StatementRecord>& corpus);
std::vector<AnnotationRecord> parse_annotations_csv(std::istream& in, std::string_view name,
                                                    const std::vector<StatementRecord>* corpus);

std::string annotations_to_csv(const std::vector<AnnotationRecord>& annotations);
void save_annotations(const std::vector<AnnotationRecord>& annotations,
                      const std::filesystem::path& path);

// The regression design: one row per annotation with X columns ordered
// (LP, MC, FV, FQ) and y = normalize_rating(overall_5pt).
struct DesignMatrix {
    std::vector<std::array<double, 4>> X;
    std::vector<double> y;
    std::vector<std::pair<std::string, std::string>> keys; // (statement_id, candidate_id)
};

DesignMatrix build_design_matrix(const std::vector<AnnotationRecord>& annotations);

// Field mapping for importing public autoformalization datasets (JSONL)
// into the corpus schema. Each input line becomes one record with a single
// ground-truth candidate (candidate_id "gt").
struct PublicDatasetMapping {
    std::string id_field = "id";
    std::string statement_field = "nl_statement";
    std::string code_field = "formal_statement";
    FormalLanguage language = FormalLanguage::isabelle_hol();
    std::string source;  // stamped into every record, may be empty
};

std::vector<StatementRecord> import_public_jsonl(const std::filesystem::path& path,
                                                 const PublicDatasetMapping& mapping);

} // namespace formeval
