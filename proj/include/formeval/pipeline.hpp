#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "formeval/core.hpp"
#include "formeval/corpus.hpp"
#include "formeval/ensemble.hpp"
#include "formeval/judges.hpp"
#include "formeval/metrics.hpp"
#include "formeval/prover.hpp"

namespace formeval {

enum class JudgeMode { Direct, Oap };
enum class Synthesis { And, WA };

std::string_view judge_mode_name(JudgeMode mode);
std::string_view synthesis_name(Synthesis synthesis);

// Where the Eq.-style overall weights come from: the published fit, a
// weights JSON file, or a fresh fit against an annotations CSV.
struct WeightsSource {
    enum class Kind { Paper, File, Fit };

    Kind kind = Kind::Paper;
    std::filesystem::path path; // File/Fit only

    // Parses "paper", "file:PATH", or "fit:PATH"; throws ConfigError.
    static WeightsSource parse(const std::string& spec);
    std::string display() const;
};

// Everything one evaluation run needs. The CLI resolves user flags into
// this; tests construct it directly.
struct RunConfig {
    std::filesystem::path corpus;
    std::string backend_spec = "http";
    JudgeConfig judge;
    ProverConfig prover;
    std::string prover_display; // what metadata shows for the prover
    JudgeMode mode = JudgeMode::Oap;
    std::optional<Synthesis> synthesis; // required iff mode == Oap, else forbidden
    WeightsSource weights;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    bool use_cache = true;
    // Additionally judge the FV-group properties with the LLM (alongside the
    // prover's FV) so prover-vs-judge agreement can be studied.
    bool judge_fv = false;
    // Gate factor for the direct-overall combiner: score = judgment when the
    // prover validates, else judgment * gate.
    double gate = 0.0;
};

// Throws ConfigError on contradictions (e.g. Direct mode with synthesis).
void validate_run_config(const RunConfig& config);

struct BaselineScores {
    double bleu = 0.0;
    double chrf = 0.0;
    double ruby_sts = 0.0;
};

// One scored (statement, candidate) pair in a report.
struct ItemResult {
    std::string statement_id;
    std::string candidate_id;
    std::string origin_label; // "ground_truth" or "model[/prompting]"

    bool errored = false;
    std::string error;

    std::vector<std::pair<OapId, int>> oap_judgments; // Oap mode, judgment order
    std::optional<AspectScores> aspects;
    std::optional<double> fv_judge;      // LLM-sourced FV (judge_fv runs)
    std::optional<int> overall_judgment; // direct-overall runs
    std::optional<bool> prover_valid;
    std::optional<bool> prover_timed_out;
    std::optional<int> prover_exit_code;
    std::optional<double> overall;
    std::optional<BaselineScores> baselines; // model outputs with a reference
    std::vector<std::string> provenance;     // "<criterion>:<verdict cache key>"
};

struct ReportMetadata {
    std::string command;
    std::string corpus_path;
    std::string corpus_sha256;
    std::string backend;
    std::string judge_model;
    double temperature = 0.2;
    std::string prover;
    std::string mode;      // "direct" / "oap", empty for direct-overall
    std::string synthesis; // empty unless Oap
    EnsembleWeights weights = paper_weights();
    std::string weights_source;
    std::optional<double> gate; // direct-overall only
    std::uint64_t seed = 0;
    bool cache_enabled = true;
    bool deterministic = false; // stub backend: fixed timestamps
    std::string started_at;
    std::string finished_at;
};

struct EvaluationReport {
    ReportMetadata metadata;
    std::vector<ItemResult> items;
};

// Backend/cache accounting for one command, printed to stdout by the CLI
// (never part of report files).
struct RunStats {
    std::uint64_t backend_calls = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
};

// Judges every candidate of the corpus (Oap mode: the 9 LP/MC/FQ-group
// properties; Direct mode: the LP/MC/FQ aspects), obtains FV from the
// prover, synthesizes aspect scores, and applies the overall weights.
// Per-item judge failures mark the item errored without aborting the run.
EvaluationReport run_evaluation(const RunConfig& config, RunStats* stats = nullptr);

// Judges the Overall criterion once per candidate and gates it with the
// prover's validity bit.
EvaluationReport run_direct_overall(const RunConfig& config, RunStats* stats = nullptr);

// Serialization. JSON is the canonical, golden-testable format; aggregates
// are recomputed from the items at serialization time so they always match
// the rows. Markdown mirrors the report for humans.
std::string report_to_json_text(const EvaluationReport& report);
std::string report_to_markdown(const EvaluationReport& report);
EvaluationReport report_from_json_text(const std::string& text);
EvaluationReport load_report(const std::filesystem::path& path);

// Writes report.json and report.md under out_dir (temp + rename), returning
// the JSON path.
std::filesystem::path write_report_files(const EvaluationReport& report,
                                         const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Weight fitting

EnsembleWeights load_weights_file(const std::filesystem::path& path);
EnsembleWeights resolve_weights(const WeightsSource& source, std::string* provenance = nullptr);

// Builds (X, y) and fits the simplex-constrained weights. X comes from the
// human aspect labels, or from a report's judged aspect scores when one is
// given (y always from the annotations). The corpus, when given, validates
// annotation joins.
FitResult fit_from_files(const std::optional<std::filesystem::path>& corpus_path,
                         const std::filesystem::path& annotations_path,
                         const std::optional<std::filesystem::path>& report_path);

std::string fit_to_json_text(const FitResult& fit, const std::string& x_source,
                             std::size_t n_rows, const std::string& annotations_path,
                             const std::string& report_path);

// ---------------------------------------------------------------------------
// Robustness (temperature stability) runs

inline const std::vector<double> kDefaultTemperatureGrid{0.2, 0.4, 0.6, 0.8, 1.0};
inline constexpr int kDefaultRunsPerTemperature = 3;

struct RobustnessStat {
    double mean = 0.0;
    double std_dev = 0.0; // population std over per-run means
    std::vector<double> per_run;
};

struct RobustnessRow {
    double temperature = 0.0;
    RobustnessStat overall, lp, mc, fv, fq;
};

struct RobustnessReport {
    ReportMetadata metadata;
    int runs_per_temperature = kDefaultRunsPerTemperature;
    std::vector<RobustnessRow> rows;
};

// Repeats the evaluation runs_per_temperature times per temperature with
// fresh sampling: run r uses sampling salt std::to_string(r) and the cache
// is disabled throughout. Rows aggregate the per-run corpus means.
RobustnessReport run_robustness(const RunConfig& config,
                                const std::vector<double>& temperatures,
                                int runs_per_temperature, RunStats* stats = nullptr);

std::string robustness_to_json_text(const RobustnessReport& report);
std::string robustness_to_csv(const RobustnessReport& report); // plot-ready
std::string robustness_to_markdown(const RobustnessReport& report);
std::filesystem::path write_robustness_files(const RobustnessReport& report,
                                             const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Cross-judge comparison

struct CompareReport {
    std::vector<std::string> labels; // "config0", "config1", ...
    std::vector<EvaluationReport> reports;
    CorrelationMatrix correlations; // per-item overalls across configs
    std::size_t n_correlated = 0;   // items scored by every config
};

// Runs each config over the same corpus (paths must agree) and correlates
// per-item overall scores across configs.
CompareReport run_compare(const std::vector<RunConfig>& configs, RunStats* stats = nullptr);

std::string compare_to_json_text(const CompareReport& report);
std::string compare_to_markdown(const CompareReport& report);
std::string correlations_to_csv(const CorrelationMatrix& matrix); // plot-ready
std::filesystem::path write_compare_files(const CompareReport& report,
                                          const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Agreement against human annotations

struct AgreementReport {
    std::size_t n_joined = 0;
    // Aspect label agreement, system vs human, in (lp, mc, fv, fq) order.
    std::vector<std::pair<std::string, ClassificationReport>> aspects;
    ScoreAgreement overall; // overall score vs normalized 5-point rating
    // Baseline metric scores vs the normalized rating (when the report
    // carries baselines).
    std::vector<std::pair<std::string, ScoreAgreement>> baselines;
    // Prover FV vs LLM-judged FV, present when the report has both sources.
    std::optional<ClassificationReport> prover_vs_judge_fv;
};

// Joins report items with annotations on (statement_id, candidate_id);
// every scored item must be annotated and vice versa, or an InputError
// names the first orphan. WA-valued aspect scores binarize at >= 0.5.
AgreementReport run_agreement(const EvaluationReport& report,
                              const std::vector<AnnotationRecord>& annotations);

std::string agreement_to_json_text(const AgreementReport& report);
std::string agreement_to_markdown(const AgreementReport& report);
std::filesystem::path write_agreement_files(const AgreementReport& report,
                                            const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Reference-based baselines

struct BaselineReport {
    struct Item {
        std::string statement_id;
        std::string candidate_id;
        std::string origin_label;
        BaselineScores scores;
    };
    std::string corpus_path;
    std::vector<Item> items; // model outputs with a ground-truth reference
};

// Scores every model-output candidate against its record's ground-truth
// candidate with BLEU / chrF / RUBY (string-similarity fallback).
BaselineReport run_baselines(const std::vector<StatementRecord>& corpus,
                             const std::string& corpus_path);

std::string baselines_to_json_text(const BaselineReport& report);
std::string baselines_to_csv(const BaselineReport& report);
std::filesystem::path write_baseline_files(const BaselineReport& report,
                                           const std::filesystem::path& out_dir);

} // namespace formeval
