// Command-line front end for the autoformalization evaluation toolkit.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "formeval/corpus.hpp"
#include "formeval/errors.hpp"
#include "formeval/ioutil.hpp"
#include "formeval/pipeline.hpp"

namespace fs = std::filesystem;
using namespace formeval;

namespace {

// Options shared by every subcommand that runs the judge + prover loop.
struct JudgeCliOptions {
    std::string corpus;
    std::string backend = "http";
    std::string judge_model = "gpt-4.1-mini";
    double temperature = 0.2;
    std::string salt;
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    int concurrency = 8;
    int retries = 2;
    double request_timeout = 60.0;
    std::string prover_spec; // "mock:accept|reject|marker|sleep[:secs]"
    std::string prover_cmd;  // raw shell template with one {file}
    double prover_timeout = 300.0;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool no_cache = false;
    bool judge_fv = false;
};

void add_judge_options(CLI::App* cmd, JudgeCliOptions& o) {
    cmd->add_option("--corpus", o.corpus, "Corpus JSONL file to evaluate")->required();
    cmd->add_option("--backend", o.backend,
                    "Judge backend: \"http\" or \"stub:seed=N,bias=B\" / "
                    "\"stub:seed=N,bias@T=B,...\"");
    cmd->add_option("--judge-model", o.judge_model, "Judge model name");
    cmd->add_option("--temperature", o.temperature, "Judge sampling temperature (0..2)");
    cmd->add_option("--salt", o.salt, "Sampling salt separating repeated runs");
    cmd->add_option("--endpoint", o.endpoint, "Chat-completions endpoint for --backend http");
    cmd->add_option("--concurrency", o.concurrency, "Max concurrent judge requests");
    cmd->add_option("--retries", o.retries, "Extra completions when a response fails to parse");
    cmd->add_option("--request-timeout", o.request_timeout, "HTTP request timeout in seconds");
    cmd->add_option("--prover", o.prover_spec,
                    "Built-in mock prover: mock:accept, mock:reject, mock:marker, "
                    "mock:sleep[:secs]");
    cmd->add_option("--prover-cmd", o.prover_cmd,
                    "Shell command template validating {file}; exit 0 means valid");
    cmd->add_option("--timeout", o.prover_timeout, "Prover timeout in seconds");
    cmd->add_option("--out", o.out_dir, "Output directory (reports, cache)");
    cmd->add_option("--seed", o.seed, "Run seed recorded in report metadata");
    cmd->add_flag("--no-cache", o.no_cache, "Disable the on-disk verdict cache");
}

RunConfig to_run_config(const JudgeCliOptions& o) {
    RunConfig config;
    config.corpus = o.corpus;
    config.backend_spec = o.backend;
    config.judge.model_name = o.judge_model;
    config.judge.temperature = o.temperature;
    config.judge.sampling_salt = o.salt;
    config.judge.endpoint = o.endpoint;
    config.judge.concurrency_limit = o.concurrency;
    config.judge.max_retries = o.retries;
    config.judge.request_timeout_seconds = o.request_timeout;
    if (!o.prover_spec.empty() && !o.prover_cmd.empty())
        throw ConfigError("use either --prover or --prover-cmd, not both");
    if (!o.prover_spec.empty()) {
        if (o.prover_spec.rfind("mock:", 0) != 0)
            throw ConfigError("--prover only accepts mock:MODE specs; "
                              "pass real commands via --prover-cmd");
        config.prover = make_mock_prover(fs::path(o.out_dir) / "mock_prover",
                                         o.prover_spec.substr(5));
        config.prover_display = o.prover_spec;
    } else if (!o.prover_cmd.empty()) {
        config.prover.command_template = o.prover_cmd;
        config.prover_display = o.prover_cmd;
    }
    config.prover.timeout_seconds = o.prover_timeout;
    config.out_dir = o.out_dir;
    config.seed = o.seed;
    config.use_cache = !o.no_cache;
    config.judge_fv = o.judge_fv;
    return config;
}

void apply_mode(RunConfig& config, const std::string& mode, const std::string& synthesis) {
    config.mode = mode == "direct" ? JudgeMode::Direct : JudgeMode::Oap;
    if (synthesis.empty())
        config.synthesis.reset();
    else
        config.synthesis = synthesis == "and" ? Synthesis::And : Synthesis::WA;
}

void print_stats(const RunStats& stats) {
    std::cout << "backend_calls=" << stats.backend_calls << "\n";
    std::cout << "cache_hits=" << stats.cache_hits << "\n";
    std::cout << "cache_misses=" << stats.cache_misses << "\n";
}

FormalLanguage parse_language(const std::string& name) {
    const auto language = FormalLanguage::from_schema_name(name);
    if (!language)
        throw ConfigError("unknown formal language \"" + name +
                          "\" (expected isabelle_hol, lean4, or other:LABEL)");
    return *language;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"LLM-judged evaluation of natural-language-to-formal-code translation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI file");

    // -- judge ---------------------------------------------------------------
    JudgeCliOptions judge_opts;
    std::string judge_mode = "oap";
    std::string judge_synthesis;
    std::string judge_weights = "paper";
    CLI::App* judge_cmd = app.add_subcommand(
        "judge", "Score every candidate: judged aspects + prover validity + weighted overall");
    add_judge_options(judge_cmd, judge_opts);
    judge_cmd->add_option("--mode", judge_mode, "Judging granularity")
        ->check(CLI::IsMember({"direct", "oap"}));
    judge_cmd->add_option("--synthesis", judge_synthesis,
                          "Aspect synthesis from atomic judgments (oap mode)")
        ->check(CLI::IsMember({"and", "wa"}));
    judge_cmd->add_option("--weights", judge_weights,
                          "Overall weights: paper | file:PATH | fit:ANNOTATIONS.csv");
    judge_cmd->add_flag("--judge-fv", judge_opts.judge_fv,
                        "Also judge formal validity with the LLM (prover stays canonical)");

    // -- overall -------------------------------------------------------------
    JudgeCliOptions overall_opts;
    double overall_gate = 0.0;
    CLI::App* overall_cmd = app.add_subcommand(
        "overall", "Single direct overall judgment per candidate, gated by the prover");
    add_judge_options(overall_cmd, overall_opts);
    overall_cmd->add_option("--gate", overall_gate,
                            "Score multiplier when the prover rejects (0 = hard gate)");

    // -- fit -----------------------------------------------------------------
    std::string fit_annotations;
    std::string fit_corpus;
    std::string fit_report;
    std::string fit_out = "out";
    CLI::App* fit_cmd =
        app.add_subcommand("fit", "Fit simplex-constrained overall weights to annotations");
    fit_cmd->add_option("--annotations", fit_annotations, "Annotations CSV")->required();
    fit_cmd->add_option("--corpus", fit_corpus, "Corpus for validating annotation joins");
    fit_cmd->add_option("--report", fit_report,
                        "Take X from this report's judged aspect scores instead of the labels");
    fit_cmd->add_option("--out", fit_out, "Output directory");

    // -- robustness ----------------------------------------------------------
    JudgeCliOptions robust_opts;
    std::string robust_mode = "oap";
    std::string robust_synthesis;
    std::string robust_weights = "paper";
    std::vector<double> robust_temperatures = kDefaultTemperatureGrid;
    int robust_runs = kDefaultRunsPerTemperature;
    CLI::App* robust_cmd = app.add_subcommand(
        "robustness", "Repeat the evaluation across a temperature grid and report stability");
    add_judge_options(robust_cmd, robust_opts);
    robust_cmd->add_option("--mode", robust_mode, "Judging granularity")
        ->check(CLI::IsMember({"direct", "oap"}));
    robust_cmd->add_option("--synthesis", robust_synthesis, "Aspect synthesis (oap mode)")
        ->check(CLI::IsMember({"and", "wa"}));
    robust_cmd->add_option("--weights", robust_weights, "Overall weights spec");
    robust_cmd
        ->add_option("--temperatures", robust_temperatures, "Temperature grid to sweep")
        ->delimiter(',');
    robust_cmd->add_option("--runs", robust_runs, "Runs per temperature");

    // -- compare -------------------------------------------------------------
    JudgeCliOptions compare_opts;
    std::string compare_mode = "oap";
    std::string compare_synthesis;
    std::string compare_weights = "paper";
    std::vector<std::string> compare_backends;
    std::vector<std::string> compare_models;
    std::vector<double> compare_temperatures;
    CLI::App* compare_cmd = app.add_subcommand(
        "compare", "Run several judge configurations over one corpus and correlate overalls");
    add_judge_options(compare_cmd, compare_opts);
    compare_cmd->add_option("--mode", compare_mode, "Judging granularity")
        ->check(CLI::IsMember({"direct", "oap"}));
    compare_cmd->add_option("--synthesis", compare_synthesis, "Aspect synthesis (oap mode)")
        ->check(CLI::IsMember({"and", "wa"}));
    compare_cmd->add_option("--weights", compare_weights, "Overall weights spec");
    compare_cmd
        ->add_option("--backends", compare_backends,
                     "Backend spec per configuration (two or more)")
        ->required()
        ->delimiter(';');
    compare_cmd
        ->add_option("--judge-models", compare_models,
                     "Judge model per configuration (one value broadcasts)")
        ->delimiter(';');
    compare_cmd
        ->add_option("--temperatures", compare_temperatures,
                     "Temperature per configuration (one value broadcasts)")
        ->delimiter(',');

    // -- agreement -----------------------------------------------------------
    std::string agree_report;
    std::string agree_annotations;
    std::string agree_corpus;
    std::string agree_out = "out";
    CLI::App* agree_cmd = app.add_subcommand(
        "agreement", "Compare a report against human annotations (kappa, Pearson, NRMSE)");
    agree_cmd->add_option("--report", agree_report, "Report JSON produced by judge/overall")
        ->required();
    agree_cmd->add_option("--annotations", agree_annotations, "Annotations CSV")->required();
    agree_cmd->add_option("--corpus", agree_corpus, "Corpus for validating annotation joins");
    agree_cmd->add_option("--out", agree_out, "Output directory");

    // -- convert -------------------------------------------------------------
    std::string convert_input;
    std::string convert_output;
    std::string convert_preset = "custom";
    std::string convert_language = "isabelle_hol";
    std::string convert_source;
    PublicDatasetMapping convert_mapping;
    CLI::App* convert_cmd = app.add_subcommand(
        "convert", "Import a public autoformalization dataset (JSONL) into the corpus schema");
    convert_cmd->add_option("--input", convert_input, "Source JSONL file")->required();
    convert_cmd->add_option("--output", convert_output, "Corpus JSONL to write")->required();
    convert_cmd
        ->add_option("--preset", convert_preset,
                     "Field mapping preset (minif2f, proofnet) or custom")
        ->check(CLI::IsMember({"minif2f", "proofnet", "custom"}));
    convert_cmd->add_option("--id-field", convert_mapping.id_field, "Record id field");
    convert_cmd->add_option("--statement-field", convert_mapping.statement_field,
                            "Natural-language statement field");
    convert_cmd->add_option("--code-field", convert_mapping.code_field,
                            "Formal code field (becomes the ground-truth candidate)");
    convert_cmd->add_option("--language", convert_language,
                            "Formal language of the code (isabelle_hol, lean4, other:LABEL)");
    convert_cmd->add_option("--source", convert_source, "Source tag stamped on every record");

    // -- baselines -----------------------------------------------------------
    std::string base_corpus;
    std::string base_out = "out";
    CLI::App* base_cmd = app.add_subcommand(
        "baselines", "Score model outputs against ground truth with BLEU / chrF / RUBY");
    base_cmd->add_option("--corpus", base_corpus, "Corpus JSONL file")->required();
    base_cmd->add_option("--out", base_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    if (*judge_cmd) {
        RunConfig config = to_run_config(judge_opts);
        apply_mode(config, judge_mode, judge_synthesis);
        config.weights = WeightsSource::parse(judge_weights);
        RunStats stats;
        const EvaluationReport report = run_evaluation(config, &stats);
        const fs::path path = write_report_files(report, config.out_dir);
        print_stats(stats);
        std::cout << "report=" << path.string() << "\n";
        return 0;
    }

    if (*overall_cmd) {
        RunConfig config = to_run_config(overall_opts);
        config.gate = overall_gate;
        RunStats stats;
        const EvaluationReport report = run_direct_overall(config, &stats);
        const fs::path path = write_report_files(report, config.out_dir);
        print_stats(stats);
        std::cout << "report=" << path.string() << "\n";
        return 0;
    }

    if (*fit_cmd) {
        const std::optional<fs::path> corpus =
            fit_corpus.empty() ? std::nullopt : std::optional<fs::path>(fit_corpus);
        const std::optional<fs::path> report =
            fit_report.empty() ? std::nullopt : std::optional<fs::path>(fit_report);
        const FitResult fit = fit_from_files(corpus, fit_annotations, report);
        std::size_t n_rows = 0;
        if (corpus)
            n_rows = load_annotations(fit_annotations, load_corpus(*corpus)).size();
        else
            n_rows = load_annotations(fit_annotations).size();
        const std::string x_source = report ? "report" : "annotations";
        const fs::path path = fs::path(fit_out) / "weights.json";
        atomic_write_text(path,
                          fit_to_json_text(fit, x_source, n_rows, fit_annotations, fit_report));
        std::cout << "weights: lp=" << fit.weights.lp << " mc=" << fit.weights.mc
                  << " fv=" << fit.weights.fv << " fq=" << fit.weights.fq << "\n";
        std::cout << "objective=" << fit.objective << "\n";
        std::cout << "weights_file=" << path.string() << "\n";
        return 0;
    }

    if (*robust_cmd) {
        RunConfig config = to_run_config(robust_opts);
        apply_mode(config, robust_mode, robust_synthesis);
        config.weights = WeightsSource::parse(robust_weights);
        RunStats stats;
        const RobustnessReport report =
            run_robustness(config, robust_temperatures, robust_runs, &stats);
        const fs::path path = write_robustness_files(report, config.out_dir);
        print_stats(stats);
        std::cout << "robustness=" << path.string() << "\n";
        return 0;
    }

    if (*compare_cmd) {
        if (compare_backends.size() < 2)
            throw ConfigError("compare needs at least two --backends entries");
        const auto broadcast = [&](std::size_t n, std::size_t k,
                                   const char* what) {
            if (k != 1 && k != n)
                throw ConfigError(std::string(what) +
                                  " must be given once or once per backend");
        };
        std::vector<RunConfig> configs;
        for (std::size_t i = 0; i < compare_backends.size(); ++i) {
            RunConfig config = to_run_config(compare_opts);
            apply_mode(config, compare_mode, compare_synthesis);
            config.weights = WeightsSource::parse(compare_weights);
            config.backend_spec = compare_backends[i];
            if (!compare_models.empty()) {
                broadcast(compare_backends.size(), compare_models.size(), "--judge-models");
                config.judge.model_name =
                    compare_models[compare_models.size() == 1 ? 0 : i];
            }
            if (!compare_temperatures.empty()) {
                broadcast(compare_backends.size(), compare_temperatures.size(),
                          "--temperatures");
                config.judge.temperature =
                    compare_temperatures[compare_temperatures.size() == 1 ? 0 : i];
            }
            configs.push_back(std::move(config));
        }
        RunStats stats;
        const CompareReport report = run_compare(configs, &stats);
        const fs::path path = write_compare_files(report, compare_opts.out_dir);
        print_stats(stats);
        std::cout << "compare=" << path.string() << "\n";
        return 0;
    }

    if (*agree_cmd) {
        const EvaluationReport report = load_report(agree_report);
        std::vector<AnnotationRecord> annotations;
        if (agree_corpus.empty())
            annotations = load_annotations(agree_annotations);
        else
            annotations = load_annotations(agree_annotations, load_corpus(agree_corpus));
        const AgreementReport agreement = run_agreement(report, annotations);
        const fs::path path = write_agreement_files(agreement, agree_out);
        std::cout << "joined=" << agreement.n_joined << "\n";
        std::cout << "agreement=" << path.string() << "\n";
        return 0;
    }

    if (*convert_cmd) {
        PublicDatasetMapping mapping = convert_mapping;
        if (convert_preset == "minif2f") {
            mapping.id_field = "name";
            mapping.statement_field = "informal_stmt";
            mapping.code_field = "formal_statement";
        } else if (convert_preset == "proofnet") {
            mapping.id_field = "id";
            mapping.statement_field = "nl_statement";
            mapping.code_field = "formal_statement";
        }
        mapping.language = parse_language(convert_language);
        mapping.source = convert_source;
        const auto corpus = import_public_jsonl(convert_input, mapping);
        save_corpus(corpus, convert_output);
        std::cout << "records=" << corpus.size() << "\n";
        std::cout << "corpus=" << convert_output << "\n";
        return 0;
    }

    if (*base_cmd) {
        const auto corpus = load_corpus(base_corpus);
        const BaselineReport report = run_baselines(corpus, base_corpus);
        const fs::path path = write_baseline_files(report, base_out);
        std::cout << "items=" << report.items.size() << "\n";
        std::cout << "baselines=" << path.string() << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
