#include "formeval/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "formeval/hashing.hpp"
#include "formeval/ioutil.hpp"

namespace formeval {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string iso_timestamp(bool deterministic) {
    // Deterministic backends get a fixed timestamp so repeated runs produce
    // byte-identical reports.
    if (deterministic) return "1970-01-01T00:00:00Z";
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

std::string origin_label_of(const CandidateOrigin& origin) {
    if (origin.kind == CandidateOrigin::Kind::GroundTruth) return "ground_truth";
    if (origin.model.empty()) return "model_output";
    if (origin.prompting.empty()) return origin.model;
    return origin.model + "/" + origin.prompting;
}

std::string item_key_string(const std::string& statement_id, const std::string& candidate_id) {
    return statement_id + "/" + candidate_id;
}

ordered_json opt_json(const std::optional<double>& value) {
    if (value) return *value;
    return nullptr;
}

std::string fmt4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

std::string fmt_opt4(const std::optional<double>& value) {
    return value ? fmt4(*value) : std::string("n/a");
}

std::string fmt_exact(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// Aggregates, recomputed from the item rows every time a report is rendered.

struct GroupStats {
    RunningStats overall, lp, mc, fv, fq;
    RunningStats bleu, chrf, ruby;

    void add(const ItemResult& item) {
        if (item.overall) overall.add(*item.overall);
        if (item.aspects) {
            lp.add(item.aspects->lp);
            mc.add(item.aspects->mc);
            fv.add(item.aspects->fv);
            fq.add(item.aspects->fq);
        }
        if (item.baselines) {
            bleu.add(item.baselines->bleu);
            chrf.add(item.baselines->chrf);
            ruby.add(item.baselines->ruby_sts);
        }
    }
};

struct Aggregates {
    std::size_t n_scored = 0;
    std::vector<std::string> errored_ids;
    GroupStats all;
    std::vector<std::pair<std::string, GroupStats>> by_origin; // first-appearance order
};

Aggregates compute_aggregates(const EvaluationReport& report) {
    Aggregates agg;
    for (const ItemResult& item : report.items) {
        if (item.errored) {
            agg.errored_ids.push_back(item_key_string(item.statement_id, item.candidate_id));
            continue;
        }
        ++agg.n_scored;
        agg.all.add(item);
        auto found = std::find_if(agg.by_origin.begin(), agg.by_origin.end(),
                                  [&](const auto& e) { return e.first == item.origin_label; });
        if (found == agg.by_origin.end()) {
            agg.by_origin.emplace_back(item.origin_label, GroupStats{});
            found = std::prev(agg.by_origin.end());
        }
        found->second.add(item);
    }
    return agg;
}

ordered_json stats_json(const RunningStats& stats) {
    return ordered_json{{"mean", stats.mean()}, {"std", stats.std_pop()}, {"n", stats.count()}};
}

ordered_json group_json(const GroupStats& group) {
    ordered_json j = ordered_json::object();
    if (group.lp.count() > 0) j["lp"] = stats_json(group.lp);
    if (group.mc.count() > 0) j["mc"] = stats_json(group.mc);
    if (group.fv.count() > 0) j["fv"] = stats_json(group.fv);
    if (group.fq.count() > 0) j["fq"] = stats_json(group.fq);
    if (group.overall.count() > 0) j["overall"] = stats_json(group.overall);
    if (group.bleu.count() > 0) {
        j["baselines"] = ordered_json{{"bleu", stats_json(group.bleu)},
                                      {"chrf", stats_json(group.chrf)},
                                      {"ruby_sts", stats_json(group.ruby)}};
    }
    return j;
}

ordered_json aggregates_json(const EvaluationReport& report) {
    const Aggregates agg = compute_aggregates(report);
    ordered_json j;
    j["n_scored"] = agg.n_scored;
    j["n_errored"] = agg.errored_ids.size();
    j["errored_ids"] = agg.errored_ids;
    j["all"] = group_json(agg.all);
    ordered_json by = ordered_json::object();
    for (const auto& [label, group] : agg.by_origin) by[label] = group_json(group);
    j["by_origin"] = by;
    return j;
}

// ---------------------------------------------------------------------------
// Report <-> JSON

ordered_json weights_json(const EnsembleWeights& weights) {
    return ordered_json{
        {"lp", weights.lp}, {"mc", weights.mc}, {"fv", weights.fv}, {"fq", weights.fq}};
}

ordered_json metadata_to_json(const ReportMetadata& m) {
    ordered_json j;
    j["command"] = m.command;
    j["corpus"] = m.corpus_path;
    j["corpus_sha256"] = m.corpus_sha256;
    j["backend"] = m.backend;
    j["judge_model"] = m.judge_model;
    j["temperature"] = m.temperature;
    j["prover"] = m.prover;
    if (!m.mode.empty()) j["mode"] = m.mode;
    if (!m.synthesis.empty()) j["synthesis"] = m.synthesis;
    if (!m.weights_source.empty()) {
        j["weights"] = weights_json(m.weights);
        j["weights_source"] = m.weights_source;
    }
    if (m.gate) j["gate"] = *m.gate;
    j["seed"] = m.seed;
    j["cache"] = m.cache_enabled;
    j["deterministic"] = m.deterministic;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    return j;
}

ReportMetadata metadata_from_json(const ordered_json& j) {
    ReportMetadata m;
    m.command = j.value("command", "");
    m.corpus_path = j.value("corpus", "");
    m.corpus_sha256 = j.value("corpus_sha256", "");
    m.backend = j.value("backend", "");
    m.judge_model = j.value("judge_model", "");
    m.temperature = j.value("temperature", 0.0);
    m.prover = j.value("prover", "");
    m.mode = j.value("mode", "");
    m.synthesis = j.value("synthesis", "");
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        m.weights.lp = w.at("lp").get<double>();
        m.weights.mc = w.at("mc").get<double>();
        m.weights.fv = w.at("fv").get<double>();
        m.weights.fq = w.at("fq").get<double>();
    }
    m.weights_source = j.value("weights_source", "");
    if (j.contains("gate")) m.gate = j.at("gate").get<double>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.cache_enabled = j.value("cache", false);
    m.deterministic = j.value("deterministic", false);
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    return m;
}

ordered_json item_to_json(const ItemResult& item) {
    ordered_json j;
    j["statement_id"] = item.statement_id;
    j["candidate_id"] = item.candidate_id;
    j["origin"] = item.origin_label;
    j["status"] = item.errored ? "errored" : "ok";
    if (item.errored) j["error"] = item.error;
    if (!item.oap_judgments.empty()) {
        ordered_json o = ordered_json::object();
        for (const auto& [oap, judgment] : item.oap_judgments)
            o[std::string(oap_name(oap))] = judgment;
        j["oap_judgments"] = o;
    }
    if (item.aspects) {
        j["aspects"] = ordered_json{{"lp", item.aspects->lp},
                                    {"mc", item.aspects->mc},
                                    {"fv", item.aspects->fv},
                                    {"fq", item.aspects->fq}};
    }
    if (item.fv_judge) j["fv_judge"] = *item.fv_judge;
    if (item.overall_judgment) j["overall_judgment"] = *item.overall_judgment;
    if (item.prover_valid) {
        j["prover"] = ordered_json{{"valid", *item.prover_valid},
                                   {"timed_out", item.prover_timed_out.value_or(false)},
                                   {"exit_code", item.prover_exit_code.value_or(-1)}};
    }
    if (item.overall) j["overall"] = *item.overall;
    if (item.baselines) {
        j["baselines"] = ordered_json{{"bleu", item.baselines->bleu},
                                      {"chrf", item.baselines->chrf},
                                      {"ruby_sts", item.baselines->ruby_sts}};
    }
    j["provenance"] = item.provenance;
    return j;
}

ItemResult item_from_json(const ordered_json& j) {
    ItemResult item;
    item.statement_id = j.at("statement_id").get<std::string>();
    item.candidate_id = j.at("candidate_id").get<std::string>();
    item.origin_label = j.at("origin").get<std::string>();
    item.errored = j.at("status").get<std::string>() == "errored";
    item.error = j.value("error", "");
    if (j.contains("oap_judgments")) {
        for (const auto& [name, value] : j.at("oap_judgments").items()) {
            const auto oap = oap_from_name(name);
            if (!oap) throw LoadError("report: unknown atomic property \"" + name + "\"");
            item.oap_judgments.emplace_back(*oap, value.get<int>());
        }
    }
    if (j.contains("aspects")) {
        const json& a = j.at("aspects");
        AspectScores scores;
        scores.lp = a.at("lp").get<double>();
        scores.mc = a.at("mc").get<double>();
        scores.fv = a.at("fv").get<double>();
        scores.fq = a.at("fq").get<double>();
        item.aspects = scores;
    }
    if (j.contains("fv_judge")) item.fv_judge = j.at("fv_judge").get<double>();
    if (j.contains("overall_judgment")) item.overall_judgment = j.at("overall_judgment").get<int>();
    if (j.contains("prover")) {
        const json& p = j.at("prover");
        item.prover_valid = p.at("valid").get<bool>();
        item.prover_timed_out = p.at("timed_out").get<bool>();
        item.prover_exit_code = p.at("exit_code").get<int>();
    }
    if (j.contains("overall")) item.overall = j.at("overall").get<double>();
    if (j.contains("baselines")) {
        const json& b = j.at("baselines");
        BaselineScores scores;
        scores.bleu = b.at("bleu").get<double>();
        scores.chrf = b.at("chrf").get<double>();
        scores.ruby_sts = b.at("ruby_sts").get<double>();
        item.baselines = scores;
    }
    if (j.contains("provenance"))
        item.provenance = j.at("provenance").get<std::vector<std::string>>();
    return item;
}

ordered_json report_to_json(const EvaluationReport& report) {
    ordered_json root;
    root["format"] = "formeval/report/v1";
    root["metadata"] = metadata_to_json(report.metadata);
    ordered_json items = ordered_json::array();
    for (const ItemResult& item : report.items) items.push_back(item_to_json(item));
    root["items"] = items;
    root["aggregates"] = aggregates_json(report);
    return root;
}

EvaluationReport report_from_json(const ordered_json& root) {
    if (!root.is_object() || root.value("format", "") != "formeval/report/v1")
        throw LoadError("report: not a formeval/report/v1 document");
    EvaluationReport report;
    report.metadata = metadata_from_json(root.at("metadata"));
    for (const ordered_json& j : root.at("items")) report.items.push_back(item_from_json(j));
    return report;
}

// ---------------------------------------------------------------------------
// The shared evaluation core behind `judge` and `overall`.

void validate_common(const RunConfig& config) {
    if (config.corpus.empty()) throw ConfigError("a corpus path is required");
    if (config.prover.command_template.empty())
        throw ConfigError("a prover command is required (use --prover or --prover-cmd)");
    if (config.judge.concurrency_limit < 1)
        throw ConfigError("judge concurrency limit must be at least 1");
    if (config.judge.max_retries < 0) throw ConfigError("judge retry count must be >= 0");
    if (!(config.gate >= 0.0 && config.gate <= 1.0))
        throw ConfigError("gate must lie in [0,1]");
    temperature_millis(config.judge.temperature); // range check
}

struct PlannedItem {
    const StatementRecord* record = nullptr;
    const CandidateFormalization* candidate = nullptr;
    std::size_t first_task = 0;
    std::size_t task_count = 0;
};

EvaluationReport evaluate_core(const RunConfig& config, bool direct_overall, RunStats* stats) {
    if (direct_overall)
        validate_common(config);
    else
        validate_run_config(config);

    const CriteriaRegistry& registry = CriteriaRegistry::builtin();
    const std::string corpus_bytes = read_text_file(config.corpus);
    const std::vector<StatementRecord> corpus = load_corpus(config.corpus);

    std::string weights_provenance;
    EnsembleWeights weights = paper_weights();
    if (!direct_overall) weights = resolve_weights(config.weights, &weights_provenance);

    const std::unique_ptr<JudgeBackend> backend = make_backend(config.backend_spec, config.judge);
    CountingBackend counting(*backend);
    const bool deterministic = counting.deterministic();

    std::optional<VerdictCache> cache;
    if (config.use_cache) cache.emplace(config.out_dir / "cache");

    // The criteria judged per candidate, in judging order.
    std::vector<const Criterion*> criteria;
    if (direct_overall) {
        criteria.push_back(&registry.overall_criterion());
    } else if (config.mode == JudgeMode::Direct) {
        criteria.push_back(&registry.aspect_criterion(AspectId::LP));
        criteria.push_back(&registry.aspect_criterion(AspectId::MC));
        if (config.judge_fv) criteria.push_back(&registry.aspect_criterion(AspectId::FV));
        criteria.push_back(&registry.aspect_criterion(AspectId::FQ));
    } else {
        for (AspectId aspect : kAllAspects) {
            if (aspect == AspectId::FV && !config.judge_fv) continue; // prover's job
            for (OapId oap : registry.aspect_oaps(aspect))
                criteria.push_back(&registry.oap_criterion(oap));
        }
    }

    std::vector<PlannedItem> planned;
    std::vector<JudgeTask> tasks;
    for (const StatementRecord& record : corpus) {
        for (const CandidateFormalization& candidate : record.candidates) {
            PlannedItem plan;
            plan.record = &record;
            plan.candidate = &candidate;
            plan.first_task = tasks.size();
            plan.task_count = criteria.size();
            for (const Criterion* criterion : criteria) {
                JudgeTask task;
                task.key = item_key_string(record.id, candidate.candidate_id) + "/" + criterion->id;
                task.criterion = criterion;
                task.language = candidate.language;
                task.statement = record.statement;
                task.code = candidate.code;
                tasks.push_back(std::move(task));
            }
            planned.push_back(plan);
        }
    }

    const std::string started_at = iso_timestamp(deterministic);
    const auto results = judge_batch(counting, config.judge, tasks, cache ? &*cache : nullptr);

    EvaluationReport report;
    report.items.reserve(planned.size());
    for (const PlannedItem& plan : planned) {
        ItemResult item;
        item.statement_id = plan.record->id;
        item.candidate_id = plan.candidate->candidate_id;
        item.origin_label = origin_label_of(plan.candidate->origin);

        const ValidityResult validity =
            check_validity(config.prover, plan.candidate->code, plan.candidate->language);
        item.prover_valid = validity.valid;
        item.prover_timed_out = validity.timed_out;
        item.prover_exit_code = validity.exit_code;

        std::string error;
        OapProfile profile;
        AspectScores direct_scores;
        std::optional<double> direct_fv_judge;
        std::optional<int> overall_judgment;
        for (std::size_t k = 0; k < plan.task_count; ++k) {
            const Criterion* criterion = criteria[k];
            const JudgeResult& result = results[plan.first_task + k].second;
            item.provenance.push_back(
                criterion->id + ":" +
                VerdictCache::key(counting.id(), config.judge.model_name,
                                  config.judge.temperature, config.judge.sampling_salt,
                                  criterion->id, plan.record->statement, plan.candidate->code));
            if (result.outcome != JudgeOutcome::Ok) {
                if (!error.empty()) error += "; ";
                error += criterion->id + ": " + std::string(judge_outcome_name(result.outcome));
                if (!result.error.empty()) error += " (" + result.error + ")";
                continue;
            }
            const int judgment = result.verdict->judgment;
            switch (criterion->kind) {
            case Criterion::Kind::Overall:
                overall_judgment = judgment;
                break;
            case Criterion::Kind::Aspect:
                if (*criterion->aspect == AspectId::FV)
                    direct_fv_judge = static_cast<double>(judgment);
                else
                    direct_scores.set(*criterion->aspect, judgment);
                break;
            case Criterion::Kind::Oap:
                item.oap_judgments.emplace_back(*criterion->oap, judgment);
                profile[*criterion->oap] = judgment;
                break;
            }
        }
        item.provenance.push_back("prover:" + sha256_hex(plan.candidate->code));

        if (!error.empty()) {
            item.errored = true;
            item.error = error;
            report.items.push_back(std::move(item));
            continue;
        }

        if (direct_overall) {
            item.overall_judgment = overall_judgment;
            item.overall = gate_overall_with_validity(static_cast<double>(*overall_judgment),
                                                      validity.valid ? 1 : 0, config.gate);
        } else {
            AspectScores aspects;
            if (config.mode == JudgeMode::Direct) {
                aspects = direct_scores;
                item.fv_judge = direct_fv_judge;
            } else {
                const std::vector<AspectId> groups{AspectId::LP, AspectId::MC, AspectId::FQ};
                const auto scores = config.synthesis == Synthesis::And
                                        ? and_synthesis(profile, registry, groups)
                                        : wa_synthesis(profile, registry, groups);
                aspects.lp = scores.at(AspectId::LP);
                aspects.mc = scores.at(AspectId::MC);
                aspects.fq = scores.at(AspectId::FQ);
                if (config.judge_fv) {
                    const std::vector<AspectId> fv_group{AspectId::FV};
                    const auto fv = config.synthesis == Synthesis::And
                                        ? and_synthesis(profile, registry, fv_group)
                                        : wa_synthesis(profile, registry, fv_group);
                    item.fv_judge = fv.at(AspectId::FV);
                }
            }
            aspects.fv = validity.valid ? 1.0 : 0.0;
            item.aspects = aspects;
            item.overall = overall_score(aspects, weights);
        }

        if (plan.candidate->origin.kind == CandidateOrigin::Kind::ModelOutput) {
            const CandidateFormalization* reference = nullptr;
            for (const CandidateFormalization& other : plan.record->candidates) {
                if (other.origin.kind == CandidateOrigin::Kind::GroundTruth) {
                    reference = &other;
                    break;
                }
            }
            if (reference) {
                BaselineScores scores;
                scores.bleu = bleu(plan.candidate->code, reference->code);
                scores.chrf = chrf(plan.candidate->code, reference->code);
                scores.ruby_sts = ruby_sts(plan.candidate->code, reference->code);
                item.baselines = scores;
            }
        }
        report.items.push_back(std::move(item));
    }

    ReportMetadata& m = report.metadata;
    m.command = direct_overall ? "overall" : "judge";
    m.corpus_path = config.corpus.string();
    m.corpus_sha256 = sha256_hex(corpus_bytes);
    m.backend = config.backend_spec;
    m.judge_model = config.judge.model_name;
    m.temperature = config.judge.temperature;
    m.prover = config.prover_display.empty() ? config.prover.command_template
                                             : config.prover_display;
    if (direct_overall) {
        m.gate = config.gate;
    } else {
        m.mode = std::string(judge_mode_name(config.mode));
        if (config.synthesis) m.synthesis = std::string(synthesis_name(*config.synthesis));
        m.weights = weights;
        m.weights_source = weights_provenance;
    }
    m.seed = config.seed;
    m.cache_enabled = config.use_cache;
    m.deterministic = deterministic;
    m.started_at = started_at;
    m.finished_at = iso_timestamp(deterministic);

    if (stats) {
        stats->backend_calls += counting.calls();
        if (cache) {
            stats->cache_hits += cache->hits();
            stats->cache_misses += cache->misses();
        }
    }
    return report;
}

} // namespace

// ---------------------------------------------------------------------------
// Names, config parsing, validation

std::string_view judge_mode_name(JudgeMode mode) {
    return mode == JudgeMode::Direct ? "direct" : "oap";
}

std::string_view synthesis_name(Synthesis synthesis) {
    return synthesis == Synthesis::And ? "and" : "wa";
}

WeightsSource WeightsSource::parse(const std::string& spec) {
    WeightsSource source;
    if (spec == "paper") {
        source.kind = Kind::Paper;
        return source;
    }
    if (spec.rfind("file:", 0) == 0) {
        source.kind = Kind::File;
        source.path = spec.substr(5);
    } else if (spec.rfind("fit:", 0) == 0) {
        source.kind = Kind::Fit;
        source.path = spec.substr(4);
    } else {
        throw ConfigError("weights must be \"paper\", \"file:PATH\", or \"fit:PATH\" (got \"" +
                          spec + "\")");
    }
    if (source.path.empty())
        throw ConfigError("weights spec \"" + spec + "\" is missing a path");
    return source;
}

std::string WeightsSource::display() const {
    switch (kind) {
    case Kind::Paper: return "paper";
    case Kind::File: return "file:" + path.string();
    case Kind::Fit: return "fit:" + path.string();
    }
    return "paper";
}

void validate_run_config(const RunConfig& config) {
    validate_common(config);
    if (config.mode == JudgeMode::Direct && config.synthesis)
        throw ConfigError("direct mode judges aspects directly and takes no --synthesis");
    if (config.mode == JudgeMode::Oap && !config.synthesis)
        throw ConfigError("oap mode requires --synthesis and|wa");
}

// ---------------------------------------------------------------------------
// Weights

EnsembleWeights load_weights_file(const std::filesystem::path& path) {
    const json root = json::parse(read_text_file(path), nullptr, false);
    if (root.is_discarded())
        throw LoadError(path.string() + ": not valid JSON");
    const json* w = &root;
    if (root.is_object() && root.contains("weights")) w = &root.at("weights");
    if (!w->is_object())
        throw LoadError(path.string() + ": expected an object with lp/mc/fv/fq weights");
    EnsembleWeights weights;
    for (const auto& [name, target] : std::initializer_list<std::pair<const char*, double*>>{
             {"lp", &weights.lp}, {"mc", &weights.mc}, {"fv", &weights.fv}, {"fq", &weights.fq}}) {
        if (!w->contains(name) || !w->at(name).is_number())
            throw LoadError(path.string() + ": missing numeric weight \"" + name + "\"");
        *target = w->at(name).get<double>();
    }
    try {
        weights.validate();
    } catch (const InputError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    return weights;
}

EnsembleWeights resolve_weights(const WeightsSource& source, std::string* provenance) {
    if (provenance) *provenance = source.display();
    switch (source.kind) {
    case WeightsSource::Kind::Paper:
        return paper_weights();
    case WeightsSource::Kind::File:
        return load_weights_file(source.path);
    case WeightsSource::Kind::Fit: {
        const auto annotations = load_annotations(source.path);
        const DesignMatrix design = build_design_matrix(annotations);
        return fit_weights(design.X, design.y).weights;
    }
    }
    return paper_weights();
}

FitResult fit_from_files(const std::optional<std::filesystem::path>& corpus_path,
                         const std::filesystem::path& annotations_path,
                         const std::optional<std::filesystem::path>& report_path) {
    std::vector<AnnotationRecord> annotations;
    if (corpus_path) {
        const auto corpus = load_corpus(*corpus_path);
        annotations = load_annotations(annotations_path, corpus);
    } else {
        annotations = load_annotations(annotations_path);
    }
    if (!report_path) {
        const DesignMatrix design = build_design_matrix(annotations);
        return fit_weights(design.X, design.y);
    }

    // X from the report's judged aspect scores, y from the human ratings.
    const EvaluationReport report = load_report(*report_path);
    std::map<std::pair<std::string, std::string>, const ItemResult*> by_key;
    for (const ItemResult& item : report.items)
        by_key.emplace(std::make_pair(item.statement_id, item.candidate_id), &item);
    std::vector<std::array<double, 4>> X;
    std::vector<double> y;
    for (const AnnotationRecord& a : annotations) {
        const auto it = by_key.find({a.statement_id, a.candidate_id});
        if (it == by_key.end())
            throw InputError("annotation (" + a.statement_id + ", " + a.candidate_id +
                             ") has no item in the report");
        const ItemResult& item = *it->second;
        if (item.errored || !item.aspects)
            throw InputError("annotation (" + a.statement_id + ", " + a.candidate_id +
                             ") joins an item without aspect scores");
        X.push_back({item.aspects->lp, item.aspects->mc, item.aspects->fv, item.aspects->fq});
        y.push_back(normalize_rating(a.overall_5pt));
    }
    return fit_weights(X, y);
}

std::string fit_to_json_text(const FitResult& fit, const std::string& x_source,
                             std::size_t n_rows, const std::string& annotations_path,
                             const std::string& report_path) {
    ordered_json j;
    j["format"] = "formeval/weights/v1";
    j["weights"] = weights_json(fit.weights);
    j["objective"] = fit.objective;
    j["nrmse"] = opt_json(fit.nrmse);
    j["correlation"] = opt_json(fit.correlation);
    ordered_json meta;
    meta["x_source"] = x_source;
    meta["n_rows"] = n_rows;
    meta["annotations"] = annotations_path;
    if (report_path.empty())
        meta["report"] = nullptr;
    else
        meta["report"] = report_path;
    j["fit"] = meta;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Evaluation entry points and report serialization

EvaluationReport run_evaluation(const RunConfig& config, RunStats* stats) {
    return evaluate_core(config, /*direct_overall=*/false, stats);
}

EvaluationReport run_direct_overall(const RunConfig& config, RunStats* stats) {
    return evaluate_core(config, /*direct_overall=*/true, stats);
}

std::string report_to_json_text(const EvaluationReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

EvaluationReport report_from_json_text(const std::string& text) {
    const ordered_json root = ordered_json::parse(text, nullptr, false);
    if (root.is_discarded()) throw LoadError("report: not valid JSON");
    try {
        return report_from_json(root);
    } catch (const json::exception& e) {
        throw LoadError(std::string("report: ") + e.what());
    }
}

EvaluationReport load_report(const std::filesystem::path& path) {
    try {
        return report_from_json_text(read_text_file(path));
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

std::string report_to_markdown(const EvaluationReport& report) {
    const ReportMetadata& m = report.metadata;
    const Aggregates agg = compute_aggregates(report);
    std::ostringstream out;
    out << "# Evaluation report\n\n";
    out << "- Command: " << m.command << "\n";
    out << "- Corpus: " << m.corpus_path << " (sha256 " << m.corpus_sha256.substr(0, 12)
        << ")\n";
    out << "- Backend: " << m.backend << "\n";
    out << "- Judge model: " << m.judge_model << " at temperature " << fmt4(m.temperature)
        << "\n";
    out << "- Prover: " << m.prover << "\n";
    if (!m.mode.empty()) {
        out << "- Mode: " << m.mode;
        if (!m.synthesis.empty()) out << ", synthesis: " << m.synthesis;
        out << "\n";
    }
    if (!m.weights_source.empty()) {
        out << "- Weights: lp=" << fmt4(m.weights.lp) << " mc=" << fmt4(m.weights.mc)
            << " fv=" << fmt4(m.weights.fv) << " fq=" << fmt4(m.weights.fq) << " ("
            << m.weights_source << ")\n";
    }
    if (m.gate) out << "- Gate: " << fmt4(*m.gate) << "\n";
    out << "- Seed: " << m.seed << ", cache: " << (m.cache_enabled ? "on" : "off") << "\n";
    out << "- Run: " << m.started_at << " to " << m.finished_at << "\n";

    const auto group_row = [&](const std::string& label, const GroupStats& g) {
        const auto cell = [](const RunningStats& s) {
            if (s.count() == 0) return std::string("n/a");
            return fmt4(s.mean()) + " ± " + fmt4(s.std_pop());
        };
        out << "| " << label << " | " << g.overall.count() << " | " << cell(g.lp) << " | "
            << cell(g.mc) << " | " << cell(g.fv) << " | " << cell(g.fq) << " | "
            << cell(g.overall) << " |\n";
    };
    out << "\n## Aggregates\n\n";
    out << "| group | n | LP | MC | FV | FQ | overall |\n";
    out << "| --- | --- | --- | --- | --- | --- | --- |\n";
    group_row("all", agg.all);
    for (const auto& [label, group] : agg.by_origin) group_row(label, group);

    bool any_baselines = agg.all.bleu.count() > 0;
    if (any_baselines) {
        out << "\n## Reference baselines (model outputs with a ground truth)\n\n";
        out << "| group | n | BLEU | chrF | RUBY |\n";
        out << "| --- | --- | --- | --- | --- |\n";
        const auto baseline_row = [&](const std::string& label, const GroupStats& g) {
            if (g.bleu.count() == 0) return;
            out << "| " << label << " | " << g.bleu.count() << " | " << fmt4(g.bleu.mean())
                << " ± " << fmt4(g.bleu.std_pop()) << " | " << fmt4(g.chrf.mean()) << " ± "
                << fmt4(g.chrf.std_pop()) << " | " << fmt4(g.ruby.mean()) << " ± "
                << fmt4(g.ruby.std_pop()) << " |\n";
        };
        baseline_row("all", agg.all);
        for (const auto& [label, group] : agg.by_origin) baseline_row(label, group);
    }

    if (!agg.errored_ids.empty()) {
        out << "\n## Errored items\n\n";
        for (const std::string& id : agg.errored_ids) out << "- " << id << "\n";
    }

    out << "\n## Items\n\n";
    out << "| statement | candidate | origin | LP | MC | FV | FQ | overall |\n";
    out << "| --- | --- | --- | --- | --- | --- | --- | --- |\n";
    for (const ItemResult& item : report.items) {
        out << "| " << item.statement_id << " | " << item.candidate_id << " | "
            << item.origin_label << " | ";
        if (item.errored) {
            out << "errored | errored | errored | errored | errored |\n";
            continue;
        }
        if (item.aspects) {
            out << fmt4(item.aspects->lp) << " | " << fmt4(item.aspects->mc) << " | "
                << fmt4(item.aspects->fv) << " | " << fmt4(item.aspects->fq) << " | ";
        } else {
            out << "n/a | n/a | n/a | n/a | ";
        }
        out << fmt_opt4(item.overall) << " |\n";
    }
    return out.str();
}

std::filesystem::path write_report_files(const EvaluationReport& report,
                                         const std::filesystem::path& out_dir) {
    const std::filesystem::path json_path = out_dir / "report.json";
    atomic_write_text(json_path, report_to_json_text(report));
    atomic_write_text(out_dir / "report.md", report_to_markdown(report));
    return json_path;
}

// ---------------------------------------------------------------------------
// Robustness

RobustnessReport run_robustness(const RunConfig& config,
                                const std::vector<double>& temperatures,
                                int runs_per_temperature, RunStats* stats) {
    if (temperatures.empty()) throw ConfigError("robustness needs at least one temperature");
    if (runs_per_temperature < 1)
        throw ConfigError("robustness needs at least one run per temperature");
    validate_run_config(config);
    for (double t : temperatures) temperature_millis(t); // range check up front

    RobustnessReport out;
    out.runs_per_temperature = runs_per_temperature;
    bool have_metadata = false;
    for (double temperature : temperatures) {
        RobustnessRow row;
        row.temperature = temperature;
        for (int run = 0; run < runs_per_temperature; ++run) {
            RunConfig rc = config;
            rc.judge.temperature = temperature;
            rc.judge.sampling_salt = std::to_string(run); // fresh sampling per run
            rc.use_cache = false;
            const EvaluationReport report = evaluate_core(rc, false, stats);
            if (!have_metadata) {
                out.metadata = report.metadata;
                out.metadata.command = "robustness";
                have_metadata = true;
            }
            RunningStats overall, lp, mc, fv, fq;
            for (const ItemResult& item : report.items) {
                if (item.errored || !item.overall || !item.aspects) continue;
                overall.add(*item.overall);
                lp.add(item.aspects->lp);
                mc.add(item.aspects->mc);
                fv.add(item.aspects->fv);
                fq.add(item.aspects->fq);
            }
            if (overall.count() == 0)
                throw InputError("robustness: a run produced no scored items");
            row.overall.per_run.push_back(overall.mean());
            row.lp.per_run.push_back(lp.mean());
            row.mc.per_run.push_back(mc.mean());
            row.fv.per_run.push_back(fv.mean());
            row.fq.per_run.push_back(fq.mean());
        }
        const auto finalize = [](RobustnessStat& stat) {
            RunningStats s;
            for (double v : stat.per_run) s.add(v);
            stat.mean = s.mean();
            stat.std_dev = s.std_pop();
        };
        finalize(row.overall);
        finalize(row.lp);
        finalize(row.mc);
        finalize(row.fv);
        finalize(row.fq);
        out.rows.push_back(std::move(row));
    }
    return out;
}

namespace {

ordered_json robustness_stat_json(const RobustnessStat& stat) {
    return ordered_json{{"mean", stat.mean}, {"std", stat.std_dev}, {"per_run", stat.per_run}};
}

} // namespace

std::string robustness_to_json_text(const RobustnessReport& report) {
    ordered_json root;
    root["format"] = "formeval/robustness/v1";
    ordered_json meta = metadata_to_json(report.metadata);
    meta.erase("temperature"); // the grid below supersedes the single value
    ordered_json grid = ordered_json::array();
    for (const RobustnessRow& row : report.rows) grid.push_back(row.temperature);
    meta["temperatures"] = grid;
    meta["runs_per_temperature"] = report.runs_per_temperature;
    root["metadata"] = meta;
    ordered_json rows = ordered_json::array();
    for (const RobustnessRow& row : report.rows) {
        ordered_json j;
        j["temperature"] = row.temperature;
        j["overall"] = robustness_stat_json(row.overall);
        j["lp"] = robustness_stat_json(row.lp);
        j["mc"] = robustness_stat_json(row.mc);
        j["fv"] = robustness_stat_json(row.fv);
        j["fq"] = robustness_stat_json(row.fq);
        rows.push_back(j);
    }
    root["rows"] = rows;
    return root.dump(2) + "\n";
}

std::string robustness_to_csv(const RobustnessReport& report) {
    std::ostringstream out;
    out << "temperature,metric,mean,std,runs\n";
    for (const RobustnessRow& row : report.rows) {
        const auto line = [&](const char* metric, const RobustnessStat& stat) {
            out << fmt_exact(row.temperature) << "," << metric << "," << fmt_exact(stat.mean)
                << "," << fmt_exact(stat.std_dev) << "," << stat.per_run.size() << "\n";
        };
        line("overall", row.overall);
        line("lp", row.lp);
        line("mc", row.mc);
        line("fv", row.fv);
        line("fq", row.fq);
    }
    return out.str();
}

std::string robustness_to_markdown(const RobustnessReport& report) {
    const ReportMetadata& m = report.metadata;
    std::ostringstream out;
    out << "# Temperature robustness\n\n";
    out << "- Corpus: " << m.corpus_path << "\n";
    out << "- Backend: " << m.backend << ", judge model: " << m.judge_model << "\n";
    out << "- Mode: " << m.mode;
    if (!m.synthesis.empty()) out << ", synthesis: " << m.synthesis;
    out << "\n";
    out << "- Runs per temperature: " << report.runs_per_temperature
        << " (sampling salts 0.." << report.runs_per_temperature - 1 << ", cache off)\n\n";
    out << "Corpus means over runs, mean ± population std:\n\n";
    out << "| temperature | overall | LP | MC | FV | FQ |\n";
    out << "| --- | --- | --- | --- | --- | --- |\n";
    for (const RobustnessRow& row : report.rows) {
        const auto cell = [](const RobustnessStat& s) {
            return fmt4(s.mean) + " ± " + fmt4(s.std_dev);
        };
        out << "| " << fmt4(row.temperature) << " | " << cell(row.overall) << " | "
            << cell(row.lp) << " | " << cell(row.mc) << " | " << cell(row.fv) << " | "
            << cell(row.fq) << " |\n";
    }
    return out.str();
}

std::filesystem::path write_robustness_files(const RobustnessReport& report,
                                             const std::filesystem::path& out_dir) {
    const std::filesystem::path json_path = out_dir / "robustness.json";
    atomic_write_text(json_path, robustness_to_json_text(report));
    atomic_write_text(out_dir / "robustness.csv", robustness_to_csv(report));
    atomic_write_text(out_dir / "robustness.md", robustness_to_markdown(report));
    return json_path;
}

// ---------------------------------------------------------------------------
// Cross-judge comparison

CompareReport run_compare(const std::vector<RunConfig>& configs, RunStats* stats) {
    if (configs.size() < 2)
        throw ConfigError("compare needs at least two judge configurations");
    for (const RunConfig& config : configs)
        if (config.corpus != configs.front().corpus)
            throw ConfigError("compare requires every configuration to use the same corpus");

    CompareReport out;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        out.labels.push_back("config" + std::to_string(i));
        out.reports.push_back(evaluate_core(configs[i], false, stats));
    }

    // Correlate per-item overall scores over items scored by every config.
    using Key = std::pair<std::string, std::string>;
    std::vector<std::map<Key, double>> scored(out.reports.size());
    for (std::size_t i = 0; i < out.reports.size(); ++i)
        for (const ItemResult& item : out.reports[i].items)
            if (!item.errored && item.overall)
                scored[i].emplace(Key{item.statement_id, item.candidate_id}, *item.overall);

    std::vector<std::vector<double>> columns(out.reports.size());
    for (const ItemResult& item : out.reports.front().items) {
        if (item.errored || !item.overall) continue;
        const Key key{item.statement_id, item.candidate_id};
        bool everywhere = true;
        for (std::size_t i = 1; i < scored.size() && everywhere; ++i)
            everywhere = scored[i].count(key) > 0;
        if (!everywhere) continue;
        for (std::size_t i = 0; i < scored.size(); ++i) columns[i].push_back(scored[i].at(key));
    }
    out.n_correlated = columns.front().size();
    if (out.n_correlated >= 2) {
        out.correlations = correlation_matrix(out.labels, columns);
    } else {
        out.correlations.names = out.labels;
        out.correlations.values.assign(out.labels.size(),
                                       std::vector<std::optional<double>>(out.labels.size()));
        for (std::size_t i = 0; i < out.labels.size(); ++i)
            out.correlations.values[i][i] = 1.0;
    }
    return out;
}

namespace {

ordered_json correlation_matrix_json(const CorrelationMatrix& matrix) {
    ordered_json j;
    j["names"] = matrix.names;
    ordered_json rows = ordered_json::array();
    for (const auto& row : matrix.values) {
        ordered_json cells = ordered_json::array();
        for (const auto& cell : row) cells.push_back(opt_json(cell));
        rows.push_back(cells);
    }
    j["matrix"] = rows;
    return j;
}

} // namespace

std::string compare_to_json_text(const CompareReport& report) {
    ordered_json root;
    root["format"] = "formeval/compare/v1";
    root["labels"] = report.labels;
    root["n_correlated"] = report.n_correlated;
    root["correlations"] = correlation_matrix_json(report.correlations);
    ordered_json reports = ordered_json::array();
    for (const EvaluationReport& r : report.reports) reports.push_back(report_to_json(r));
    root["reports"] = reports;
    return root.dump(2) + "\n";
}

std::string compare_to_markdown(const CompareReport& report) {
    std::ostringstream out;
    out << "# Judge comparison\n\n";
    if (!report.reports.empty())
        out << "- Corpus: " << report.reports.front().metadata.corpus_path << "\n";
    out << "- Items correlated: " << report.n_correlated << "\n\n";
    out << "| label | backend | judge model | temperature | mode | synthesis | weights |\n";
    out << "| --- | --- | --- | --- | --- | --- | --- |\n";
    for (std::size_t i = 0; i < report.reports.size(); ++i) {
        const ReportMetadata& m = report.reports[i].metadata;
        out << "| " << report.labels[i] << " | " << m.backend << " | " << m.judge_model
            << " | " << fmt4(m.temperature) << " | " << m.mode << " | "
            << (m.synthesis.empty() ? "n/a" : m.synthesis) << " | "
            << (m.weights_source.empty() ? "n/a" : m.weights_source) << " |\n";
    }
    out << "\n## Mean overall per config\n\n";
    out << "| label | n scored | mean overall |\n";
    out << "| --- | --- | --- |\n";
    for (std::size_t i = 0; i < report.reports.size(); ++i) {
        RunningStats stats;
        for (const ItemResult& item : report.reports[i].items)
            if (!item.errored && item.overall) stats.add(*item.overall);
        out << "| " << report.labels[i] << " | " << stats.count() << " | "
            << (stats.count() ? fmt4(stats.mean()) : std::string("n/a")) << " |\n";
    }
    out << "\n## Overall-score correlations\n\n";
    out << "|  |";
    for (const std::string& name : report.correlations.names) out << " " << name << " |";
    out << "\n| --- |";
    for (std::size_t i = 0; i < report.correlations.names.size(); ++i) out << " --- |";
    out << "\n";
    for (std::size_t i = 0; i < report.correlations.names.size(); ++i) {
        out << "| " << report.correlations.names[i] << " |";
        for (const auto& cell : report.correlations.values[i]) out << " " << fmt_opt4(cell)
                                                                   << " |";
        out << "\n";
    }
    return out.str();
}

std::string correlations_to_csv(const CorrelationMatrix& matrix) {
    std::ostringstream out;
    out << "label";
    for (const std::string& name : matrix.names) out << "," << name;
    out << "\n";
    for (std::size_t i = 0; i < matrix.names.size(); ++i) {
        out << matrix.names[i];
        for (const auto& cell : matrix.values[i]) {
            out << ",";
            if (cell) out << fmt_exact(*cell);
        }
        out << "\n";
    }
    return out.str();
}

std::filesystem::path write_compare_files(const CompareReport& report,
                                          const std::filesystem::path& out_dir) {
    const std::filesystem::path json_path = out_dir / "compare.json";
    atomic_write_text(json_path, compare_to_json_text(report));
    atomic_write_text(out_dir / "compare.md", compare_to_markdown(report));
    atomic_write_text(out_dir / "correlations.csv", correlations_to_csv(report.correlations));
    return json_path;
}

// ---------------------------------------------------------------------------
// Agreement against human annotations

AgreementReport run_agreement(const EvaluationReport& report,
                              const std::vector<AnnotationRecord>& annotations) {
    using Key = std::pair<std::string, std::string>;
    std::map<Key, const AnnotationRecord*> by_key;
    for (const AnnotationRecord& a : annotations) {
        if (!by_key.emplace(Key{a.statement_id, a.candidate_id}, &a).second)
            throw InputError("duplicate annotation for (" + a.statement_id + ", " +
                             a.candidate_id + ")");
    }
    std::set<Key> item_keys;
    for (const ItemResult& item : report.items)
        item_keys.insert(Key{item.statement_id, item.candidate_id});
    for (const AnnotationRecord& a : annotations)
        if (!item_keys.count(Key{a.statement_id, a.candidate_id}))
            throw InputError("annotation (" + a.statement_id + ", " + a.candidate_id +
                             ") has no item in the report");

    AgreementReport out;
    std::array<std::vector<int>, 4> aspect_pred, aspect_gold;
    std::vector<double> overall_pred, overall_target;
    std::array<std::vector<double>, 3> baseline_pred; // bleu, chrf, ruby
    std::vector<double> baseline_target;
    std::vector<int> fv_pred, fv_gold;

    for (const ItemResult& item : report.items) {
        if (item.errored) continue; // annotations on errored items are skipped
        const auto found = by_key.find(Key{item.statement_id, item.candidate_id});
        if (found == by_key.end())
            throw InputError("scored item (" + item.statement_id + ", " + item.candidate_id +
                             ") has no annotation");
        const AnnotationRecord& a = *found->second;
        ++out.n_joined;

        if (item.aspects) {
            const std::array<int, 4> gold{a.lp, a.mc, a.fv, a.fq};
            for (std::size_t k = 0; k < 4; ++k) {
                aspect_pred[k].push_back(item.aspects->get(kAllAspects[k]) >= 0.5 ? 1 : 0);
                aspect_gold[k].push_back(gold[k]);
            }
        }
        if (item.overall) {
            overall_pred.push_back(*item.overall);
            overall_target.push_back(normalize_rating(a.overall_5pt));
        }
        if (item.baselines) {
            baseline_pred[0].push_back(item.baselines->bleu);
            baseline_pred[1].push_back(item.baselines->chrf);
            baseline_pred[2].push_back(item.baselines->ruby_sts);
            baseline_target.push_back(normalize_rating(a.overall_5pt));
        }
        if (item.fv_judge && item.prover_valid) {
            fv_pred.push_back(*item.fv_judge >= 0.5 ? 1 : 0);
            fv_gold.push_back(*item.prover_valid ? 1 : 0);
        }
    }

    static const std::array<const char*, 4> kAspectKeys{"lp", "mc", "fv", "fq"};
    for (std::size_t k = 0; k < 4; ++k) {
        if (aspect_pred[k].empty()) continue;
        out.aspects.emplace_back(kAspectKeys[k],
                                 classification_report(aspect_pred[k], aspect_gold[k]));
    }

    out.overall.n = overall_pred.size();
    if (overall_pred.size() >= 2) out.overall.correlation = pearson(overall_pred, overall_target);
    if (!overall_pred.empty()) out.overall.nrmse = nrmse(overall_pred, overall_target);

    static const std::array<const char*, 3> kBaselineKeys{"bleu", "chrf", "ruby_sts"};
    for (std::size_t k = 0; k < 3; ++k) {
        if (baseline_pred[k].empty()) continue;
        ScoreAgreement agreement;
        agreement.n = baseline_pred[k].size();
        if (agreement.n >= 2) agreement.correlation = pearson(baseline_pred[k], baseline_target);
        out.baselines.emplace_back(kBaselineKeys[k], agreement);
    }

    if (!fv_pred.empty()) out.prover_vs_judge_fv = classification_report(fv_pred, fv_gold);
    return out;
}

namespace {

ordered_json classification_json(const ClassificationReport& report) {
    ordered_json j;
    j["accuracy"] = report.accuracy;
    j["precision"] = opt_json(report.precision);
    j["recall"] = opt_json(report.recall);
    j["f1"] = opt_json(report.f1);
    j["kappa"] = opt_json(report.kappa);
    j["counts"] = ordered_json{{"tp", report.counts.tp},
                               {"fp", report.counts.fp},
                               {"fn", report.counts.fn},
                               {"tn", report.counts.tn}};
    return j;
}

ordered_json score_agreement_json(const ScoreAgreement& agreement) {
    ordered_json j;
    j["correlation"] = opt_json(agreement.correlation);
    j["nrmse"] = opt_json(agreement.nrmse);
    j["n"] = agreement.n;
    return j;
}

} // namespace

std::string agreement_to_json_text(const AgreementReport& report) {
    ordered_json root;
    root["format"] = "formeval/agreement/v1";
    root["n_joined"] = report.n_joined;
    ordered_json aspects = ordered_json::object();
    for (const auto& [name, classification] : report.aspects)
        aspects[name] = classification_json(classification);
    root["aspects"] = aspects;
    root["overall"] = score_agreement_json(report.overall);
    ordered_json baselines = ordered_json::object();
    for (const auto& [name, agreement] : report.baselines)
        baselines[name] = score_agreement_json(agreement);
    root["baselines"] = baselines;
    if (report.prover_vs_judge_fv)
        root["prover_vs_judge_fv"] = classification_json(*report.prover_vs_judge_fv);
    return root.dump(2) + "\n";
}

std::string agreement_to_markdown(const AgreementReport& report) {
    std::ostringstream out;
    out << "# Agreement with human annotations\n\n";
    out << "- Joined items: " << report.n_joined << "\n";
    if (!report.aspects.empty()) {
        out << "\n## Aspect labels (system vs human)\n\n";
        out << "| aspect | accuracy | precision | recall | F1 | kappa | TP | FP | FN | TN |\n";
        out << "| --- | --- | --- | --- | --- | --- | --- | --- | --- | --- |\n";
        for (const auto& [name, c] : report.aspects) {
            out << "| " << name << " | " << fmt4(c.accuracy) << " | " << fmt_opt4(c.precision)
                << " | " << fmt_opt4(c.recall) << " | " << fmt_opt4(c.f1) << " | "
                << fmt_opt4(c.kappa) << " | " << c.counts.tp << " | " << c.counts.fp << " | "
                << c.counts.fn << " | " << c.counts.tn << " |\n";
        }
    }
    out << "\n## Overall score vs 5-point rating\n\n";
    out << "- Pearson r: " << fmt_opt4(report.overall.correlation) << "\n";
    out << "- NRMSE: " << fmt_opt4(report.overall.nrmse) << "\n";
    out << "- n: " << report.overall.n << "\n";
    if (!report.baselines.empty()) {
        out << "\n## Reference baselines vs 5-point rating\n\n";
        out << "| metric | Pearson r | n |\n";
        out << "| --- | --- | --- |\n";
        for (const auto& [name, agreement] : report.baselines)
            out << "| " << name << " | " << fmt_opt4(agreement.correlation) << " | "
                << agreement.n << " |\n";
    }
    if (report.prover_vs_judge_fv) {
        const ClassificationReport& c = *report.prover_vs_judge_fv;
        out << "\n## Judged FV vs prover validity\n\n";
        out << "- Accuracy: " << fmt4(c.accuracy) << ", kappa: " << fmt_opt4(c.kappa) << "\n";
        out << "- Counts: TP " << c.counts.tp << ", FP " << c.counts.fp << ", FN "
            << c.counts.fn << ", TN " << c.counts.tn << "\n";
    }
    return out.str();
}

std::filesystem::path write_agreement_files(const AgreementReport& report,
                                            const std::filesystem::path& out_dir) {
    const std::filesystem::path json_path = out_dir / "agreement.json";
    atomic_write_text(json_path, agreement_to_json_text(report));
    atomic_write_text(out_dir / "agreement.md", agreement_to_markdown(report));
    return json_path;
}

// ---------------------------------------------------------------------------
// Reference-based baselines

BaselineReport run_baselines(const std::vector<StatementRecord>& corpus,
                             const std::string& corpus_path) {
    BaselineReport out;
    out.corpus_path = corpus_path;
    for (const StatementRecord& record : corpus) {
        const CandidateFormalization* reference = nullptr;
        for (const CandidateFormalization& candidate : record.candidates)
            if (candidate.origin.kind == CandidateOrigin::Kind::GroundTruth) {
                reference = &candidate;
                break;
            }
        if (!reference) continue;
        for (const CandidateFormalization& candidate : record.candidates) {
            if (candidate.origin.kind != CandidateOrigin::Kind::ModelOutput) continue;
            BaselineReport::Item item;
            item.statement_id = record.id;
            item.candidate_id = candidate.candidate_id;
            item.origin_label = origin_label_of(candidate.origin);
            item.scores.bleu = bleu(candidate.code, reference->code);
            item.scores.chrf = chrf(candidate.code, reference->code);
            item.scores.ruby_sts = ruby_sts(candidate.code, reference->code);
            out.items.push_back(std::move(item));
        }
    }
    return out;
}

std::string baselines_to_json_text(const BaselineReport& report) {
    ordered_json root;
    root["format"] = "formeval/baselines/v1";
    root["corpus"] = report.corpus_path;
    ordered_json items = ordered_json::array();
    for (const BaselineReport::Item& item : report.items) {
        items.push_back(ordered_json{{"statement_id", item.statement_id},
                                     {"candidate_id", item.candidate_id},
                                     {"origin", item.origin_label},
                                     {"bleu", item.scores.bleu},
                                     {"chrf", item.scores.chrf},
                                     {"ruby_sts", item.scores.ruby_sts}});
    }
    root["items"] = items;
    return root.dump(2) + "\n";
}

std::string baselines_to_csv(const BaselineReport& report) {
    std::ostringstream out;
    out << "statement_id,candidate_id,origin,bleu,chrf,ruby_sts\n";
    for (const BaselineReport::Item& item : report.items) {
        out << item.statement_id << "," << item.candidate_id << "," << item.origin_label << ","
            << fmt_exact(item.scores.bleu) << "," << fmt_exact(item.scores.chrf) << ","
            << fmt_exact(item.scores.ruby_sts) << "\n";
    }
    return out.str();
}

std::filesystem::path write_baseline_files(const BaselineReport& report,
                                           const std::filesystem::path& out_dir) {
    const std::filesystem::path json_path = out_dir / "baselines.json";
    atomic_write_text(json_path, baselines_to_json_text(report));
    atomic_write_text(out_dir / "baselines.csv", baselines_to_csv(report));
    return json_path;
}

} // namespace formeval
