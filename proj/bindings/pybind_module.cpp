// Python bindings over the core scoring operations. Heavyweight orchestration
// (judging a corpus end to end) is exposed as functions returning report JSON
// text; the python package parses it into dicts.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "formeval/core.hpp"
#include "formeval/criteria.hpp"
#include "formeval/ensemble.hpp"
#include "formeval/metrics.hpp"
#include "formeval/pipeline.hpp"
#include "formeval/prompts.hpp"
#include "formeval/prover.hpp"

namespace py = pybind11;
using namespace formeval;

namespace {

EnsembleWeights weights_from_dict(const py::dict& d) {
    EnsembleWeights w;
    w.lp = d["lp"].cast<double>();
    w.mc = d["mc"].cast<double>();
    w.fv = d["fv"].cast<double>();
    w.fq = d["fq"].cast<double>();
    return w;
}

py::dict weights_to_dict(const EnsembleWeights& w) {
    py::dict d;
    d["lp"] = w.lp;
    d["mc"] = w.mc;
    d["fv"] = w.fv;
    d["fq"] = w.fq;
    return d;
}

FormalLanguage language_from_name(const std::string& name) {
    const auto language = FormalLanguage::from_schema_name(name);
    if (!language) throw InputError("unknown formal language \"" + name + "\"");
    return *language;
}

RunConfig build_config(const std::string& corpus, const std::string& backend,
                       const std::string& judge_model, double temperature,
                       const std::string& salt, const std::string& prover,
                       const std::string& prover_cmd, double timeout,
                       const std::string& out_dir, bool cache, bool judge_fv) {
    RunConfig config;
    config.corpus = corpus;
    config.backend_spec = backend;
    config.judge.model_name = judge_model;
    config.judge.temperature = temperature;
    config.judge.sampling_salt = salt;
    if (!prover.empty() && !prover_cmd.empty())
        throw ConfigError("pass either prover (mock:MODE) or prover_cmd, not both");
    if (!prover.empty()) {
        if (prover.rfind("mock:", 0) != 0)
            throw ConfigError("prover only accepts mock:MODE; use prover_cmd otherwise");
        config.prover =
            make_mock_prover(std::filesystem::path(out_dir) / "mock_prover", prover.substr(5));
        config.prover_display = prover;
    } else if (!prover_cmd.empty()) {
        config.prover.command_template = prover_cmd;
        config.prover_display = prover_cmd;
    }
    config.prover.timeout_seconds = timeout;
    config.out_dir = out_dir;
    config.use_cache = cache;
    config.judge_fv = judge_fv;
    return config;
}

} // namespace

PYBIND11_MODULE(_formeval, m) {
    m.doc() = "Core scoring operations for LLM-judged autoformalization evaluation";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<LoadError>(m, "LoadError", PyExc_IOError);

    m.def("paper_weights", [] { return weights_to_dict(paper_weights()); },
          "The published overall weights (lp, mc, fv, fq).");

    m.def(
        "overall_score",
        [](double lp, double mc, double fv, double fq, const py::object& weights) {
            AspectScores aspects{lp, mc, fv, fq};
            const EnsembleWeights w = weights.is_none()
                                          ? paper_weights()
                                          : weights_from_dict(weights.cast<py::dict>());
            return overall_score(aspects, w);
        },
        py::arg("lp"), py::arg("mc"), py::arg("fv"), py::arg("fq"),
        py::arg("weights") = py::none(),
        "Weighted overall score of the four aspect scores.");

    m.def(
        "fit_weights",
        [](const std::vector<std::array<double, 4>>& X, const std::vector<double>& y) {
            const FitResult fit = fit_weights(X, y);
            py::dict d;
            d["weights"] = weights_to_dict(fit.weights);
            d["objective"] = fit.objective;
            d["nrmse"] = fit.nrmse ? py::cast(*fit.nrmse) : py::none();
            d["correlation"] = fit.correlation ? py::cast(*fit.correlation) : py::none();
            return d;
        },
        py::arg("X"), py::arg("y"),
        "Exact simplex-constrained least squares over rows (lp, mc, fv, fq).");

    m.def(
        "synthesize",
        [](const py::dict& profile, const std::string& method) {
            OapProfile oaps;
            for (const auto& item : profile) {
                const auto name = item.first.cast<std::string>();
                const auto oap = oap_from_name(name);
                if (!oap) throw InputError("unknown atomic property \"" + name + "\"");
                oaps[*oap] = item.second.cast<int>();
            }
            const CriteriaRegistry& registry = CriteriaRegistry::builtin();
            std::vector<AspectId> aspects;
            for (AspectId aspect : kAllAspects) {
                const auto& group = registry.aspect_oaps(aspect);
                const bool have_all = std::all_of(group.begin(), group.end(),
                                                  [&](OapId o) { return oaps.count(o) > 0; });
                if (have_all) aspects.push_back(aspect);
            }
            const auto scores = method == "and" ? and_synthesis(oaps, registry, aspects)
                                                : wa_synthesis(oaps, registry, aspects);
            py::dict d;
            for (const auto& [aspect, score] : scores)
                d[py::str(std::string(aspect_name(aspect)))] = score;
            return d;
        },
        py::arg("profile"), py::arg("method") = "wa",
        "Aspect scores from a {property_name: 0/1} profile; method \"and\" or \"wa\".");

    m.def("normalize_rating", &normalize_rating, py::arg("rating"),
          "Maps a 5-point rating onto [0,1] by (r-1)/4.");

    m.def("bleu", &bleu, py::arg("candidate"), py::arg("reference"));
    m.def("chrf", &chrf, py::arg("candidate"), py::arg("reference"));
    m.def("ruby_sts", &ruby_sts, py::arg("candidate"), py::arg("reference"));

    m.def(
        "pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) -> py::object {
            const auto r = pearson(x, y);
            return r ? py::cast(*r) : py::none();
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "classification_report",
        [](const std::vector<int>& pred, const std::vector<int>& gold) {
            const ClassificationReport report = classification_report(pred, gold);
            py::dict d;
            d["accuracy"] = report.accuracy;
            d["precision"] = report.precision ? py::cast(*report.precision) : py::none();
            d["recall"] = report.recall ? py::cast(*report.recall) : py::none();
            d["f1"] = report.f1 ? py::cast(*report.f1) : py::none();
            d["kappa"] = report.kappa ? py::cast(*report.kappa) : py::none();
            py::dict counts;
            counts["tp"] = report.counts.tp;
            counts["fp"] = report.counts.fp;
            counts["fn"] = report.counts.fn;
            counts["tn"] = report.counts.tn;
            d["counts"] = counts;
            return d;
        },
        py::arg("pred"), py::arg("gold"));

    m.def("criterion_ids", [] {
        std::vector<std::string> ids;
        for (const Criterion& c : CriteriaRegistry::builtin().all()) ids.push_back(c.id);
        return ids;
    });

    m.def(
        "render_prompt",
        [](const std::string& criterion_id, const std::string& language,
           const std::string& statement, const std::string& code) {
            const Criterion& criterion = CriteriaRegistry::builtin().criterion(criterion_id);
            return render(criterion, language_from_name(language), statement, code).text;
        },
        py::arg("criterion_id"), py::arg("language"), py::arg("statement"), py::arg("code"));

    m.def(
        "parse_verdict",
        [](const std::string& raw, const std::string& criterion_id) -> py::object {
            const Criterion& criterion = CriteriaRegistry::builtin().criterion(criterion_id);
            const VerdictParse parse = parse_verdict(raw, criterion);
            if (!parse.ok()) return py::none();
            py::dict d;
            d["judgment"] = parse.verdict->judgment;
            d["explanation"] = parse.verdict->explanation;
            return d;
        },
        py::arg("raw"), py::arg("criterion_id"));

    m.def(
        "evaluate_json",
        [](const std::string& corpus, const std::string& backend, const std::string& mode,
           const std::string& synthesis, const std::string& weights,
           const std::string& judge_model, double temperature, const std::string& salt,
           const std::string& prover, const std::string& prover_cmd, double timeout,
           const std::string& out_dir, bool cache, bool judge_fv) {
            RunConfig config = build_config(corpus, backend, judge_model, temperature, salt,
                                            prover, prover_cmd, timeout, out_dir, cache,
                                            judge_fv);
            config.mode = mode == "direct" ? JudgeMode::Direct : JudgeMode::Oap;
            if (!synthesis.empty())
                config.synthesis = synthesis == "and" ? Synthesis::And : Synthesis::WA;
            config.weights = WeightsSource::parse(weights);
            return report_to_json_text(run_evaluation(config));
        },
        py::arg("corpus"), py::arg("backend") = "stub:seed=0,bias=0.5",
        py::arg("mode") = "oap", py::arg("synthesis") = "wa", py::arg("weights") = "paper",
        py::arg("judge_model") = "gpt-4.1-mini", py::arg("temperature") = 0.2,
        py::arg("salt") = "", py::arg("prover") = "mock:accept", py::arg("prover_cmd") = "",
        py::arg("timeout") = 300.0, py::arg("out_dir") = "out", py::arg("cache") = false,
        py::arg("judge_fv") = false,
        "Judge a corpus and return the evaluation report as JSON text.");

    m.def(
        "evaluate_overall_json",
        [](const std::string& corpus, const std::string& backend,
           const std::string& judge_model, double temperature, const std::string& salt,
           const std::string& prover, const std::string& prover_cmd, double timeout,
           const std::string& out_dir, bool cache, double gate) {
            RunConfig config = build_config(corpus, backend, judge_model, temperature, salt,
                                            prover, prover_cmd, timeout, out_dir, cache,
                                            false);
            config.gate = gate;
            return report_to_json_text(run_direct_overall(config));
        },
        py::arg("corpus"), py::arg("backend") = "stub:seed=0,bias=0.5",
        py::arg("judge_model") = "gpt-4.1-mini", py::arg("temperature") = 0.2,
        py::arg("salt") = "", py::arg("prover") = "mock:accept", py::arg("prover_cmd") = "",
        py::arg("timeout") = 300.0, py::arg("out_dir") = "out", py::arg("cache") = false,
        py::arg("gate") = 0.0,
        "One gated overall judgment per candidate; returns the report as JSON text.");
}
