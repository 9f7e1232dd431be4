#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "formeval/core.hpp"
#include "formeval/criteria.hpp"
#include "formeval/errors.hpp"
#include "formeval/prompts.hpp"

namespace formeval {

// Runtime settings shared by all judge backends.
struct JudgeConfig {
    std::string model_name = "gpt-4.1-mini";
    double temperature = 0.2;
    // Additional completions requested when a response fails to parse.
    int max_retries = 2;
    double request_timeout_seconds = 60.0;
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    int concurrency_limit = 8;
    // Distinguishes repeated samplings of the same prompt (e.g. the run
    // index of a stability experiment). Folded into cache keys and into
    // the stub backend's hash channel.
    std::string sampling_salt;
};

// Temperature quantized to an integer millikelvin-style unit so that cache
// keys and stub hash keys never depend on floating-point formatting.
int temperature_millis(double temperature);

struct JudgeRequest {
    std::string prompt;
    std::string criterion_id;
    std::string model;
    double temperature = 0.2;
    std::string salt;
};

struct BackendResult {
    bool ok = false;
    std::string raw;    // model output when ok
    std::string error;  // transport/protocol diagnostics otherwise
};

class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;

    virtual BackendResult complete(const JudgeRequest& request) = 0;

    // Stable identifier folded into verdict cache keys. Two backends with
    // the same id must produce interchangeable completions.
    virtual std::string id() const = 0;

    // Deterministic backends always return the same completion for the same
    // request; reports produced from them use a fixed timestamp so repeated
    // runs are byte-identical.
    virtual bool deterministic() const { return false; }
};

// Offline judge that derives each verdict from a hash of the request. The
// positive-judgment channel is:
//
//   key  = "stub|seed=<seed>|salt=<salt>|t=<temperature_millis>|" + prompt
//   draw = fnv1a64(key) / 2^64
//
// and the verdict is "true" iff draw < bias (bias >= 1 is always true,
// bias <= 0 always false). The bias may be a single value or keyed by
// temperature_millis, which lets stability experiments model judges whose
// consistency degrades as the temperature rises.
class StubBackend : public JudgeBackend {
public:
    StubBackend(std::uint64_t seed, double bias);
    StubBackend(std::uint64_t seed, std::map<int, double> bias_by_millis);

    BackendResult complete(const JudgeRequest& request) override;
    std::string id() const override;
    bool deterministic() const override { return true; }

    // The exact hash key thresholded for a request; exposed so tests can
    // enumerate expected draws without private access.
    static std::string hash_key(std::uint64_t seed, const std::string& salt,
                                double temperature, const std::string& prompt);

private:
    std::optional<double> bias_for(double temperature) const;

    std::uint64_t seed_ = 0;
    std::optional<double> default_bias_;
    std::map<int, double> bias_by_millis_;
};

struct HttpBackendOptions {
    std::string endpoint;  // full chat-completions URL
    std::string api_key;   // sent as a bearer token when non-empty
    int transport_attempts = 3;
    double backoff_base_seconds = 0.25;
};

// Chat-completions client. Transport failures, HTTP 429 and 5xx responses
// are retried with exponential backoff; other statuses fail immediately.
class HttpJudgeBackend : public JudgeBackend {
public:
    HttpJudgeBackend(HttpBackendOptions options, double request_timeout_seconds);

    BackendResult complete(const JudgeRequest& request) override;
    std::string id() const override;

private:
    HttpBackendOptions options_;
    double request_timeout_seconds_;
};

// Forwards to an inner backend while counting completions. The pipeline
// wraps every backend in one of these and reports the count on stdout.
class CountingBackend : public JudgeBackend {
public:
    explicit CountingBackend(JudgeBackend& inner) : inner_(inner) {}

    BackendResult complete(const JudgeRequest& request) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.complete(request);
    }
    std::string id() const override { return inner_.id(); }
    bool deterministic() const override { return inner_.deterministic(); }

    std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

private:
    JudgeBackend& inner_;
    std::atomic<std::uint64_t> calls_{0};
};

// Builds a backend from a CLI-style spec:
//   "stub:seed=7,bias=0.8"
//   "stub:seed=3,bias@0.2=1.0,bias@1.0=0.5"
//   "http"  (uses config.endpoint and the FORMEVAL_API_KEY environment key)
// Throws ConfigError on malformed specs or a missing API key.
std::unique_ptr<JudgeBackend> make_backend(const std::string& spec, const JudgeConfig& config);

// Disk cache of judged responses, keyed by everything that determines a
// completion: backend id, model, temperature, sampling salt, criterion, and
// digests of the statement and code. Each entry is one content-addressed
// JSON file holding the prompt hash, the raw response, the parsed verdict,
// and a storage timestamp. Only responses that parsed are stored, via
// write-to-temp-then-rename so readers never see a partial file. Safe for
// concurrent use within one process.
class VerdictCache {
public:
    explicit VerdictCache(std::filesystem::path dir);

    static std::string key(const std::string& backend_id, const std::string& model,
                           double temperature, const std::string& salt,
                           const std::string& criterion_id, const std::string& statement,
                           const std::string& code);

    // Returns the stored raw response for re-parsing.
    std::optional<std::string> lookup(const std::string& key);
    void store(const std::string& key, const std::string& raw, const std::string& prompt,
               const Verdict& verdict);

    std::uint64_t hits() const { return hits_.load(std::memory_order_relaxed); }
    std::uint64_t misses() const { return misses_.load(std::memory_order_relaxed); }

private:
    std::filesystem::path dir_;
    std::mutex mutex_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::uint64_t tmp_counter_ = 0;
};

enum class JudgeOutcome {
    Ok,               // parsed verdict available
    Unparsable,       // backend responded but no attempt yielded a verdict
    JudgeUnavailable, // backend failed at the transport/protocol level
    Error,            // an exception surfaced while preparing or judging
};

std::string_view judge_outcome_name(JudgeOutcome outcome);

struct JudgeResult {
    JudgeOutcome outcome = JudgeOutcome::Error;
    std::optional<Verdict> verdict;
    std::string error;
    int attempts = 0;       // completions consumed (0 on a cache hit)
    bool from_cache = false;
};

// Renders the prompt for one criterion and obtains a parsed verdict,
// consulting the cache first and retrying unparsable completions up to
// config.max_retries extra times.
JudgeResult judge_one(JudgeBackend& backend, const JudgeConfig& config,
                      const Criterion& criterion, const FormalLanguage& language,
                      const std::string& statement, const std::string& code,
                      VerdictCache* cache = nullptr);

struct JudgeTask {
    std::string key;  // caller-chosen label echoed back with the result
    const Criterion* criterion = nullptr;
    FormalLanguage language = FormalLanguage::isabelle_hol();
    std::string statement;
    std::string code;
};

// Judges every task on a pool of at most config.concurrency_limit threads.
// Results come back in task order, and a failure in one task (including a
// thrown exception) is recorded in its slot without disturbing the rest.
std::vector<std::pair<std::string, JudgeResult>>
judge_batch(JudgeBackend& backend, const JudgeConfig& config,
            const std::vector<JudgeTask>& tasks, VerdictCache* cache = nullptr);

} // namespace formeval
