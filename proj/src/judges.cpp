#include "formeval/judges.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "formeval/hashing.hpp"

namespace formeval {

int temperature_millis(double temperature) {
    if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
        throw InputError("temperature must lie in [0, 2]");
    }
    return static_cast<int>(std::llround(temperature * 1000.0));
}

namespace {

// Round-trip-precision formatting, used only inside backend identifiers so
// that distinct configurations never share a cache key.
std::string id_double(double value) {
    std::ostringstream os;
    os << std::setprecision(17) << value;
    return os.str();
}

std::string body_snippet(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

} // namespace

// ---------------------------------------------------------------------------
// StubBackend

StubBackend::StubBackend(std::uint64_t seed, double bias)
    : seed_(seed), default_bias_(bias) {}

StubBackend::StubBackend(std::uint64_t seed, std::map<int, double> bias_by_millis)
    : seed_(seed), bias_by_millis_(std::move(bias_by_millis)) {
    if (bias_by_millis_.empty()) throw ConfigError("stub bias map must not be empty");
}

std::string StubBackend::hash_key(std::uint64_t seed, const std::string& salt,
                                  double temperature, const std::string& prompt) {
    std::string key = "stub|seed=" + std::to_string(seed) + "|salt=" + salt +
                      "|t=" + std::to_string(temperature_millis(temperature)) + "|";
    key += prompt;
    return key;
}

std::optional<double> StubBackend::bias_for(double temperature) const {
    if (auto it = bias_by_millis_.find(temperature_millis(temperature));
        it != bias_by_millis_.end()) {
        return it->second;
    }
    return default_bias_;
}

BackendResult StubBackend::complete(const JudgeRequest& request) {
    const std::optional<double> bias = bias_for(request.temperature);
    if (!bias) {
        return {false, "",
                "stub backend has no bias for temperature " +
                    std::to_string(temperature_millis(request.temperature)) +
                    " (configure bias= or bias@T=)"};
    }
    const std::uint64_t hash = fnv1a64(hash_key(seed_, request.salt, request.temperature,
                                                request.prompt));
    bool positive;
    if (*bias >= 1.0) {
        positive = true;
    } else if (*bias <= 0.0) {
        positive = false;
    } else {
        positive = static_cast<double>(hash) * 0x1p-64 < *bias;
    }

    char hash_hex[17];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(hash));
    std::string raw = "%%%%%%%%%%\n";
    raw += "Explanation: deterministic stub channel produced hash 0x";
    raw += hash_hex;
    raw += positive ? ", which clears the configured bias.\n"
                    : ", which does not clear the configured bias.\n";
    raw += positive ? "Judgement: true\n" : "Judgement: false\n";
    raw += "%%%%%%%%%%\n";
    return {true, std::move(raw), ""};
}

std::string StubBackend::id() const {
    std::string id = "stub:seed=" + std::to_string(seed_);
    if (default_bias_) id += ",bias=" + id_double(*default_bias_);
    for (const auto& [millis, bias] : bias_by_millis_) {
        id += ",bias@m" + std::to_string(millis) + "=" + id_double(bias);
    }
    return id;
}

// ---------------------------------------------------------------------------
// HttpJudgeBackend

HttpJudgeBackend::HttpJudgeBackend(HttpBackendOptions options, double request_timeout_seconds)
    : options_(std::move(options)), request_timeout_seconds_(request_timeout_seconds) {
    if (options_.endpoint.find("://") == std::string::npos) {
        throw ConfigError("endpoint must be a full URL, got '" + options_.endpoint + "'");
    }
    if (options_.transport_attempts < 1) {
        throw ConfigError("transport_attempts must be at least 1");
    }
}

std::string HttpJudgeBackend::id() const { return "http:" + options_.endpoint; }

BackendResult HttpJudgeBackend::complete(const JudgeRequest& request) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (options_.endpoint.rfind("https://", 0) == 0) {
        return {false, "",
                "this build has no TLS support; use an http:// endpoint or rebuild with OpenSSL"};
    }
#endif
    const auto scheme_end = options_.endpoint.find("://");
    const auto path_start = options_.endpoint.find('/', scheme_end + 3);
    std::string base = options_.endpoint;
    std::string path = "/v1/chat/completions";
    if (path_start != std::string::npos) {
        base = options_.endpoint.substr(0, path_start);
        path = options_.endpoint.substr(path_start);
    }

    nlohmann::json message;
    message["role"] = "user";
    message["content"] = request.prompt;
    nlohmann::json body;
    body["model"] = request.model;
    body["temperature"] = request.temperature;
    body["messages"] = nlohmann::json::array({message});
    const std::string payload = body.dump();

    httplib::Client client(base);
    const auto timeout =
        std::chrono::milliseconds(std::llround(request_timeout_seconds_ * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    std::string last_error;
    for (int attempt = 0; attempt < options_.transport_attempts; ++attempt) {
        if (attempt > 0) {
            const double delay =
                options_.backoff_base_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error (code " +
                         std::to_string(static_cast<int>(res.error())) + ")";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + body_snippet(res->body);
            continue;
        }
        if (res->status != 200) {
            return {false, "",
                    "HTTP " + std::to_string(res->status) + ": " + body_snippet(res->body)};
        }
        nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) {
            return {false, "", "response body is not valid JSON: " + body_snippet(res->body)};
        }
        try {
            const auto& choices = parsed.at("choices");
            if (!choices.is_array() || choices.empty()) {
                return {false, "", "chat response has no choices"};
            }
            std::string content =
                choices.at(0).at("message").at("content").get<std::string>();
            return {true, std::move(content), ""};
        } catch (const nlohmann::json::exception& e) {
            return {false, "", std::string("malformed chat response: ") + e.what()};
        }
    }
    return {false, "",
            last_error.empty() ? "exhausted transport attempts" : last_error};
}

// ---------------------------------------------------------------------------
// Backend specs

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string::size_type start = 0;
    while (start <= text.size()) {
        const auto end = text.find(sep, start);
        if (end == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

double parse_spec_double(const std::string& value, const std::string& what) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("backend spec: cannot parse " + what + " value '" + value + "'");
    }
}

} // namespace

std::unique_ptr<JudgeBackend> make_backend(const std::string& spec, const JudgeConfig& config) {
    const auto colon = spec.find(':');
    const std::string head = colon == std::string::npos ? spec : spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (head == "stub") {
        std::uint64_t seed = 0;
        std::optional<double> bias;
        std::map<int, double> bias_by_millis;
        for (const std::string& token : split(rest, ',')) {
            if (token.empty()) {
                throw ConfigError("backend spec: empty option in '" + spec + "'");
            }
            const auto eq = token.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("backend spec: option '" + token + "' is not key=value");
            }
            const std::string key = token.substr(0, eq);
            const std::string value = token.substr(eq + 1);
            if (key == "seed") {
                try {
                    std::size_t used = 0;
                    seed = std::stoull(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                } catch (const std::exception&) {
                    throw ConfigError("backend spec: cannot parse seed value '" + value + "'");
                }
            } else if (key == "bias") {
                bias = parse_spec_double(value, "bias");
            } else if (key.rfind("bias@", 0) == 0) {
                const double temperature = parse_spec_double(key.substr(5), "bias temperature");
                try {
                    bias_by_millis[temperature_millis(temperature)] =
                        parse_spec_double(value, "bias");
                } catch (const InputError& e) {
                    throw ConfigError("backend spec: " + std::string(e.what()));
                }
            } else {
                throw ConfigError("backend spec: unknown stub option '" + key + "'");
            }
        }
        if (bias && !bias_by_millis.empty()) {
            throw ConfigError("backend spec: give either bias= or bias@T= options, not both");
        }
        if (bias) return std::make_unique<StubBackend>(seed, *bias);
        if (!bias_by_millis.empty()) {
            return std::make_unique<StubBackend>(seed, std::move(bias_by_millis));
        }
        throw ConfigError("backend spec: stub needs bias= or bias@T= options");
    }

    if (head == "http" || head == "https") {
        HttpBackendOptions options;
        if (rest.rfind("//", 0) == 0) {
            options.endpoint = spec;  // the spec itself is a URL
        } else {
            options.endpoint = rest.empty() ? config.endpoint : rest;
        }
        const char* key = std::getenv("FORMEVAL_API_KEY");
        options.api_key = key == nullptr ? "" : key;
        if (options.api_key.empty()) {
            throw ConfigError("http backend requires the FORMEVAL_API_KEY environment variable");
        }
        return std::make_unique<HttpJudgeBackend>(std::move(options),
                                                  config.request_timeout_seconds);
    }

    throw ConfigError("unknown judge backend '" + head + "' (expected stub:... or http)");
}

// ---------------------------------------------------------------------------
// VerdictCache

VerdictCache::VerdictCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw ConfigError("cannot create cache directory " + dir_.string() + ": " + ec.message());
    }
}

std::string VerdictCache::key(const std::string& backend_id, const std::string& model,
                              double temperature, const std::string& salt,
                              const std::string& criterion_id, const std::string& statement,
                              const std::string& code) {
    std::string material;
    material += "backend=" + backend_id + "\n";
    material += "model=" + model + "\n";
    material += "t=" + std::to_string(temperature_millis(temperature)) + "\n";
    material += "salt=" + salt + "\n";
    material += "criterion=" + criterion_id + "\n";
    material += "statement_sha256=" + sha256_hex(statement) + "\n";
    material += "code_sha256=" + sha256_hex(code) + "\n";
    return sha256_hex(material);
}

std::optional<std::string> VerdictCache::lookup(const std::string& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ifstream in(dir_ / (key + ".json"), std::ios::binary);
    if (!in) {
        misses_.fetch_add(1, std::memory_order_relaxed);
        return std::nullopt;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json entry = nlohmann::json::parse(buffer.str(), nullptr, false);
    if (entry.is_discarded() || !entry.contains("raw") || !entry["raw"].is_string()) {
        misses_.fetch_add(1, std::memory_order_relaxed);
        return std::nullopt;
    }
    hits_.fetch_add(1, std::memory_order_relaxed);
    return entry["raw"].get<std::string>();
}

namespace {

std::string iso8601_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char text[32];
    std::strftime(text, sizeof text, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return text;
}

} // namespace

void VerdictCache::store(const std::string& key, const std::string& raw,
                         const std::string& prompt, const Verdict& verdict) {
    // Best effort: a run must not fail because a verdict could not be
    // cached, and the target directory was already validated on startup.
    std::lock_guard<std::mutex> lock(mutex_);
    const std::filesystem::path path = dir_ / (key + ".json");
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) return;

    nlohmann::ordered_json entry;
    entry["prompt_sha256"] = sha256_hex(prompt);
    entry["raw"] = raw;
    entry["criterion"] = verdict.criterion_id;
    entry["judgment"] = verdict.judgment;
    entry["explanation"] = verdict.explanation;
    entry["stored_at"] = iso8601_now();
    const std::string payload = entry.dump(2) + "\n";

    const std::filesystem::path tmp = dir_ / (key + ".tmp" + std::to_string(++tmp_counter_));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp, ec);
            return;
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
}

// ---------------------------------------------------------------------------
// Judging

std::string_view judge_outcome_name(JudgeOutcome outcome) {
    switch (outcome) {
    case JudgeOutcome::Ok: return "ok";
    case JudgeOutcome::Unparsable: return "unparsable";
    case JudgeOutcome::JudgeUnavailable: return "judge_unavailable";
    case JudgeOutcome::Error: return "error";
    }
    return "unknown";
}

JudgeResult judge_one(JudgeBackend& backend, const JudgeConfig& config,
                      const Criterion& criterion, const FormalLanguage& language,
                      const std::string& statement, const std::string& code,
                      VerdictCache* cache) {
    JudgeResult result;
    try {
        const RenderedPrompt prompt = render(criterion, language, statement, code);

        std::string cache_key;
        if (cache != nullptr) {
            cache_key = VerdictCache::key(backend.id(), config.model_name, config.temperature,
                                          config.sampling_salt, criterion.id, statement, code);
            if (std::optional<std::string> cached = cache->lookup(cache_key)) {
                VerdictParse parsed = parse_verdict(*cached, criterion);
                if (parsed.ok()) {
                    result.outcome = JudgeOutcome::Ok;
                    result.verdict = std::move(parsed.verdict);
                    result.from_cache = true;
                    return result;
                }
                // A cached response that no longer parses is treated as a
                // miss and re-queried below.
            }
        }

        JudgeRequest request{prompt.text, criterion.id, config.model_name, config.temperature,
                             config.sampling_salt};
        const int max_attempts = config.max_retries + 1;
        std::string last_parse_error;
        for (int attempt = 0; attempt < max_attempts; ++attempt) {
            BackendResult completion = backend.complete(request);
            ++result.attempts;
            if (!completion.ok) {
                result.outcome = JudgeOutcome::JudgeUnavailable;
                result.error = completion.error;
                return result;
            }
            VerdictParse parsed = parse_verdict(completion.raw, criterion);
            if (parsed.ok()) {
                result.outcome = JudgeOutcome::Ok;
                result.verdict = std::move(parsed.verdict);
                result.verdict->attempts = result.attempts;
                if (cache != nullptr) {
                    cache->store(cache_key, completion.raw, prompt.text, *result.verdict);
                }
                return result;
            }
            last_parse_error = parsed.error;
        }
        result.outcome = JudgeOutcome::Unparsable;
        result.error = last_parse_error;
        return result;
    } catch (const std::exception& e) {
        result.outcome = JudgeOutcome::Error;
        result.error = e.what();
        return result;
    }
}

std::vector<std::pair<std::string, JudgeResult>>
judge_batch(JudgeBackend& backend, const JudgeConfig& config,
            const std::vector<JudgeTask>& tasks, VerdictCache* cache) {
    std::vector<std::pair<std::string, JudgeResult>> results(tasks.size());
    if (tasks.empty()) return results;
    if (config.concurrency_limit < 1) throw ConfigError("concurrency_limit must be at least 1");

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= tasks.size()) return;
            const JudgeTask& task = tasks[i];
            results[i].first = task.key;
            if (task.criterion == nullptr) {
                results[i].second.outcome = JudgeOutcome::Error;
                results[i].second.error = "task has no criterion";
                continue;
            }
            results[i].second = judge_one(backend, config, *task.criterion, task.language,
                                          task.statement, task.code, cache);
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.concurrency_limit), tasks.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& thread : pool) thread.join();
    return results;
}

} // namespace formeval
