#include "mgtkit/genharness.hpp"

#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mgtkit/errors.hpp"

namespace mgtkit {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::TitleOnly: return "title_only";
        case StrategyKind::TitleContent: return "title_content";
        case StrategyKind::Polish: return "polish";
    }
    return "polish";
}

GenMethod method_for(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::TitleOnly: return GenMethod::TitleOnly;
        case StrategyKind::TitleContent: return GenMethod::TitleContent;
        case StrategyKind::Polish: return GenMethod::Polish;
    }
    return GenMethod::Polish;
}

void validate(const PromptStrategy& strategy) {
    if (strategy.content_word_cap < 1)
        throw ValidationError("content_word_cap must be at least 1");
    if (strategy.target_min_words > strategy.target_max_words)
        throw ValidationError("target length hint: min must not exceed max");
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

GenerationTask make_generation_task(const Document& doc, const PromptStrategy& strategy,
                                    const std::string& model_name) {
    validate(strategy);
    if (doc.domain == Domain::SocialPost && strategy.kind != StrategyKind::Polish)
        throw ValidationError("social posts are generated by polishing only");

    GenerationTask task;
    task.source = doc;
    task.strategy = strategy;
    task.model_name = model_name;
    task.domain = doc.domain;
    if (strategy.kind != StrategyKind::Polish) {
        const auto newline = doc.text.find('\n');
        task.title = trim(newline == std::string::npos ? doc.text : doc.text.substr(0, newline));
        task.content = newline == std::string::npos ? "" : trim(doc.text.substr(newline + 1));
    }
    return task;
}

const PromptTemplateSet& PromptTemplateSet::builtin() {
    static const PromptTemplateSet set = {
        "v1",
        // title_only
        "You are an expert Arabic academic writer. Write an academic abstract in Modern "
        "Standard Arabic for a paper with the following title:\n"
        "\n"
        "{{title}}\n"
        "\n"
        "Requirements:\n"
        "- The abstract must be approximately {{min_words}}-{{max_words}} words long.\n"
        "- Write only the abstract text, with no headings, lists, or commentary.\n"
        "- Do not repeat the title in your answer.\n",
        // title_content
        "You are an expert Arabic academic writer. Write an academic abstract in Modern "
        "Standard Arabic for the paper below.\n"
        "\n"
        "Title:\n"
        "{{title}}\n"
        "\n"
        "Content (automatically extracted from a PDF, truncated):\n"
        "{{content}}\n"
        "\n"
        "Requirements:\n"
        "- The content may contain extraction artifacts such as broken or segmented "
        "characters, distorted diacritical marks, or merged words; read past these "
        "artifacts.\n"
        "- If the content already contains an abstract, disregard it entirely and write a "
        "new abstract from the full content.\n"
        "- Write only the abstract text, with no headings, lists, or commentary.\n",
        // polish
        "Polish the following Arabic text, improving its linguistic and stylistic quality "
        "while keeping the original content and meaning.\n"
        "\n"
        "Requirements:\n"
        "- Correct grammatical and spelling errors without altering the fundamental "
        "writing style.\n"
        "- Preserve all dialectal expressions and diacritical marks exactly as they "
        "appear.\n"
        "- Use vocabulary closely aligned with the original text.\n"
        "- Keep the result at approximately {{word_count}} words, close to the original "
        "length.\n"
        "- Write only the polished text, with no commentary.\n"
        "\n"
        "Text:\n"
        "{{text}}\n",
    };
    return set;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open template file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void replace_all(std::string& text, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
}

}  // namespace

PromptTemplateSet PromptTemplateSet::load(const std::string& directory) {
    PromptTemplateSet set;
    set.version = trim(read_file(directory + "/VERSION"));
    set.title_only = read_file(directory + "/title_only.txt");
    set.title_content = read_file(directory + "/title_content.txt");
    set.polish = read_file(directory + "/polish.txt");
    return set;
}

std::string truncate_words(const std::string& text, int cap) {
    if (cap < 1) throw ValidationError("truncate_words: cap must be at least 1");
    std::istringstream in(text);
    std::string word, out;
    int count = 0;
    while (count < cap && in >> word) {
        if (count) out += ' ';
        out += word;
        ++count;
    }
    return out;
}

std::string build_prompt(const GenerationTask& task, const PromptTemplateSet& templates) {
    validate(task.strategy);
    if (task.domain == Domain::SocialPost && task.strategy.kind != StrategyKind::Polish)
        throw ValidationError("social posts are generated by polishing only");

    std::string prompt;
    switch (task.strategy.kind) {
        case StrategyKind::TitleOnly: {
            if (trim(task.title).empty())
                throw ValidationError("title_only generation requires a title");
            prompt = templates.title_only;
            replace_all(prompt, "{{title}}", task.title);
            replace_all(prompt, "{{min_words}}", std::to_string(task.strategy.target_min_words));
            replace_all(prompt, "{{max_words}}", std::to_string(task.strategy.target_max_words));
            break;
        }
        case StrategyKind::TitleContent: {
            if (trim(task.title).empty())
                throw ValidationError("title_content generation requires a title");
            if (trim(task.content).empty())
                throw ValidationError("title_content generation requires source content");
            prompt = templates.title_content;
            replace_all(prompt, "{{title}}", task.title);
            replace_all(prompt, "{{content}}",
                        truncate_words(task.content, task.strategy.content_word_cap));
            break;
        }
        case StrategyKind::Polish: {
            prompt = templates.polish;
            replace_all(prompt, "{{word_count}}", std::to_string(task.source.word_count));
            replace_all(prompt, "{{text}}", task.source.text);
            break;
        }
    }
    return prompt;
}

void validate(const ProviderConfig& config) {
    if (config.endpoint.empty()) throw ValidationError("provider endpoint must be set");
    if (config.temperature < 0.0) throw ValidationError("temperature must be non-negative");
    if (config.max_retries < 0) throw ValidationError("max_retries must be non-negative");
    if (config.requests_per_minute < 1)
        throw ValidationError("requests_per_minute must be at least 1");
}

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
    validate(config_);
}

ChatOutcome HttpChatProvider::complete(const ChatRequest& request) {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    nlohmann::json payload;
    payload["model"] = request.model;
    auto messages = nlohmann::json::array();
    if (!request.system.empty())
        messages.push_back({{"role", "system"}, {"content", request.system}});
    messages.push_back({{"role", "user"}, {"content", request.user}});
    payload["messages"] = messages;
    payload["temperature"] = request.temperature;
    payload["max_tokens"] = request.max_tokens;

    httplib::Headers headers;
    if (!config_.credential.empty())
        headers.emplace("Authorization", "Bearer " + config_.credential);

    const auto res = client.Post(config_.path, headers, payload.dump(), "application/json");
    ChatOutcome outcome;
    if (!res) {
        outcome.status = ChatOutcome::Status::Transient;
        outcome.text = "connection failed: " + config_.endpoint;
        return outcome;
    }
    outcome.http_status = res->status;
    if (res->status == 401 || res->status == 403) {
        outcome.status = ChatOutcome::Status::Auth;
        outcome.text = res->body;
        return outcome;
    }
    if (res->status == 429 || res->status >= 500) {
        outcome.status = ChatOutcome::Status::Transient;
        outcome.text = res->body;
        return outcome;
    }
    if (res->status != 200) {
        outcome.status = ChatOutcome::Status::Fatal;
        outcome.text = res->body;
        return outcome;
    }

    try {
        const auto body = nlohmann::json::parse(res->body);
        if (body.contains("text")) {
            outcome.text = body["text"].get<std::string>();
        } else if (body.contains("choices") && !body["choices"].empty()) {
            outcome.text = body["choices"][0]["message"]["content"].get<std::string>();
        } else if (body.contains("error")) {
            outcome.status = ChatOutcome::Status::Fatal;
            outcome.text = body["error"].dump();
            return outcome;
        } else {
            outcome.status = ChatOutcome::Status::Fatal;
            outcome.text = "unrecognized response shape: " + res->body;
            return outcome;
        }
    } catch (const nlohmann::json::exception& e) {
        outcome.status = ChatOutcome::Status::Fatal;
        outcome.text = std::string("invalid JSON response: ") + e.what();
        return outcome;
    }
    outcome.status = ChatOutcome::Status::Success;
    return outcome;
}

void SystemClock::sleep_until(TimePoint t) {
    std::this_thread::sleep_until(t);
}

RateLimiter::RateLimiter(int cap_per_minute, Clock& clock) : cap_(cap_per_minute), clock_(clock) {
    if (cap_per_minute < 1) throw ValidationError("rate cap must be at least 1");
}

void RateLimiter::acquire() {
    using namespace std::chrono_literals;
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = clock_.now();
        while (!dispatches_.empty() && now - dispatches_.front() >= 60s) dispatches_.pop_front();
        if (static_cast<int>(dispatches_.size()) < cap_) {
            dispatches_.push_back(now);
            return;
        }
        const auto wake = dispatches_.front() + 60s;
        lock.unlock();
        clock_.sleep_until(wake);
        lock.lock();
    }
}

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

GenerationHarness::GenerationHarness(ChatProvider& provider, const ProviderConfig& config,
                                     Clock& clock, PromptTemplateSet templates)
    : provider_(provider),
      config_(config),
      clock_(clock),
      templates_(std::move(templates)),
      limiter_(config.requests_per_minute, clock),
      jitter_rng_(0x6d67746b6974ull) {
    validate(config_);
}

GenerationRecord GenerationHarness::generate(const GenerationTask& task) {
    using namespace std::chrono_literals;

    ChatRequest request;
    request.model = config_.model;
    request.user = build_prompt(task, templates_);
    request.temperature = config_.temperature;
    request.max_tokens = config_.max_output_tokens;

    const auto start = clock_.now();
    ChatOutcome last;
    for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
        limiter_.acquire();
        last = provider_.complete(request);
        if (last.status == ChatOutcome::Status::Success) {
            GenerationRecord record;
            record.text = last.text;
            record.model_name = task.model_name;
            record.strategy = task.strategy.kind;
            record.domain = task.domain;
            record.source_id = task.source.id;
            record.attempts = attempt;
            record.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    clock_.now() - start)
                                    .count();
            record.timestamp = utc_timestamp();
            record.temperature = config_.temperature;
            record.prompt_version = templates_.version;
            return record;
        }
        if (last.status == ChatOutcome::Status::Auth)
            throw AuthError("provider rejected credential (status " +
                            std::to_string(last.http_status) + ")");
        if (last.status == ChatOutcome::Status::Fatal)
            throw Error("provider error (status " + std::to_string(last.http_status) +
                        "): " + last.text);
        if (attempt <= config_.max_retries) {
            const auto base = 1000ms * (1LL << (attempt - 1));
            long long jitter_ms;
            {
                std::lock_guard rng_lock(rng_mutex_);
                jitter_ms = static_cast<long long>(jitter_rng_() % (base.count() / 4 + 1));
            }
            clock_.sleep_until(clock_.now() + base + std::chrono::milliseconds(jitter_ms));
        }
    }
    throw RetryError("generation failed after " + std::to_string(config_.max_retries + 1) +
                         " attempts",
                     last.text);
}

GenerationValidation validate_generation(const GenerationRecord& record, Domain domain,
                                         const FilterOptions& opts) {
    GenerationValidation result;
    if (matches_error_marker(record.text, opts.error_markers)) {
        result.reject_reason = "error_marker";
        return result;
    }
    if (count_words(record.text) < min_word_count(domain)) {
        result.reject_reason = "too_short";
        return result;
    }
    const GenMethod method = method_for(record.strategy);
    const std::string id =
        record.source_id + ":" + record.model_name + ":" + to_string(method);
    result.accepted = make_document(id, record.text, Authorship::model(record.model_name),
                                    domain, method);
    return result;
}

void append_generation_log(const GenerationRecord& record, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append generation log: " + path);
    nlohmann::ordered_json line;
    line["id"] = record.source_id + ":" + record.model_name + ":" +
                 to_string(method_for(record.strategy));
    line["text"] = record.text;
    line["label"] = record.model_name;
    line["domain"] = to_string(record.domain);
    line["method"] = to_string(method_for(record.strategy));
    line["source_id"] = record.source_id;
    line["attempts"] = record.attempts;
    line["elapsed_ms"] = record.elapsed_ms;
    line["timestamp"] = record.timestamp;
    line["temperature"] = record.temperature;
    line["prompt_version"] = record.prompt_version;
    out << line.dump() << '\n';
}

}  // namespace mgtkit
