#pragma once

#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mgtkit/corpus.hpp"

namespace mgtkit {

enum class StrategyKind { TitleOnly, TitleContent, Polish };

std::string to_string(StrategyKind kind);
GenMethod method_for(StrategyKind kind);

struct PromptStrategy {
    StrategyKind kind = StrategyKind::Polish;
    int target_min_words = 100;   // TitleOnly length hint
    int target_max_words = 150;
    int content_word_cap = 400;   // TitleContent truncation
};

void validate(const PromptStrategy& strategy);

struct GenerationTask {
    Document source;
    PromptStrategy strategy;
    std::string model_name;
    Domain domain = Domain::AcademicAbstract;
    std::string title;    // TitleOnly / TitleContent
    std::string content;  // TitleContent
};

/// Builds a task from a corpus document. For title-driven strategies the
/// document text convention is "title\n<content>": the first line is the
/// title, the remainder the content. Social posts only admit polishing.
GenerationTask make_generation_task(const Document& doc, const PromptStrategy& strategy,
                                    const std::string& model_name);

/// Prompt templates shipped as versioned data; placeholders: {{title}},
/// {{content}}, {{text}}, {{min_words}}, {{max_words}}, {{word_count}}.
struct PromptTemplateSet {
    std::string version;
    std::string title_only;
    std::string title_content;
    std::string polish;

    static const PromptTemplateSet& builtin();
    static PromptTemplateSet load(const std::string& directory);
};

/// Deterministic prompt construction. TitleContent embeds at most
/// content_word_cap words of the content, never splitting inside a word.
std::string build_prompt(const GenerationTask& task,
                         const PromptTemplateSet& templates = PromptTemplateSet::builtin());

/// First content_word_cap whitespace-delimited words, joined by single
/// spaces.
std::string truncate_words(const std::string& text, int cap);

struct ProviderConfig {
    std::string endpoint;          // e.g. "http://localhost:8080"
    std::string path = "/v1/chat/completions";
    std::string model;
    double temperature = 1.0;
    int max_output_tokens = 1024;
    int max_retries = 3;
    int requests_per_minute = 60;
    std::string credential;        // from the environment, never from config files
    int timeout_ms = 60000;
};

void validate(const ProviderConfig& config);

struct ChatRequest {
    std::string model;
    std::string system;
    std::string user;
    double temperature = 1.0;
    int max_tokens = 1024;
};

struct ChatOutcome {
    enum class Status { Success, Transient, Auth, Fatal };
    Status status = Status::Fatal;
    std::string text;   // completion on success, provider error body otherwise
    int http_status = 0;
};

class ChatProvider {
  public:
    virtual ~ChatProvider() = default;
    virtual ChatOutcome complete(const ChatRequest& request) = 0;
};

/// OpenAI-style chat-completion endpoint over HTTP. 5xx and 429 are
/// transient; 401/403 are auth failures.
class HttpChatProvider : public ChatProvider {
  public:
    explicit HttpChatProvider(ProviderConfig config);
    ChatOutcome complete(const ChatRequest& request) override;

  private:
    ProviderConfig config_;
};

/// Injectable time source so rate limiting and backoff are testable with a
/// virtual clock.
class Clock {
  public:
    using TimePoint = std::chrono::steady_clock::time_point;
    virtual ~Clock() = default;
    virtual TimePoint now() = 0;
    virtual void sleep_until(TimePoint t) = 0;
};

class SystemClock : public Clock {
  public:
    TimePoint now() override { return std::chrono::steady_clock::now(); }
    void sleep_until(TimePoint t) override;
};

/// Sliding-window limiter: at most cap dispatches in any 60-second window.
/// The only shared mutable state in the harness; safe for concurrent use.
class RateLimiter {
  public:
    RateLimiter(int cap_per_minute, Clock& clock);
    void acquire();

  private:
    int cap_;
    Clock& clock_;
    std::mutex mutex_;
    std::deque<Clock::TimePoint> dispatches_;
};

struct GenerationRecord {
    std::string text;
    std::string model_name;
    StrategyKind strategy = StrategyKind::Polish;
    Domain domain = Domain::AcademicAbstract;
    std::string source_id;
    int attempts = 0;
    long long elapsed_ms = 0;
    std::string timestamp;  // UTC, ISO 8601
    double temperature = 1.0;
    std::string prompt_version;
};

/// Drives one provider with retry/backoff discipline under a shared rate
/// limiter.
class GenerationHarness {
  public:
    GenerationHarness(ChatProvider& provider, const ProviderConfig& config, Clock& clock,
                      PromptTemplateSet templates = PromptTemplateSet::builtin());

    /// Retries transient failures with exponential backoff (base 1s,
    /// factor 2, jitter) up to max_retries. Auth failures are not retried.
    GenerationRecord generate(const GenerationTask& task);

  private:
    ChatProvider& provider_;
    ProviderConfig config_;
    Clock& clock_;
    PromptTemplateSet templates_;
    RateLimiter limiter_;
    std::mt19937_64 jitter_rng_;
    std::mutex rng_mutex_;
};

struct GenerationValidation {
    std::optional<Document> accepted;
    std::string reject_reason;  // "error_marker" or "too_short" when rejected

    bool ok() const { return accepted.has_value(); }
};

/// Applies the corpus filter rules to one generated output. Accepted
/// outputs become documents labeled with the generating model.
GenerationValidation validate_generation(const GenerationRecord& record, Domain domain,
                                         const FilterOptions& opts = FilterOptions::defaults());

/// Appends one line-delimited record mirroring the corpus schema plus
/// attempt metadata.
void append_generation_log(const GenerationRecord& record, const std::string& path);

}  // namespace mgtkit
