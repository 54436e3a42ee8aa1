#pragma once

// Chat-completion access for LLM summaries, with retry and bounded
// parallelism. The credential is read from MGDIL_LLM_API_KEY only.

#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mgdil/summary/summary.hpp"

namespace mgdil::summary {

class SummaryClient {
 public:
  virtual ~SummaryClient() = default;
  // Returns the assistant message text. Throws TransportError on network or
  // HTTP failure. Must be safe to call from several threads.
  virtual std::string complete(const std::string& prompt) = 0;
};

struct HttpClientConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::optional<std::filesystem::path> audit_log;  // JSON lines, one per response
  std::chrono::seconds timeout{60};
  double temperature = 0.0;
};

class HttpChatClient : public SummaryClient {
 public:
  // Throws ConfigError on a malformed endpoint or a missing credential.
  explicit HttpChatClient(HttpClientConfig config);
  // Credential given explicitly; used by tests against a local server.
  HttpChatClient(HttpClientConfig config, std::string api_key);

  std::string complete(const std::string& prompt) override;

 private:
  void audit(const std::string& prompt, int status, const std::string& body);

  HttpClientConfig config_;
  std::string api_key_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::mutex audit_mu_;
};

struct RetryPolicy {
  std::size_t max_retries = 3;
  std::chrono::milliseconds base_delay{500};  // doubled after each failure
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

class SummaryFailure : public Error {
 public:
  SummaryFailure(const std::string& what, std::string last_response)
      : Error(what), last_response_(std::move(last_response)) {}
  const std::string& last_response() const noexcept { return last_response_; }

 private:
  std::string last_response_;
};

// Prompt, call, parse; a transport error or an unparseable reply is retried.
// Never invents labels: exhausting the retries throws SummaryFailure.
PostSummary llm_summarize(const std::vector<std::string>& posts, SummaryClient& client,
                          const RetryPolicy& retry = {}, const std::string& prompt_template = default_prompt_template());

struct BatchItem {
  std::optional<PostSummary> summary;
  std::string error;  // set when summary is empty
};

// Summarizes every history with at most `in_flight` concurrent requests.
// Results keep the input order.
std::vector<BatchItem> llm_summarize_all(const std::vector<std::vector<std::string>>& histories, SummaryClient& client,
                                         std::size_t in_flight = 4, const RetryPolicy& retry = {});

}  // namespace mgdil::summary
