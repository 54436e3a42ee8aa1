#include "mgdil/summary/client.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "mgdil/util/digest.hpp"
#include "mgdil/util/jsonl.hpp"
#include "mgdil/util/log.hpp"

namespace mgdil::summary {

namespace {

std::string key_from_env() {
  const char* key = std::getenv("MGDIL_LLM_API_KEY");
  if (key == nullptr || *key == '\0') throw ConfigError("MGDIL_LLM_API_KEY is not set");
  return key;
}

}  // namespace

HttpChatClient::HttpChatClient(HttpClientConfig config) : HttpChatClient(std::move(config), key_from_env()) {}

HttpChatClient::HttpChatClient(HttpClientConfig config, std::string api_key)
    : config_(std::move(config)), api_key_(std::move(api_key)) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, re)) throw ConfigError("bad LLM endpoint '" + config_.endpoint + "'");
  origin_ = m[1];
  path_ = m[2].matched ? std::string(m[2]) : "/";
  if (config_.model.empty()) throw ConfigError("LLM model name is empty");
}

void HttpChatClient::audit(const std::string& prompt, int status, const std::string& body) {
  if (!config_.audit_log) return;
  const nlohmann::json entry{{"model", config_.model},
                             {"prompt_sha1", digest::git_blob_id(prompt)},
                             {"status", status},
                             {"response", body}};
  std::lock_guard<std::mutex> lock(audit_mu_);
  std::ofstream out(*config_.audit_log, std::ios::binary | std::ios::app);
  out << jsonl::dump_line(entry);
}

std::string HttpChatClient::complete(const std::string& prompt) {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(config_.timeout);
  cli.set_read_timeout(config_.timeout);
  cli.set_bearer_token_auth(api_key_);
  const nlohmann::json body{{"model", config_.model},
                            {"temperature", config_.temperature},
                            {"messages", {{{"role", "user"}, {"content", prompt}}}}};
  auto res = cli.Post(path_, body.dump(), "application/json");
  if (!res) {
    audit(prompt, 0, "");
    throw TransportError("LLM request failed: " + httplib::to_string(res.error()));
  }
  audit(prompt, res->status, res->body);
  if (res->status != 200) throw TransportError("LLM endpoint returned HTTP " + std::to_string(res->status));
  const auto reply = nlohmann::json::parse(res->body, nullptr, false);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("LLM response has no choices[0].message.content");
  }
}

PostSummary llm_summarize(const std::vector<std::string>& posts, SummaryClient& client, const RetryPolicy& retry,
                          const std::string& prompt_template) {
  const std::string prompt = build_prompt(posts, prompt_template);
  std::string last_response, last_error;
  auto delay = retry.base_delay;
  for (std::size_t attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) {
      if (retry.sleep) {
        retry.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
      delay *= 2;
    }
    try {
      last_response = client.complete(prompt);
      return parse_summary_sentence(last_response);
    } catch (const TransportError& e) {
      last_error = e.what();
    } catch (const ParseError& e) {
      last_error = e.what();
    }
    log::warn("summary.retry", {{"attempt", attempt + 1}, {"error", last_error}});
  }
  throw SummaryFailure("summary failed after " + std::to_string(retry.max_retries + 1) + " attempts: " + last_error,
                       last_response);
}

std::vector<BatchItem> llm_summarize_all(const std::vector<std::vector<std::string>>& histories, SummaryClient& client,
                                         std::size_t in_flight, const RetryPolicy& retry) {
  std::vector<BatchItem> out(histories.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < histories.size(); i = next++) {
      try {
        out[i].summary = llm_summarize(histories[i], client, retry);
      } catch (const Error& e) {
        out[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::max<std::size_t>(1, std::min(in_flight, histories.size()));
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace mgdil::summary
