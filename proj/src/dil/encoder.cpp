#include "mgdil/dil/encoder.hpp"

#include <cmath>

#include "httplib.h"
#include "mgdil/util/digest.hpp"
#include "mgdil/util/error.hpp"
#include "mgdil/util/utf8.hpp"

namespace mgdil::dil {

void normalize_l2(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw Error("embedding has non-finite entries");
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw Error("embedding has zero norm");
  for (double& x : v) x /= norm;
}

UrlParts split_url(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) throw ConfigError("URL lacks a scheme: " + std::string(url));
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

HashingEncoder::HashingEncoder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ConfigError("hashing encoder dimension must be positive");
}

std::vector<std::string> HashingEncoder::features(std::string_view text) {
  const std::u32string lowered = [&] {
    std::u32string s = utf8::decode(text);
    for (char32_t& c : s) c = utf8::to_lower_ascii(c);
    return s;
  }();
  std::vector<std::string> out;
  std::u32string word;
  auto flush = [&] {
    if (word.empty()) return;
    out.push_back("w:" + utf8::encode(word));
    const std::u32string padded = U"<" + word + U">";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back("c:" + utf8::encode(padded.substr(i, 3)));
    word.clear();
  };
  for (char32_t c : lowered) {
    if (utf8::is_letter(c) || utf8::is_ascii_digit(c) || c == U'_') {
      word.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<double> HashingEncoder::encode(std::string_view text) const {
  const auto feats = features(text);
  if (feats.empty()) throw Error("cannot encode an empty document");
  std::vector<double> v(dimension_, 0.0);
  for (const auto& f : feats) {
    const std::uint64_t h = digest::fnv1a64(f);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[h % dimension_] += sign;
  }
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) {
    // Every feature cancelled out; fall back to unsigned counts.
    for (const auto& f : feats) v[digest::fnv1a64(f) % dimension_] += 1.0;
  }
  normalize_l2(v);
  return v;
}

nlohmann::json HashingEncoder::describe() const {
  return {{"kind", "hashing"}, {"dimension", dimension_}, {"features", "word-unigram+char-trigram"}, {"hash", "fnv1a64"}};
}

ExternalEmbeddingEncoder::ExternalEmbeddingEncoder(EmbeddingEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.dimension == 0) throw ConfigError("embedding dimension must be positive");
  split_url(endpoint_.url);
}

std::vector<double> ExternalEmbeddingEncoder::encode(std::string_view text) const {
  if (text.empty()) throw Error("cannot encode an empty document");
  const UrlParts parts = split_url(endpoint_.url);
  httplib::Client client(parts.origin);
  const auto secs = static_cast<time_t>(endpoint_.timeout_seconds);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  const nlohmann::json body = {{"model", endpoint_.model}, {"input", std::string(text)}};
  auto res = client.Post(parts.path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("embedding endpoint returned HTTP " + std::to_string(res->status));
  std::vector<double> v;
  try {
    const auto reply = nlohmann::json::parse(res->body);
    v = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what());
  }
  if (v.size() != endpoint_.dimension) {
    throw TransportError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(endpoint_.dimension));
  }
  normalize_l2(v);
  return v;
}

nlohmann::json ExternalEmbeddingEncoder::describe() const {
  return {{"kind", "external"}, {"dimension", endpoint_.dimension}, {"url", endpoint_.url}, {"model", endpoint_.model}};
}

}  // namespace mgdil::dil
