#pragma once

// Text -> unit-norm dense vector. The default encoder is signed feature
// hashing of lowercase word unigrams and character trigrams; an HTTP
// embedding client satisfies the same contract.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mgdil::dil {

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::size_t dimension() const = 0;
  // Unit L2 norm, finite entries. Throws mgdil::Error on empty input.
  virtual std::vector<double> encode(std::string_view text) const = 0;
  virtual nlohmann::json describe() const = 0;
};

class HashingEncoder final : public TextEncoder {
 public:
  explicit HashingEncoder(std::size_t dimension = 4096);

  std::size_t dimension() const override { return dimension_; }
  std::vector<double> encode(std::string_view text) const override;
  nlohmann::json describe() const override;

  // Token stream the encoder hashes: "w:<word>" and "c:<trigram>" entries.
  static std::vector<std::string> features(std::string_view text);

 private:
  std::size_t dimension_;
};

struct EmbeddingEndpoint {
  std::string url;     // e.g. http://127.0.0.1:8080/v1/embeddings
  std::string model;
  std::string api_key;  // sent as a bearer token when non-empty
  std::size_t dimension = 4096;
  double timeout_seconds = 30.0;
};

// POSTs {"model", "input"} and reads data[0].embedding from the response.
class ExternalEmbeddingEncoder final : public TextEncoder {
 public:
  explicit ExternalEmbeddingEncoder(EmbeddingEndpoint endpoint);

  std::size_t dimension() const override { return endpoint_.dimension; }
  std::vector<double> encode(std::string_view text) const override;
  nlohmann::json describe() const override;

 private:
  EmbeddingEndpoint endpoint_;
};

// Rescales to unit L2 norm in place. Throws on zero or non-finite vectors.
void normalize_l2(std::vector<double>& v);

// Splits "scheme://host[:port]/path" into the part httplib::Client takes
// and the request path.
struct UrlParts {
  std::string origin;
  std::string path;
};
UrlParts split_url(std::string_view url);

}  // namespace mgdil::dil
