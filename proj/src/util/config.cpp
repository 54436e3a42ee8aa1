#include "mgdil/util/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "mgdil/util/error.hpp"

namespace mgdil::config {

namespace {

using nlohmann::json;

class Parser {
 public:
  Parser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  void skip_ws_comments_newlines() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError("config line " + std::to_string(line_) + ": " + what); }

  std::vector<std::string> key_path() {
    std::vector<std::string> parts;
    while (true) {
      skip_ws();
      if (peek() == '"') {
        parts.push_back(basic_string());
      } else if (peek() == '\'') {
        parts.push_back(literal_string());
      } else {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) ++pos_;
        if (start == pos_) fail("expected key");
        parts.emplace_back(s_.substr(start, pos_ - start));
      }
      skip_ws();
      if (peek() == '.') {
        ++pos_;
        continue;
      }
      return parts;
    }
  }

  std::string basic_string() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c == '\n') fail("newline in string");
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail("bad escape");
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'u': {
          if (pos_ + 4 > s_.size()) fail("bad \\u escape");
          const auto cp = static_cast<char32_t>(std::stoul(std::string(s_.substr(pos_, 4)), nullptr, 16));
          pos_ += 4;
          if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
          } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          } else {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          }
          break;
        }
        default: fail(std::string("unknown escape \\") + e);
      }
    }
  }

  std::string literal_string() {
    ++pos_;
    const std::size_t end = s_.find('\'', pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  json value() {
    skip_ws();
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      while (true) {
        skip_ws_comments_newlines();
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(value());
        skip_ws_comments_newlines();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        fail("expected ',' or ']' in array");
      }
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != '\n' &&
           s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '\r')
      ++pos_;
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty()) fail("expected value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean.push_back(ch);
    const bool is_float = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "nan";
    try {
      std::size_t used = 0;
      if (is_float) {
        const double d = std::stod(clean, &used);
        if (used == clean.size()) return d;
      } else {
        const long long v = std::stoll(clean, &used);
        if (used == clean.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("cannot parse value '" + tok + "'");
  }

  std::size_t pos() const { return pos_; }
  std::string_view rest() const { return s_.substr(pos_); }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

json& descend(json& root, const std::vector<std::string>& path, std::size_t line) {
  json* node = &root;
  for (const auto& part : path) {
    if (node->is_array()) {
      if (node->empty()) throw ConfigError("config line " + std::to_string(line) + ": empty table array");
      node = &node->back();
    }
    if (!node->is_object()) throw ConfigError("config line " + std::to_string(line) + ": '" + part + "' is not a table");
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
  }
  if (node->is_array() && !node->empty() && node->back().is_object()) node = &node->back();
  return *node;
}

bool brackets_balanced(std::string_view text) {
  int depth = 0;
  bool in_basic = false;
  bool in_literal = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_basic) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_basic = false;
      }
      continue;
    }
    if (in_literal) {
      if (c == '\'') in_literal = false;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '"') in_basic = true;
    if (c == '\'') in_literal = true;
    if (c == '[') ++depth;
    if (c == ']') --depth;
  }
  return depth <= 0;
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  json root = json::object();
  json* table = &root;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t first_line = line_no;
    std::string stmt = line;
    Parser probe(stmt, first_line);
    probe.skip_ws();
    if (probe.at_end() || probe.peek() == '#' || probe.peek() == '\r') continue;

    if (probe.peek() == '[') {
      const bool array_table = stmt.size() > probe.pos() + 1 && stmt[probe.pos() + 1] == '[';
      Parser p(std::string_view(stmt).substr(probe.pos() + (array_table ? 2 : 1)), first_line);
      auto path = p.key_path();
      p.skip_ws();
      const std::string_view close = array_table ? "]]" : "]";
      if (p.rest().substr(0, close.size()) != close) p.fail("expected " + std::string(close));
      std::vector<std::string> parent(path.begin(), path.end() - 1);
      json& holder = descend(root, parent, first_line);
      const std::string& leaf = path.back();
      if (array_table) {
        if (!holder.contains(leaf)) holder[leaf] = json::array();
        if (!holder[leaf].is_array()) p.fail("'" + leaf + "' is not a table array");
        holder[leaf].push_back(json::object());
        table = &holder[leaf].back();
      } else {
        if (!holder.contains(leaf)) holder[leaf] = json::object();
        if (!holder[leaf].is_object()) p.fail("'" + leaf + "' redefined");
        table = &holder[leaf];
      }
      continue;
    }

    while (!brackets_balanced(stmt)) {
      std::string more;
      if (!std::getline(in, more)) throw ConfigError("config line " + std::to_string(first_line) + ": unterminated array");
      ++line_no;
      stmt += "\n" + more;
    }
    Parser p(stmt, first_line);
    auto path = p.key_path();
    p.skip_ws();
    if (p.peek() != '=') p.fail("expected '='");
    Parser vp(std::string_view(stmt).substr(p.pos() + 1), first_line);
    json v = vp.value();
    vp.skip_ws();
    if (!vp.at_end() && vp.peek() != '#' && vp.peek() != '\r') vp.fail("trailing characters after value");
    json* target = table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!target->contains(path[i])) (*target)[path[i]] = json::object();
      target = &(*target)[path[i]];
      if (!target->is_object()) p.fail("'" + path[i] + "' is not a table");
    }
    if (target->contains(path.back())) p.fail("duplicate key '" + path.back() + "'");
    (*target)[path.back()] = std::move(v);
  }
  return root;
}

nlohmann::json load_toml(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

const nlohmann::json* find(const nlohmann::json& root, std::string_view key) {
  const nlohmann::json* node = &root;
  std::size_t start = 0;
  while (start <= key.size()) {
    const std::size_t dot = key.find('.', start);
    const std::string part(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (!node->is_object()) return nullptr;
    auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return node;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("MGDIL_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return MGDIL_DATA_DIR;
}

}  // namespace mgdil::config
