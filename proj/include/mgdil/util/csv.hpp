#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mgdil::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
  bool well_formed = true;  // false on an unterminated quote
};

// RFC 4180 reader: comma separated, double-quote escaping, quoted fields may
// span lines. CRLF and LF are both accepted.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace mgdil::csv
