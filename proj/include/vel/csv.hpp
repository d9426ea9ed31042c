#pragma once

// minimal RFC-4180-ish CSV writer: header row mandatory, fields quoted only
// when needed, '\n' line endings, UTF-8 passthrough

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vel {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header) : os_(os), cols_(header.size()) {
    if (header.empty()) throw CsvError("header row is mandatory");
    write_row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw CsvError("row width does not match header");
    write_row(cells);
  }

  static std::string num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
  }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << escape(cells[i]);
    }
    os_ << '\n';
  }

  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  }

  std::ostream& os_;
  std::size_t cols_;
};

}  // namespace vel
