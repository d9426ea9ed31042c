#pragma once

// line-oriented key = value config with [section] headers; '#' comments

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vel {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse(std::istream& in) {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section at line " + std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value at line " + std::to_string(lineno));
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
      cfg.values_[qualify(section, key)] = val;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count(qualify(section, key)) > 0;
  }

  std::string get(const std::string& section, const std::string& key) const {
    const auto it = values_.find(qualify(section, key));
    if (it == values_.end()) throw ConfigError("missing key: " + qualify(section, key));
    return it->second;
  }

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const {
    const auto it = values_.find(qualify(section, key));
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return to_double(get(section, key), section, key);
  }
  double get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return to_double(get(section, key), section, key);
  }
  long get_int(const std::string& section, const std::string& key) const {
    return to_int(get(section, key), section, key);
  }
  long get_int(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    return to_int(get(section, key), section, key);
  }

 private:
  static std::string qualify(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }
  static double to_double(const std::string& v, const std::string& sec, const std::string& key) {
    std::size_t pos = 0;
    double out;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      throw ConfigError("not a number: " + qualify(sec, key) + " = " + v);
    }
    if (pos != v.size()) throw ConfigError("trailing junk in: " + qualify(sec, key) + " = " + v);
    return out;
  }
  static long to_int(const std::string& v, const std::string& sec, const std::string& key) {
    std::size_t pos = 0;
    long out;
    try {
      out = std::stol(v, &pos);
    } catch (const std::exception&) {
      throw ConfigError("not an integer: " + qualify(sec, key) + " = " + v);
    }
    if (pos != v.size()) throw ConfigError("trailing junk in: " + qualify(sec, key) + " = " + v);
    return out;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace vel
