#ifndef WILLMORE_CONFIG_HPP
#define WILLMORE_CONFIG_HPP

// Line-oriented key = value configuration with [section] headers; lists are
// comma-separated. Parse errors carry file and line.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "willmore/errors.hpp"

namespace willmore {

struct ConfigValue {
  std::string text;
  int line = 0;
};

class ConfigFile {
public:
  ConfigFile() = default;

  static ConfigFile parse_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
  }

  static ConfigFile parse_text(const std::string &text, const std::string &path = "<config>") {
    ConfigFile cf;
    cf.path_ = path;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw config_error(path + ":" + std::to_string(lineno) + ": unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty())
          throw config_error(path + ":" + std::to_string(lineno) + ": empty section name");
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(s.substr(0, eq));
      std::string val = trim(s.substr(eq + 1));
      if (key.empty())
        throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
      cf.values_[section + "." + key] = ConfigValue{val, lineno};
    }
    return cf;
  }

  bool has(const std::string &section, const std::string &key) const {
    return values_.count(section + "." + key) > 0;
  }

  std::string get_string(const std::string &section, const std::string &key,
                         const std::string &fallback) const {
    auto it = values_.find(section + "." + key);
    return it == values_.end() ? fallback : it->second.text;
  }

  double get_double(const std::string &section, const std::string &key, double fallback) const {
    auto it = values_.find(section + "." + key);
    if (it == values_.end()) return fallback;
    return to_double(it->second, section + "." + key);
  }

  long get_int(const std::string &section, const std::string &key, long fallback) const {
    auto it = values_.find(section + "." + key);
    if (it == values_.end()) return fallback;
    const ConfigValue &v = it->second;
    try {
      std::size_t pos = 0;
      long r = std::stol(v.text, &pos);
      if (pos != v.text.size()) throw std::invalid_argument("");
      return r;
    } catch (const std::exception &) {
      throw config_error(path_ + ":" + std::to_string(v.line) + ": field " + section + "." + key +
                         " is not an integer: '" + v.text + "'");
    }
  }

  std::vector<double> get_list(const std::string &section, const std::string &key,
                               const std::vector<double> &fallback) const {
    auto it = values_.find(section + "." + key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::istringstream ss(it->second.text);
    std::string item;
    while (std::getline(ss, item, ','))
      out.push_back(to_double(ConfigValue{trim(item), it->second.line}, section + "." + key));
    if (out.empty())
      throw config_error(path_ + ":" + std::to_string(it->second.line) + ": field " + section +
                         "." + key + " is an empty list");
    return out;
  }

  // canonical serialization: sorted dotted keys, one per line
  std::string canonical() const {
    std::string out;
    for (const auto &kv : values_) out += kv.first + "=" + kv.second.text + "\n";
    return out;
  }

  void set(const std::string &section, const std::string &key, const std::string &val) {
    values_[section + "." + key] = ConfigValue{val, 0};
  }

  const std::string &path() const { return path_; }

  int line_of(const std::string &section, const std::string &key) const {
    auto it = values_.find(section + "." + key);
    return it == values_.end() ? 0 : it->second.line;
  }

private:
  static std::string trim(const std::string &s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  double to_double(const ConfigValue &v, const std::string &dotted) const {
    try {
      std::size_t pos = 0;
      double r = std::stod(v.text, &pos);
      if (pos != v.text.size()) throw std::invalid_argument("");
      return r;
    } catch (const std::exception &) {
      throw config_error(path_ + ":" + std::to_string(v.line) + ": field " + dotted +
                         " is not a number: '" + v.text + "'");
    }
  }

  std::string path_ = "<config>";
  std::map<std::string, ConfigValue> values_;
};

// FNV-1a over the canonical serialization; embedded in every report so a
// report can be traced back to its exact configuration
inline std::uint64_t config_hash(const ConfigFile &cf) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : cf.canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace willmore

#endif
