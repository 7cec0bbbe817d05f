#ifndef WILLMORE_IO_HPP
#define WILLMORE_IO_HPP

// Report emission: JSON for single reports, CSV for tables. All numbers are
// printed with 17 significant digits so the outputs round-trip exactly and
// identical runs produce byte-identical files.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "willmore/errors.hpp"

namespace willmore {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// minimal ordered JSON builder: enough for flat reports with nested arrays
// of objects, emitted in insertion order
class JsonObject {
public:
  JsonObject &field(const std::string &key, double v) { return raw(key, fmt17(v)); }
  JsonObject &field(const std::string &key, long v) { return raw(key, std::to_string(v)); }
  JsonObject &field(const std::string &key, int v) { return raw(key, std::to_string(v)); }
  JsonObject &field(const std::string &key, bool v) { return raw(key, v ? "true" : "false"); }
  JsonObject &field(const std::string &key, const std::string &v) {
    return raw(key, quote(v));
  }
  JsonObject &field(const std::string &key, const char *v) { return field(key, std::string(v)); }
  JsonObject &field(const std::string &key, const JsonObject &obj) {
    return raw(key, obj.str());
  }
  JsonObject &field(const std::string &key, const std::vector<JsonObject> &arr) {
    std::string s = "[";
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (i) s += ",";
      s += arr[i].str();
    }
    s += "]";
    return raw(key, s);
  }
  JsonObject &field(const std::string &key, const std::vector<double> &arr) {
    std::string s = "[";
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (i) s += ",";
      s += fmt17(arr[i]);
    }
    s += "]";
    return raw(key, s);
  }

  std::string str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i) s += ",";
      s += quote(items_[i].first) + ":" + items_[i].second;
    }
    s += "}";
    return s;
  }

private:
  static std::string quote(const std::string &s) {
    std::string out = "\"";
    for (char c : s) {
      switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
      }
    }
    out += "\"";
    return out;
  }
  JsonObject &raw(const std::string &key, const std::string &val) {
    items_.emplace_back(key, val);
    return *this;
  }
  std::vector<std::pair<std::string, std::string>> items_;
};

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("io: cannot open output file " + path);
  out << text;
  if (!out) throw config_error("io: write failed on " + path);
}

inline void write_json(const std::string &path, const JsonObject &obj) {
  write_text(path, obj.str() + "\n");
}

// cells are preformatted strings (use fmt17 for numbers)
inline void write_csv(const std::string &path, const std::vector<std::string> &header,
                      const std::vector<std::vector<std::string>> &rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text += ",";
    text += header[i];
  }
  text += "\n";
  for (const auto &row : rows) {
    if (row.size() != header.size())
      throw precondition_error("io: csv row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ",";
      text += row[i];
    }
    text += "\n";
  }
  write_text(path, text);
}

} // namespace willmore

#endif
