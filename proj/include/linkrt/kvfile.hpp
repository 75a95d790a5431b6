#pragma once

// Flat `key = value` documents: model files and CLI config files. Entries
// keep insertion order so writes are deterministic.

#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace linkrt {

class KvFile {
 public:
  void set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries_.emplace_back(std::move(key), std::move(value));
  }

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return &v;
    return nullptr;
  }

  const std::string& get(std::string_view key) const {
    const std::string* v = find(key);
    if (!v) throw std::runtime_error("missing key: " + std::string(key));
    return *v;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/// Parses `key = value` lines; '#' lines and blank lines are skipped.
inline KvFile parse_kv(std::istream& in, const std::string& origin) {
  KvFile kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error(origin + " line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string_view key = detail::trim(trimmed.substr(0, eq));
    const std::string_view value = detail::trim(trimmed.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(origin + " line " + std::to_string(line_no) + ": empty key");
    kv.set(std::string(key), std::string(value));
  }
  return kv;
}

inline KvFile read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_kv(in, path);
}

inline void write_kv(const KvFile& kv, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [k, v] : kv.entries()) out << k << " = " << v << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace linkrt
