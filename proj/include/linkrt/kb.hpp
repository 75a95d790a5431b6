#pragma once

// Resource tables: the source and target datasets of a link discovery run.
// A table maps resource ids to string property values, loaded from N-Triples
// or TSV files. Tables are immutable after load and keep insertion order, so
// seeded sampling is reproducible.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linkrt/rng.hpp"

namespace linkrt {

struct Resource {
  std::string id;
  std::map<std::string, std::vector<std::string>> properties;

  /// Values of a property; empty list when the property is absent.
  const std::vector<std::string>& values(const std::string& prop) const {
    static const std::vector<std::string> kEmpty;
    auto it = properties.find(prop);
    return it == properties.end() ? kEmpty : it->second;
  }
};

class ResourceTable {
 public:
  /// Adds a value for (id, prop), creating the resource on first sight.
  void add_value(const std::string& id, const std::string& prop, std::string value) {
    Resource& r = resource_for(id);
    r.properties[prop].push_back(std::move(value));
  }

  /// Adds a resource with no properties yet (or returns the existing one).
  Resource& resource_for(const std::string& id) {
    auto it = index_.find(id);
    if (it != index_.end()) return resources_[it->second];
    index_.emplace(id, resources_.size());
    resources_.push_back(Resource{id, {}});
    return resources_.back();
  }

  void push_back(Resource r) {
    if (index_.count(r.id)) throw std::invalid_argument("duplicate resource id: " + r.id);
    index_.emplace(r.id, resources_.size());
    resources_.push_back(std::move(r));
  }

  const Resource* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &resources_[it->second];
  }

  std::size_t size() const { return resources_.size(); }
  bool empty() const { return resources_.empty(); }
  const Resource& operator[](std::size_t i) const { return resources_[i]; }
  auto begin() const { return resources_.begin(); }
  auto end() const { return resources_.end(); }

  bool operator==(const ResourceTable& other) const { return resources_ == other.resources_; }

 private:
  std::vector<Resource> resources_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline bool operator==(const Resource& a, const Resource& b) {
  return a.id == b.id && a.properties == b.properties;
}

enum class TableFormat { ntriples, tsv };

namespace detail {

inline bool is_ws(char c) { return c == ' ' || c == '\t'; }

inline void skip_ws(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && is_ws(s[pos])) ++pos;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += char(cp);
  } else if (cp < 0x800) {
    out += char(0xC0 | (cp >> 6));
    out += char(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += char(0xE0 | (cp >> 12));
    out += char(0x80 | ((cp >> 6) & 0x3F));
    out += char(0x80 | (cp & 0x3F));
  } else {
    out += char(0xF0 | (cp >> 18));
    out += char(0x80 | ((cp >> 12) & 0x3F));
    out += char(0x80 | ((cp >> 6) & 0x3F));
    out += char(0x80 | (cp & 0x3F));
  }
}

// N-Triples string escapes: \t \b \n \r \f \" \' \\ \uXXXX \UXXXXXXXX.
inline std::string decode_literal(std::string_view raw, std::size_t line_no) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '\\') {
      out += raw[i];
      continue;
    }
    if (++i >= raw.size()) throw std::runtime_error("line " + std::to_string(line_no) + ": dangling escape");
    const char c = raw[i];
    switch (c) {
      case 't': out += '\t'; break;
      case 'b': out += '\b'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'f': out += '\f'; break;
      case '"': out += '"'; break;
      case '\'': out += '\''; break;
      case '\\': out += '\\'; break;
      case 'u':
      case 'U': {
        const std::size_t n = (c == 'u') ? 4 : 8;
        if (i + n >= raw.size())
          throw std::runtime_error("line " + std::to_string(line_no) + ": truncated \\" + std::string(1, c) + " escape");
        std::uint32_t cp = 0;
        for (std::size_t k = 1; k <= n; ++k) {
          const char h = raw[i + k];
          cp <<= 4;
          if (h >= '0' && h <= '9') cp |= std::uint32_t(h - '0');
          else if (h >= 'a' && h <= 'f') cp |= std::uint32_t(h - 'a' + 10);
          else if (h >= 'A' && h <= 'F') cp |= std::uint32_t(h - 'A' + 10);
          else throw std::runtime_error("line " + std::to_string(line_no) + ": bad hex digit in escape");
        }
        append_utf8(out, cp);
        i += n;
        break;
      }
      default:
        throw std::runtime_error("line " + std::to_string(line_no) + ": unknown escape \\" + std::string(1, c));
    }
  }
  return out;
}

struct NtTerm {
  std::string text;   // IRI without angle brackets, decoded literal, or blank label
  bool is_literal = false;
};

inline NtTerm parse_nt_term(std::string_view line, std::size_t& pos, std::size_t line_no, bool allow_literal) {
  skip_ws(line, pos);
  if (pos >= line.size())
    throw std::runtime_error("line " + std::to_string(line_no) + ": unexpected end of triple");
  if (line[pos] == '<') {
    const std::size_t close = line.find('>', pos + 1);
    if (close == std::string_view::npos)
      throw std::runtime_error("line " + std::to_string(line_no) + ": unterminated IRI");
    NtTerm t{std::string(line.substr(pos + 1, close - pos - 1)), false};
    pos = close + 1;
    return t;
  }
  if (line[pos] == '_' && pos + 1 < line.size() && line[pos + 1] == ':') {
    std::size_t end = pos;
    while (end < line.size() && !is_ws(line[end])) ++end;
    NtTerm t{std::string(line.substr(pos, end - pos)), false};
    pos = end;
    return t;
  }
  if (line[pos] == '"' && allow_literal) {
    std::size_t end = pos + 1;
    bool escaped = false;
    while (end < line.size() && (line[end] != '"' || escaped)) {
      escaped = (line[end] == '\\') && !escaped;
      ++end;
    }
    if (end >= line.size())
      throw std::runtime_error("line " + std::to_string(line_no) + ": unterminated literal");
    NtTerm t{decode_literal(line.substr(pos + 1, end - pos - 1), line_no), true};
    pos = end + 1;
    // Strip a language tag or datatype suffix; only the lexical form is kept.
    if (pos < line.size() && line[pos] == '@') {
      while (pos < line.size() && !is_ws(line[pos]) && line[pos] != '.') ++pos;
    } else if (pos + 1 < line.size() && line[pos] == '^' && line[pos + 1] == '^') {
      pos += 2;
      if (pos < line.size() && line[pos] == '<') {
        const std::size_t close = line.find('>', pos);
        if (close == std::string_view::npos)
          throw std::runtime_error("line " + std::to_string(line_no) + ": unterminated datatype IRI");
        pos = close + 1;
      }
    }
    return t;
  }
  throw std::runtime_error("line " + std::to_string(line_no) + ": malformed term");
}

inline void load_ntriples_line(ResourceTable& table, std::string_view line, std::size_t line_no,
                               const std::optional<std::vector<std::string>>& property_filter) {
  std::size_t pos = 0;
  skip_ws(line, pos);
  if (pos >= line.size() || line[pos] == '#') return;  // blank or comment line
  const NtTerm subject = parse_nt_term(line, pos, line_no, false);
  const NtTerm predicate = parse_nt_term(line, pos, line_no, false);
  const NtTerm object = parse_nt_term(line, pos, line_no, true);
  skip_ws(line, pos);
  if (pos >= line.size() || line[pos] != '.')
    throw std::runtime_error("line " + std::to_string(line_no) + ": expected terminating '.'");
  ++pos;
  skip_ws(line, pos);
  if (pos < line.size() && line[pos] != '#')
    throw std::runtime_error("line " + std::to_string(line_no) + ": trailing content after '.'");
  if (property_filter) {
    bool keep = false;
    for (const auto& p : *property_filter)
      if (p == predicate.text) { keep = true; break; }
    if (!keep) return;
  }
  // Non-literal objects (IRIs, blank nodes) are stringified verbatim.
  table.add_value(subject.text, predicate.text, object.text);
}

inline ResourceTable load_tsv(std::istream& in,
                              const std::optional<std::vector<std::string>>& property_filter) {
  ResourceTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: missing TSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> columns;
  {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        columns.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
  }
  if (columns.size() < 2) throw std::runtime_error("line 1: TSV header needs an id column and at least one property");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        cells.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cells.size() > columns.size())
      throw std::runtime_error("line " + std::to_string(line_no) + ": more cells than header columns");
    if (cells[0].empty())
      throw std::runtime_error("line " + std::to_string(line_no) + ": empty id");
    Resource& r = table.resource_for(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      const std::string& prop = columns[c];
      if (property_filter) {
        bool keep = false;
        for (const auto& p : *property_filter)
          if (p == prop) { keep = true; break; }
        if (!keep) continue;
      }
      r.properties[prop].push_back(cells[c]);
    }
  }
  return table;
}

}  // namespace detail

/// Loads a resource table from a file. N-Triples groups triples by subject;
/// TSV uses the first column as id and header names as properties.
inline ResourceTable load_table(const std::string& path, TableFormat format,
                                const std::optional<std::vector<std::string>>& property_filter = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  ResourceTable table;
  if (format == TableFormat::ntriples) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      detail::load_ntriples_line(table, line, line_no, property_filter);
    }
  } else {
    table = detail::load_tsv(in, property_filter);
  }
  if (table.empty()) throw std::runtime_error("no resources loaded from " + path);
  return table;
}

/// Uniform sample of `size` resources without replacement, preserving the
/// input's relative order. Same (table, size, seed) gives identical output.
inline ResourceTable sample_table(const ResourceTable& table, std::size_t size, std::uint64_t seed) {
  if (size == 0 || size > table.size())
    throw std::invalid_argument("sample_table: size must be in [1, table size]");
  Rng rng(seed);
  const auto chosen = sample_indices(rng, table.size(), size);
  ResourceTable out;
  for (std::size_t i : chosen) out.push_back(table[i]);
  return out;
}

/// Splits into two disjoint tables whose sizes differ by at most one.
inline std::pair<ResourceTable, ResourceTable> split_halves(const ResourceTable& table, std::uint64_t seed) {
  if (table.size() < 2) throw std::invalid_argument("split_halves: need at least 2 resources");
  Rng rng(seed);
  const std::size_t first_size = (table.size() + 1) / 2;
  const auto first_idx = sample_indices(rng, table.size(), first_size);
  std::vector<bool> in_first(table.size(), false);
  for (std::size_t i : first_idx) in_first[i] = true;
  ResourceTable a, b;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (in_first[i]) a.push_back(table[i]);
    else b.push_back(table[i]);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace linkrt
