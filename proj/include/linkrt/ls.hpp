#pragma once

// Link specification ASTs: atomic nodes (measure(x.p_s, y.p_t) | theta) and
// complex nodes combining two children with AND / OR / MINUS plus a filter.
// parse_ls reads the textual syntax, eval_semantics is the brute-force
// reference evaluation every optimized path is tested against.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "linkrt/kb.hpp"
#include "linkrt/mapping.hpp"
#include "linkrt/measures.hpp"

namespace linkrt {

struct AtomicSpec {
  MeasureKind measure;
  std::string source_prop;
  std::string target_prop;
  double theta = 0.0;

  bool operator==(const AtomicSpec&) const = default;
};

enum class SpecOp { And, Or, Minus };

inline std::string_view op_name(SpecOp op) {
  switch (op) {
    case SpecOp::And: return "AND";
    case SpecOp::Or: return "OR";
    case SpecOp::Minus: return "MINUS";
  }
  throw std::logic_error("op_name: bad enum value");
}

/// Measure expression of a non-trivial filter; thresholds live in Filter.
struct FilterExpr {
  MeasureKind measure;
  std::string source_prop;
  std::string target_prop;

  bool operator==(const FilterExpr&) const = default;
};

/// Filter (f, tau); empty f is the epsilon filter acting on scores.
struct Filter {
  std::optional<FilterExpr> f;
  double tau = 0.0;

  bool operator==(const Filter&) const = default;
};

struct LinkSpec;
using LinkSpecPtr = std::shared_ptr<const LinkSpec>;

struct ComplexSpec {
  SpecOp op = SpecOp::And;
  LinkSpecPtr left;
  LinkSpecPtr right;
  Filter filter;
};

struct LinkSpec {
  std::variant<AtomicSpec, ComplexSpec> node;

  bool is_atomic() const { return std::holds_alternative<AtomicSpec>(node); }
  const AtomicSpec& atomic() const { return std::get<AtomicSpec>(node); }
  const ComplexSpec& complex() const { return std::get<ComplexSpec>(node); }
};

inline LinkSpecPtr make_atomic(MeasureKind m, std::string p_s, std::string p_t, double theta) {
  return std::make_shared<const LinkSpec>(LinkSpec{AtomicSpec{m, std::move(p_s), std::move(p_t), theta}});
}

inline LinkSpecPtr make_complex(SpecOp op, LinkSpecPtr left, LinkSpecPtr right, Filter filter) {
  return std::make_shared<const LinkSpec>(LinkSpec{ComplexSpec{op, std::move(left), std::move(right), std::move(filter)}});
}

inline bool operator==(const LinkSpec& a, const LinkSpec& b) {
  if (a.is_atomic() != b.is_atomic()) return false;
  if (a.is_atomic()) return a.atomic() == b.atomic();
  const ComplexSpec& x = a.complex();
  const ComplexSpec& y = b.complex();
  return x.op == y.op && x.filter == y.filter && *x.left == *y.left && *x.right == *y.right;
}

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

class LsParser {
 public:
  explicit LsParser(std::string_view text) : text_(text) {}

  LinkSpecPtr parse_toplevel() {
    LinkSpecPtr spec = parse_spec();
    skip_ws();
    if (match(">=")) {
      const double tau = parse_score();
      spec = fold_threshold(spec, tau);
    }
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(pos_, "trailing input");
    return spec;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool match(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(char c, const char* what) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      throw ParseError(pos_, std::string("expected ") + what);
    ++pos_;
  }

  std::string parse_name() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) throw ParseError(pos_, "expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  // Property names run to the closing delimiter, so IRIs survive verbatim.
  std::string parse_prop(char delim) {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != delim && text_[pos_] != '(' && text_[pos_] != '|')
      ++pos_;
    std::size_t end = pos_;
    while (end > start && (text_[end - 1] == ' ' || text_[end - 1] == '\t')) --end;
    if (end == start) throw ParseError(start, "expected a property name");
    return std::string(text_.substr(start, end - start));
  }

  double parse_score() {
    skip_ws();
    const std::size_t start = pos_;
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) throw ParseError(start, "expected a score");
    pos_ = std::size_t(ptr - text_.data());
    if (!(value >= 0.0 && value <= 1.0))
      throw ParseError(start, "score outside [0, 1]");
    return value;
  }

  LinkSpecPtr parse_spec() {
    skip_ws();
    const std::size_t name_pos = pos_;
    const std::string name = parse_name();
    if (name == "AND" || name == "OR" || name == "MINUS") {
      const SpecOp op = name == "AND" ? SpecOp::And : name == "OR" ? SpecOp::Or : SpecOp::Minus;
      expect('(', "'('");
      LinkSpecPtr left = parse_spec();
      expect(',', "','");
      LinkSpecPtr right = parse_spec();
      expect(')', "')'");
      // The operator threshold may be omitted (the root of the Amazon-GP
      // specification carries only a trailing >=); it defaults to 0.
      double tau = 0.0;
      if (match("|")) tau = parse_score();
      return make_complex(op, std::move(left), std::move(right), Filter{std::nullopt, tau});
    }
    MeasureKind measure;
    try {
      measure = measure_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw ParseError(name_pos, e.what());
    }
    expect('(', "'('");
    skip_ws();
    if (!match("x.")) throw ParseError(pos_, "expected 'x.' before the source property");
    std::string p_s = parse_prop(',');
    expect(',', "','");
    skip_ws();
    if (!match("y.")) throw ParseError(pos_, "expected 'y.' before the target property");
    std::string p_t = parse_prop(')');
    expect(')', "')'");
    expect('|', "'|' before the threshold");
    const double theta = parse_score();
    return make_atomic(measure, std::move(p_s), std::move(p_t), theta);
  }

  // A trailing >=tau equals appending an (epsilon, tau) filter: atomics fold
  // it into theta, complex nodes into the root filter (filter composition).
  static LinkSpecPtr fold_threshold(const LinkSpecPtr& spec, double tau) {
    if (spec->is_atomic()) {
      AtomicSpec a = spec->atomic();
      a.theta = std::max(a.theta, tau);
      return std::make_shared<const LinkSpec>(LinkSpec{std::move(a)});
    }
    ComplexSpec c = spec->complex();
    c.filter.tau = std::max(c.filter.tau, tau);
    return std::make_shared<const LinkSpec>(LinkSpec{std::move(c)});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline std::string format_score(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline LinkSpecPtr parse_ls(std::string_view text) {
  return detail::LsParser(text).parse_toplevel();
}

/// Canonical text: no whitespace, canonical measure names, shortest decimal
/// scores. parse_ls(unparse(s)) reproduces s exactly.
inline std::string unparse(const LinkSpec& spec) {
  if (spec.is_atomic()) {
    const AtomicSpec& a = spec.atomic();
    return std::string(measure_name(a.measure)) + "(x." + a.source_prop + ",y." + a.target_prop +
           ")|" + detail::format_score(a.theta);
  }
  const ComplexSpec& c = spec.complex();
  return std::string(op_name(c.op)) + "(" + unparse(*c.left) + "," + unparse(*c.right) + ")|" +
         detail::format_score(c.filter.tau);
}

/// Atomic nodes in post-order (left subtree, right subtree, then nothing for
/// the complex node itself).
inline std::vector<AtomicSpec> leaves(const LinkSpec& spec) {
  std::vector<AtomicSpec> out;
  auto walk = [&out](auto&& self, const LinkSpec& node) -> void {
    if (node.is_atomic()) {
      out.push_back(node.atomic());
      return;
    }
    self(self, *node.complex().left);
    self(self, *node.complex().right);
  };
  walk(walk, spec);
  return out;
}

/// Pairs present in both, scored min(r1, r2).
inline Mapping merge_and(const Mapping& a, const Mapping& b) {
  Mapping out;
  for (const auto& [key, r] : a) {
    if (!b.contains(key.first, key.second)) continue;
    out.set(key.first, key.second, std::min(r, b.score(key.first, key.second)));
  }
  return out;
}

/// Union of pairs, scored max(r1, r2) where both are present.
inline Mapping merge_or(const Mapping& a, const Mapping& b) {
  Mapping out;
  for (const auto& [key, r] : a) out.set(key.first, key.second, r);
  for (const auto& [key, r] : b) out.set_max(key.first, key.second, r);
  return out;
}

/// Pairs of the left mapping absent from the right, keeping left scores.
inline Mapping merge_minus(const Mapping& a, const Mapping& b) {
  Mapping out;
  for (const auto& [key, r] : a)
    if (!b.contains(key.first, key.second)) out.set(key.first, key.second, r);
  return out;
}

inline Mapping merge_op(SpecOp op, const Mapping& a, const Mapping& b) {
  switch (op) {
    case SpecOp::And: return merge_and(a, b);
    case SpecOp::Or: return merge_or(a, b);
    case SpecOp::Minus: return merge_minus(a, b);
  }
  throw std::logic_error("merge_op: bad enum value");
}

/// Epsilon filters keep pairs scoring at least tau. Measure filters keep
/// pairs whose filter similarity reaches tau, scores unchanged.
inline Mapping apply_filter(const Filter& filter, const Mapping& m, const ResourceTable& source,
                            const ResourceTable& target) {
  Mapping out;
  if (!filter.f) {
    for (const auto& [key, r] : m)
      if (r >= filter.tau) out.set(key.first, key.second, r);
    return out;
  }
  const FilterExpr& f = *filter.f;
  for (const auto& [key, r] : m) {
    const Resource* s = source.find(key.first);
    const Resource* t = target.find(key.second);
    if (!s || !t) throw std::invalid_argument("apply_filter: pair references unknown resource ids");
    if (record_similarity(f.measure, *s, *t, f.source_prop, f.target_prop) >= filter.tau)
      out.set(key.first, key.second, r);
  }
  return out;
}

/// Table 1 reference semantics, evaluated by brute force over S x T.
inline Mapping eval_semantics(const LinkSpec& spec, const ResourceTable& source,
                              const ResourceTable& target) {
  if (spec.is_atomic()) {
    const AtomicSpec& a = spec.atomic();
    Mapping out;
    for (const auto& s : source) {
      for (const auto& t : target) {
        const double sc = record_similarity(a.measure, s, t, a.source_prop, a.target_prop);
        if (sc >= a.theta) out.set(s.id, t.id, sc);
      }
    }
    return out;
  }
  const ComplexSpec& c = spec.complex();
  const Mapping left = eval_semantics(*c.left, source, target);
  const Mapping right = eval_semantics(*c.right, source, target);
  return apply_filter(c.filter, merge_op(c.op, left, right), source, target);
}

}  // namespace linkrt
