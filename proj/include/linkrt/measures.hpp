#pragma once

// String similarity measures and threshold joins. Two execution families:
// an edit-distance join (length + q-gram count filters, banded verification)
// and a prefix-filter join for the token measures (jaccard, overlap, cosine,
// trigrams). naive_join evaluates the full cross product and is the
// correctness oracle for both.
//
// All execution paths funnel scores through set_score / lev_score so equal
// inputs give bit-identical doubles regardless of which join produced them.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "linkrt/kb.hpp"
#include "linkrt/mapping.hpp"

namespace linkrt {

enum class MeasureKind { levenshtein, jaccard, overlap, cosine, trigrams };

inline constexpr MeasureKind kAllMeasures[] = {
    MeasureKind::levenshtein, MeasureKind::jaccard, MeasureKind::overlap,
    MeasureKind::cosine, MeasureKind::trigrams};

inline std::string_view measure_name(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::levenshtein: return "levenshtein";
    case MeasureKind::jaccard: return "jaccard";
    case MeasureKind::overlap: return "overlap";
    case MeasureKind::cosine: return "cosine";
    case MeasureKind::trigrams: return "trigrams";
  }
  throw std::logic_error("measure_name: bad enum value");
}

/// Resolves a measure name; `levSim` is an alias for levenshtein.
inline MeasureKind measure_from_name(std::string_view name) {
  if (name == "levenshtein" || name == "levSim") return MeasureKind::levenshtein;
  if (name == "jaccard") return MeasureKind::jaccard;
  if (name == "overlap") return MeasureKind::overlap;
  if (name == "cosine") return MeasureKind::cosine;
  if (name == "trigrams") return MeasureKind::trigrams;
  throw std::invalid_argument("unknown measure: " + std::string(name));
}

/// True for measures tokenizing on whitespace words; trigrams uses char
/// 3-grams and levenshtein none.
inline bool word_tokenized(MeasureKind kind) {
  return kind == MeasureKind::jaccard || kind == MeasureKind::overlap ||
         kind == MeasureKind::cosine;
}

namespace detail {

inline char lower(char c) {
  return char(std::tolower(static_cast<unsigned char>(c)));
}

inline void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace detail

/// Lowercased whitespace-separated words as a sorted set.
inline std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += detail::lower(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  detail::sort_unique(out);
  return out;
}

/// All contiguous 3-grams of the lowercased string as a sorted set; strings
/// shorter than 3 chars contribute themselves (nothing for the empty string).
inline std::vector<std::string> trigram_tokens(std::string_view s) {
  std::string low;
  low.reserve(s.size());
  for (char c : s) low += detail::lower(c);
  std::vector<std::string> out;
  if (low.empty()) return out;
  if (low.size() < 3) {
    out.push_back(std::move(low));
    return out;
  }
  out.reserve(low.size() - 2);
  for (std::size_t i = 0; i + 3 <= low.size(); ++i) out.push_back(low.substr(i, 3));
  detail::sort_unique(out);
  return out;
}

inline std::vector<std::string> token_set(MeasureKind kind, std::string_view s) {
  if (kind == MeasureKind::levenshtein)
    throw std::logic_error("token_set: levenshtein has no tokenizer");
  return word_tokenized(kind) ? word_tokens(s) : trigram_tokens(s);
}

/// Score of a token measure from the intersection size and the two set
/// sizes. Two empty sets score 1 (identical inputs), one empty scores 0.
inline double set_score(MeasureKind kind, std::size_t inter, std::size_t na, std::size_t nb) {
  if (na == 0 && nb == 0) return 1.0;
  if (na == 0 || nb == 0) return 0.0;
  switch (kind) {
    case MeasureKind::jaccard:
    case MeasureKind::trigrams:
      return double(inter) / double(na + nb - inter);
    case MeasureKind::overlap:
      return double(inter) / double(std::min(na, nb));
    case MeasureKind::cosine:
      return double(inter) / std::sqrt(double(na) * double(nb));
    case MeasureKind::levenshtein:
      break;
  }
  throw std::logic_error("set_score: levenshtein is not a token measure");
}

/// Normalized edit similarity 1 - d/max(|a|,|b|); 1 for two empty strings.
inline double lev_score(std::size_t d, std::size_t la, std::size_t lb) {
  const std::size_t m = std::max(la, lb);
  return m == 0 ? 1.0 : 1.0 - double(d) / double(m);
}

namespace detail {

template <class T>
std::size_t sorted_intersection_size(const std::vector<T>& a, const std::vector<T>& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else ++n, ++i, ++j;
  }
  return n;
}

}  // namespace detail

/// Exact Levenshtein distance, full dynamic program.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1 : 0)});
      diag = up;
    }
  }
  return row[b.size()];
}

namespace detail {

// Banded edit distance: exact when the distance is <= k, otherwise returns
// k + 1. O((2k+1) * max length) cells.
inline std::size_t banded_edit_distance(std::string_view a, std::string_view b, std::size_t k) {
  const std::size_t la = a.size(), lb = b.size();
  const std::size_t diff = la > lb ? la - lb : lb - la;
  if (diff > k) return k + 1;
  const std::size_t inf = k + 1;
  std::vector<std::size_t> prev(lb + 1), cur(lb + 1);
  for (std::size_t j = 0; j <= lb; ++j) prev[j] = (j <= k) ? j : inf;
  for (std::size_t i = 1; i <= la; ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    const std::size_t lo = (i > k) ? i - k : 0;
    const std::size_t hi = std::min(lb, i + k);
    if (lo == 0) cur[0] = i;  // lo == 0 implies i <= k
    for (std::size_t j = std::max<std::size_t>(1, lo); j <= hi; ++j) {
      std::size_t best = inf;
      if (prev[j] < inf) best = std::min(best, prev[j] + 1);
      if (cur[j - 1] < inf) best = std::min(best, cur[j - 1] + 1);
      if (prev[j - 1] < inf) best = std::min(best, prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0));
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return std::min(prev[lb], inf);
}

// ceil with a guard against the argument sitting one rounding error above an
// integer; may under-count by one (longer prefix), never over-counts.
inline std::size_t ceil_guard(double x) {
  const double c = std::ceil(x - 1e-9);
  return c <= 0.0 ? 0 : std::size_t(c);
}

// floor with the guard in the admitting direction.
inline std::size_t floor_guard(double x) {
  const double f = std::floor(x + 1e-9);
  return f <= 0.0 ? 0 : std::size_t(f);
}

}  // namespace detail

/// Similarity of two raw strings under a measure; in [0,1], symmetric.
inline double similarity(MeasureKind kind, std::string_view a, std::string_view b) {
  if (kind == MeasureKind::levenshtein)
    return lev_score(edit_distance(a, b), a.size(), b.size());
  const auto ta = token_set(kind, a);
  const auto tb = token_set(kind, b);
  return set_score(kind, detail::sorted_intersection_size(ta, tb), ta.size(), tb.size());
}

/// Best similarity over the cross product of the two property value lists;
/// 0 when either resource lacks the property.
inline double record_similarity(MeasureKind kind, const Resource& s, const Resource& t,
                                const std::string& p_s, const std::string& p_t) {
  const auto& sv = s.values(p_s);
  const auto& tv = t.values(p_t);
  if (sv.empty() || tv.empty()) return 0.0;
  double best = 0.0;
  for (const auto& a : sv)
    for (const auto& b : tv) best = std::max(best, similarity(kind, a, b));
  return best;
}

namespace detail {

inline void check_theta(double theta) {
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("join threshold must be in (0, 1]");
}

// Per-resource pre-tokenized values. Token measures store sorted unique
// string sets; levenshtein keeps the raw strings.
struct TokenizedTable {
  std::vector<std::size_t> resource;                   // owner per value record
  std::vector<std::vector<std::string>> tokens;        // token measures
  std::vector<std::string> raw;                        // levenshtein
};

inline TokenizedTable tokenize_table(MeasureKind kind, const ResourceTable& table,
                                     const std::string& prop) {
  TokenizedTable out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (const auto& v : table[i].values(prop)) {
      out.resource.push_back(i);
      if (kind == MeasureKind::levenshtein) out.raw.push_back(v);
      else out.tokens.push_back(token_set(kind, v));
    }
  }
  return out;
}

}  // namespace detail

/// Cross-product reference join: scores every |S| x |T| pair and keeps those
/// reaching theta. Oracle for atomic_join.
inline Mapping naive_join(MeasureKind kind, const ResourceTable& source, const ResourceTable& target,
                          const std::string& p_s, const std::string& p_t, double theta) {
  detail::check_theta(theta);
  const auto src = detail::tokenize_table(kind, source, p_s);
  const auto tgt = detail::tokenize_table(kind, target, p_t);
  std::vector<std::vector<std::size_t>> s_recs(source.size()), t_recs(target.size());
  for (std::size_t a = 0; a < src.resource.size(); ++a) s_recs[src.resource[a]].push_back(a);
  for (std::size_t b = 0; b < tgt.resource.size(); ++b) t_recs[tgt.resource[b]].push_back(b);
  Mapping out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      double best = -1.0;
      for (std::size_t a : s_recs[i]) {
        for (std::size_t b : t_recs[j]) {
          double sc;
          if (kind == MeasureKind::levenshtein) {
            sc = lev_score(edit_distance(src.raw[a], tgt.raw[b]), src.raw[a].size(), tgt.raw[b].size());
          } else {
            sc = set_score(kind, detail::sorted_intersection_size(src.tokens[a], tgt.tokens[b]),
                           src.tokens[a].size(), tgt.tokens[b].size());
          }
          best = std::max(best, sc);
        }
      }
      if (best >= theta) out.set(source[i].id, target[j].id, best);
    }
  }
  return out;
}

namespace detail {

// Edit-distance join: length-bucketed target index, candidate pruning by
// length difference and 2-gram bag overlap, banded verification.
inline Mapping edjoin(const ResourceTable& source, const ResourceTable& target,
                      const std::string& p_s, const std::string& p_t, double theta) {
  const auto src = tokenize_table(MeasureKind::levenshtein, source, p_s);
  const auto tgt = tokenize_table(MeasureKind::levenshtein, target, p_t);

  auto bigrams = [](const std::string& s) {
    std::vector<std::uint32_t> g;
    if (s.size() >= 2) {
      g.reserve(s.size() - 1);
      for (std::size_t i = 0; i + 2 <= s.size(); ++i)
        g.push_back((std::uint32_t(std::uint8_t(s[i])) << 8) | std::uint8_t(s[i + 1]));
      std::sort(g.begin(), g.end());  // bag: duplicates kept
    }
    return g;
  };

  std::vector<std::vector<std::uint32_t>> tgt_grams(tgt.raw.size());
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_len;
  for (std::size_t b = 0; b < tgt.raw.size(); ++b) {
    tgt_grams[b] = bigrams(tgt.raw[b]);
    by_len[tgt.raw[b].size()].push_back(b);
  }

  auto bag_overlap = [](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] < b[j]) ++i;
      else if (b[j] < a[i]) ++j;
      else ++n, ++i, ++j;
    }
    return n;
  };

  Mapping out;
  std::unordered_map<std::uint64_t, double> best;  // (s_idx << 32 | t_idx) -> max score
  for (std::size_t a = 0; a < src.raw.size(); ++a) {
    const std::string& x = src.raw[a];
    const std::vector<std::uint32_t> xg = bigrams(x);
    const std::size_t lo = ceil_guard(theta * double(x.size()));
    const std::size_t hi = floor_guard(double(x.size()) / theta);
    // Visit admissible length buckets; sweep the map instead when the length
    // range is wider than the number of distinct lengths.
    std::vector<std::size_t> lens;
    if (hi - lo + 1 <= by_len.size()) {
      for (std::size_t len = lo; len <= hi; ++len)
        if (by_len.count(len)) lens.push_back(len);
    } else {
      for (const auto& [len, recs] : by_len)
        if (len >= lo && len <= hi) lens.push_back(len);
    }
    for (std::size_t len : lens) {
      auto it = by_len.find(len);
      const std::size_t max_len = std::max(x.size(), len);
      const std::size_t k = floor_guard((1.0 - theta) * double(max_len));
      for (std::size_t b : it->second) {
        const std::string& y = tgt.raw[b];
        const std::size_t ldiff = x.size() > len ? x.size() - len : len - x.size();
        if (ldiff > k) continue;
        // One edit destroys at most q = 2 overlapping grams, so distance <= k
        // forces a 2-gram bag overlap of at least max(|G|) - 2k.
        const std::size_t gmax = std::max(xg.size(), tgt_grams[b].size());
        if (gmax > 2 * k && bag_overlap(xg, tgt_grams[b]) < gmax - 2 * k) continue;
        const std::size_t d = banded_edit_distance(x, y, k);
        if (d > k) continue;
        const double sc = lev_score(d, x.size(), y.size());
        if (sc < theta) continue;
        const std::uint64_t key = (std::uint64_t(src.resource[a]) << 32) | tgt.resource[b];
        auto [slot, inserted] = best.emplace(key, sc);
        if (!inserted && sc > slot->second) slot->second = sc;
      }
    }
  }
  for (const auto& [key, sc] : best)
    out.set(source[key >> 32].id, target[key & 0xffffffffu].id, sc);
  return out;
}

// Prefix-filter join for the token measures. Tokens get ids by ascending
// global frequency so record prefixes hold the rarest tokens.
inline Mapping ppjoin(MeasureKind kind, const ResourceTable& source, const ResourceTable& target,
                      const std::string& p_s, const std::string& p_t, double theta) {
  const auto src = tokenize_table(kind, source, p_s);
  const auto tgt = tokenize_table(kind, target, p_t);

  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& rec : src.tokens)
    for (const auto& t : rec) ++freq[t];
  for (const auto& rec : tgt.tokens)
    for (const auto& t : rec) ++freq[t];
  std::vector<const std::string*> order;
  order.reserve(freq.size());
  for (const auto& [tok, n] : freq) order.push_back(&tok);
  std::sort(order.begin(), order.end(), [&](const std::string* a, const std::string* b) {
    const std::size_t fa = freq.at(*a), fb = freq.at(*b);
    return fa != fb ? fa < fb : *a < *b;
  });
  std::unordered_map<std::string, std::uint32_t> rank;
  rank.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(*order[i], std::uint32_t(i));

  auto to_ranks = [&](const std::vector<std::vector<std::string>>& recs) {
    std::vector<std::vector<std::uint32_t>> out(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      out[i].reserve(recs[i].size());
      for (const auto& t : recs[i]) out[i].push_back(rank.at(t));
      std::sort(out[i].begin(), out[i].end());
    }
    return out;
  };
  const auto srec = to_ranks(src.tokens);
  const auto trec = to_ranks(tgt.tokens);

  // Guaranteed overlap per record: theta|z| for jaccard/trigrams, theta^2|z|
  // for cosine, 1 for overlap. Prefix length |z| - alpha + 1.
  auto prefix_len = [&](std::size_t n) -> std::size_t {
    if (n == 0) return 0;
    std::size_t alpha = 1;
    if (kind == MeasureKind::jaccard || kind == MeasureKind::trigrams)
      alpha = std::max<std::size_t>(1, ceil_guard(theta * double(n)));
    else if (kind == MeasureKind::cosine)
      alpha = std::max<std::size_t>(1, ceil_guard(theta * theta * double(n)));
    return n - alpha + 1;
  };

  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> postings;
  for (std::size_t b = 0; b < trec.size(); ++b) {
    const std::size_t p = prefix_len(trec[b].size());
    for (std::size_t i = 0; i < p; ++i) postings[trec[b][i]].push_back(std::uint32_t(b));
  }

  auto size_compatible = [&](std::size_t nx, std::size_t ny) {
    const double f = (kind == MeasureKind::cosine) ? theta * theta
                     : (kind == MeasureKind::overlap) ? 0.0
                                                      : theta;
    return f * double(ny) <= double(nx) + 1e-6 && f * double(nx) <= double(ny) + 1e-6;
  };

  Mapping out;
  std::unordered_map<std::uint64_t, double> best;
  std::vector<std::uint32_t> stamp(trec.size(), 0);
  std::uint32_t generation = 0;
  for (std::size_t a = 0; a < srec.size(); ++a) {
    ++generation;
    const std::size_t p = prefix_len(srec[a].size());
    for (std::size_t i = 0; i < p; ++i) {
      auto it = postings.find(srec[a][i]);
      if (it == postings.end()) continue;
      for (std::uint32_t b : it->second) {
        if (stamp[b] == generation) continue;
        stamp[b] = generation;
        if (!size_compatible(srec[a].size(), trec[b].size())) continue;
        const std::size_t inter = sorted_intersection_size(srec[a], trec[b]);
        const double sc = set_score(kind, inter, srec[a].size(), trec[b].size());
        const std::uint64_t key = (std::uint64_t(src.resource[a]) << 32) | tgt.resource[b];
        auto [slot, inserted] = best.emplace(key, sc);
        if (!inserted && sc > slot->second) slot->second = sc;
      }
    }
  }
  // Empty token sets never reach the index; two empty values score 1.
  std::vector<bool> src_has_empty(source.size(), false), tgt_has_empty(target.size(), false);
  for (std::size_t a = 0; a < srec.size(); ++a)
    if (srec[a].empty()) src_has_empty[src.resource[a]] = true;
  for (std::size_t b = 0; b < trec.size(); ++b)
    if (trec[b].empty()) tgt_has_empty[tgt.resource[b]] = true;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!src_has_empty[i]) continue;
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (!tgt_has_empty[j]) continue;
      const std::uint64_t key = (std::uint64_t(i) << 32) | j;
      auto [slot, inserted] = best.emplace(key, 1.0);
      if (!inserted && 1.0 > slot->second) slot->second = 1.0;
    }
  }
  for (const auto& [key, sc] : best)
    if (sc >= theta) out.set(source[key >> 32].id, target[key & 0xffffffffu].id, sc);
  return out;
}

}  // namespace detail

/// Filtered threshold join; result is exactly naive_join's. Unknown
/// properties yield an empty mapping.
inline Mapping atomic_join(MeasureKind kind, const ResourceTable& source, const ResourceTable& target,
                           const std::string& p_s, const std::string& p_t, double theta) {
  detail::check_theta(theta);
  if (kind == MeasureKind::levenshtein)
    return detail::edjoin(source, target, p_s, p_t, theta);
  return detail::ppjoin(kind, source, target, p_s, p_t, theta);
}

/// Mean wall-clock milliseconds of `repetitions` atomic_join runs.
inline double measure_runtime(MeasureKind kind, const ResourceTable& source, const ResourceTable& target,
                              const std::string& p_s, const std::string& p_t, double theta,
                              std::size_t repetitions) {
  if (repetitions < 1) throw std::invalid_argument("measure_runtime: repetitions must be >= 1");
  static volatile std::size_t sink = 0;
  double total_ms = 0.0;
  for (std::size_t r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const Mapping m = atomic_join(kind, source, target, p_s, p_t, theta);
    const auto t1 = std::chrono::steady_clock::now();
    sink = sink + m.size();
    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return total_ms / double(repetitions);
}

}  // namespace linkrt
