#pragma once

// A mapping is the result of evaluating a link specification: a set of
// (source id, target id) pairs with a similarity score in [0, 1]. Ordered
// storage keeps iteration and serialization deterministic.

#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace linkrt {

class Mapping {
 public:
  using Key = std::pair<std::string, std::string>;
  using Store = std::map<Key, double>;
  using const_iterator = Store::const_iterator;

  void set(const std::string& s, const std::string& t, double score) {
    scores_[Key(s, t)] = score;
  }

  /// Keeps the larger score when the pair is already present.
  void set_max(const std::string& s, const std::string& t, double score) {
    auto [it, inserted] = scores_.emplace(Key(s, t), score);
    if (!inserted && score > it->second) it->second = score;
  }

  bool contains(const std::string& s, const std::string& t) const {
    return scores_.count(Key(s, t)) != 0;
  }

  /// Score of a pair; 0 when absent.
  double score(const std::string& s, const std::string& t) const {
    auto it = scores_.find(Key(s, t));
    return it == scores_.end() ? 0.0 : it->second;
  }

  std::size_t size() const { return scores_.size(); }
  bool empty() const { return scores_.empty(); }
  const_iterator begin() const { return scores_.begin(); }
  const_iterator end() const { return scores_.end(); }

  bool operator==(const Mapping& other) const { return scores_ == other.scores_; }
  bool operator!=(const Mapping& other) const { return !(*this == other); }

  /// Same pairs and scores within an absolute tolerance.
  bool approx_equal(const Mapping& other, double tol) const {
    if (scores_.size() != other.scores_.size()) return false;
    auto a = scores_.begin();
    auto b = other.scores_.begin();
    for (; a != scores_.end(); ++a, ++b) {
      if (a->first != b->first) return false;
      if (std::fabs(a->second - b->second) > tol) return false;
    }
    return true;
  }

 private:
  Store scores_;
};

}  // namespace linkrt
