#pragma once

#include <cstddef>
#include <vector>

namespace rac {

using LabelIndex = std::size_t;
using ActionIndex = std::size_t;

/// Bit-set over label indices [0, universe).
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::size_t universe) : bits_(universe, false) {}

  static LabelSet full(std::size_t universe) {
    LabelSet s(universe);
    s.bits_.assign(universe, true);
    return s;
  }

  void insert(LabelIndex y) { bits_.at(y) = true; }
  void erase(LabelIndex y) { bits_.at(y) = false; }
  bool contains(LabelIndex y) const { return y < bits_.size() && bits_[y]; }

  std::size_t universe() const { return bits_.size(); }
  std::size_t count() const {
    std::size_t n = 0;
    for (bool b : bits_) n += b ? 1 : 0;
    return n;
  }
  bool empty() const { return count() == 0; }

  std::vector<LabelIndex> members() const {
    std::vector<LabelIndex> out;
    for (std::size_t y = 0; y < bits_.size(); ++y)
      if (bits_[y]) out.push_back(y);
    return out;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<bool> bits_;
};

}  // namespace rac
