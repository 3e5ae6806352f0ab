/**
 * Copyright (c) dagpart contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "dagpart/types.hpp"

#include <algorithm>
#include <cassert>
#include <memory>
#include <vector>

namespace dagpart {

/// Binary-indexed tree over [0, size) with point add and prefix sums.
template <typename T> class FenwickTree {
public:
  FenwickTree() = default;
  explicit FenwickTree(std::size_t size) : tree_(size + 1, T{}) {}

  std::size_t size() const { return tree_.empty() ? 0 : tree_.size() - 1; }

  void add(std::size_t i, T delta) {
    assert(i < size());
    for (++i; i < tree_.size(); i += i & (~i + 1))
      tree_[i] += delta;
  }

  /// Sum over [0, end).
  T prefix(std::size_t end) const {
    T sum{};
    for (end = std::min(end, size()); end > 0; end -= end & (~end + 1))
      sum += tree_[end];
    return sum;
  }

  /// Sum over [lo, hi).
  T range(std::size_t lo, std::size_t hi) const {
    return hi <= lo ? T{} : prefix(hi) - prefix(lo);
  }

private:
  std::vector<T> tree_;
};

/// \p cols Fenwick trees over [0, size) stored interleaved, so that the
/// same position of every column shares cache lines.
template <typename T> class FenwickColumns {
public:
  FenwickColumns() = default;
  FenwickColumns(std::size_t size, std::size_t cols)
      : size_(size), cols_(cols), tree_((size + 1) * cols, T{}) {}

  std::size_t size() const { return size_; }
  std::size_t cols() const { return cols_; }

  void add(std::size_t i, std::size_t col, T delta) {
    assert(i < size_ && col < cols_);
    for (++i; i <= size_; i += i & (~i + 1))
      tree_[i * cols_ + col] += delta;
  }
  /// Sum of column \p col over [0, end).
  T prefix(std::size_t end, std::size_t col) const {
    T sum{};
    for (end = std::min(end, size_); end > 0; end -= end & (~end + 1))
      sum += tree_[end * cols_ + col];
    return sum;
  }
  T range(std::size_t lo, std::size_t hi, std::size_t col) const {
    return hi <= lo ? T{} : prefix(hi, col) - prefix(lo, col);
  }
  /// Every column's sum over [lo, hi) into \p out (size cols()).
  void range_all(std::size_t lo, std::size_t hi, T *out) const {
    std::fill(out, out + cols_, T{});
    if (hi <= lo)
      return;
    for (std::size_t e = std::min(hi, size_); e > 0; e -= e & (~e + 1))
      for (std::size_t c = 0; c < cols_; ++c)
        out[c] += tree_[e * cols_ + c];
    for (std::size_t e = std::min(lo, size_); e > 0; e -= e & (~e + 1))
      for (std::size_t c = 0; c < cols_; ++c)
        out[c] -= tree_[e * cols_ + c];
  }

private:
  std::size_t size_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> tree_;
};

/// Sorted distinct level values; maps a level to its compressed rank.
class LevelAxis {
public:
  explicit LevelAxis(std::vector<TimeNs> levels) : levels_(std::move(levels)) {
    std::sort(levels_.begin(), levels_.end());
    levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
  }

  std::size_t size() const { return levels_.size(); }

  /// Rank of an exact level value present on the axis.
  std::size_t rank(TimeNs level) const {
    auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
    assert(it != levels_.end() && *it == level);
    return static_cast<std::size_t>(it - levels_.begin());
  }

  /// First rank whose level is >= \p level.
  std::size_t lower(TimeNs level) const {
    return static_cast<std::size_t>(
        std::lower_bound(levels_.begin(), levels_.end(), level) -
        levels_.begin());
  }

private:
  std::vector<TimeNs> levels_;
};

/// Work per level for one set of nodes: leaf r holds the summed comp of the
/// nodes whose top level has rank r.
class LevelTree {
public:
  LevelTree() = default;
  explicit LevelTree(std::shared_ptr<const LevelAxis> axis)
      : axis_(std::move(axis)), tree_(axis_->size()) {}

  void add(TimeNs level, TimeNs work) { tree_.add(axis_->rank(level), work); }

  /// Work of nodes whose level lies in [lo, hi).
  TimeNs range(TimeNs lo, TimeNs hi) const {
    return hi <= lo ? 0 : tree_.range(axis_->lower(lo), axis_->lower(hi));
  }

  TimeNs total() const { return tree_.prefix(tree_.size()); }

private:
  std::shared_ptr<const LevelAxis> axis_;
  FenwickTree<TimeNs> tree_;
};

} // namespace dagpart
