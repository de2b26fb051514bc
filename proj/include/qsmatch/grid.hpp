#pragma once

#include <cassert>
#include <span>
#include <vector>

namespace qsmatch {

// Dense row-major 2-D array. Small fixed-shape tables (link counts,
// distances, fidelities); no linear algebra.
template <typename T>
class Grid {
 public:
  Grid() : rows_(0), cols_(0) {}
  Grid(int rows, int cols, T init = T{})
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, init) {
    assert(rows >= 0 && cols >= 0);
  }

  T& at(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  const T& at(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const T> flat() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  int rows_;
  int cols_;
  std::vector<T> data_;
};

}  // namespace qsmatch
