#pragma once

#include <cstddef>
#include <vector>

namespace revisit {

// Dense nu x nu matrix in row-major order. Entry (i, j) is read as
// "view i given view j", so columns are conditional distributions.
template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}
  SquareMatrix(std::size_t n, std::vector<T> row_major) : n_(n), data_(std::move(row_major)) {}

  std::size_t size() const noexcept { return n_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  const std::vector<T>& row_major() const noexcept { return data_; }

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

}  // namespace revisit
