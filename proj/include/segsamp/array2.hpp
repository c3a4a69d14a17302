#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "segsamp/error.hpp"

namespace segsamp {

using cd = std::complex<double>;

// Cartesian phase-encode grid. Row index ky is slow, kz is fast.
struct GridSpec {
  int ny = 0;
  int nz = 0;

  std::size_t total() const { return static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz); }
  std::size_t index(int ky, int kz) const { return static_cast<std::size_t>(ky) * nz + kz; }
  bool contains(int ky, int kz) const { return ky >= 0 && ky < ny && kz >= 0 && kz < nz; }
  bool operator==(const GridSpec&) const = default;

  // Throws ValidationError unless ny, nz >= min_side.
  void validate(int min_side = 8) const;
};

template <typename T>
class Array2 {
public:
  Array2() = default;
  Array2(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}
  explicit Array2(GridSpec g, T fill = T{}) : Array2(g.ny, g.nz, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  GridSpec grid() const { return {rows_, cols_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }
  bool operator==(const Array2&) const = default;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using RealImage = Array2<double>;
using ComplexImage = Array2<cd>;
using Mask = Array2<std::uint8_t>;

// Normalized k-space radius in [0,1]: each axis mapped to [-1,1] around the
// DC index n/2, then divided by sqrt(2) so the grid corner sits at 1.
double normalized_radius(const GridSpec& g, int ky, int kz);

// Sum with pairwise (cascade) reduction; result depends only on input order.
double pairwise_sum(std::span<const double> v);

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) {
    throw ValidationError(std::string(what) + ": grid mismatch");
  }
}

} // namespace segsamp
