#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seqci/errors.hpp"

namespace seqci {

/// Row-major storage for the lattice {(t, s) : 0 <= s <= t <= horizon}.
/// Row t starts at t(t+1)/2, so a smaller horizon is a prefix of the data.
template <class T>
class Triangular {
 public:
  Triangular() = default;
  explicit Triangular(int horizon, const T& init = T{})
      : horizon_(horizon), data_(cell_count(horizon), init) {
    if (horizon < 0) throw DomainError("triangular array: negative horizon");
  }

  static std::size_t cell_count(int horizon) {
    const auto n = static_cast<std::size_t>(horizon + 1);
    return n * (n + 1) / 2;
  }

  int horizon() const noexcept { return horizon_; }
  bool empty() const noexcept { return horizon_ < 0; }

  T& operator()(int t, int s) { return data_[offset(t) + static_cast<std::size_t>(s)]; }
  const T& operator()(int t, int s) const {
    return data_[offset(t) + static_cast<std::size_t>(s)];
  }

  /// Bounds-checked access.
  const T& at(int t, int s) const {
    if (t < 0 || t > horizon_ || s < 0 || s > t)
      throw OutOfLattice("cell (" + std::to_string(t) + "," + std::to_string(s) +
                         ") outside lattice of horizon " + std::to_string(horizon_));
    return (*this)(t, s);
  }

  std::span<T> row(int t) { return {data_.data() + offset(t), static_cast<std::size_t>(t + 1)}; }
  std::span<const T> row(int t) const {
    return {data_.data() + offset(t), static_cast<std::size_t>(t + 1)};
  }

  Triangular truncated(int horizon) const {
    if (horizon > horizon_) throw DomainError("cannot truncate triangular array upwards");
    Triangular out;
    out.horizon_ = horizon;
    out.data_.assign(data_.begin(),
                     data_.begin() + static_cast<std::ptrdiff_t>(cell_count(horizon)));
    return out;
  }

  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Triangular&, const Triangular&) = default;

 private:
  static std::size_t offset(int t) {
    const auto n = static_cast<std::size_t>(t);
    return n * (n + 1) / 2;
  }

  int horizon_ = -1;
  std::vector<T> data_;
};

}  // namespace seqci
