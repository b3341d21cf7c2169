#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace blamestyle {

/// Sorted (column, value) pairs; every stored value is nonzero.
struct SparseFeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::size_t dimension = 0;

  std::size_t nonzero() const { return entries.size(); }
  /// Binary search; absent columns read as 0.
  double value(std::uint32_t column) const;
  /// Throws DataError on unsorted, duplicate, out-of-range, zero or negative entries.
  void validate() const;

  bool operator==(const SparseFeatureVector&) const = default;
};

}  // namespace blamestyle
