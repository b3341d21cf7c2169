#include "blamestyle/sparse.hpp"

#include <algorithm>
#include <string>

#include "blamestyle/error.hpp"

namespace blamestyle {

double SparseFeatureVector::value(std::uint32_t column) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), column,
                                   [](const auto& e, std::uint32_t c) { return e.first < c; });
  return it != entries.end() && it->first == column ? it->second : 0.0;
}

void SparseFeatureVector::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [col, val] = entries[i];
    if (col >= dimension) throw DataError("sparse column " + std::to_string(col) + " out of range");
    if (!(val > 0.0)) throw DataError("sparse value at column " + std::to_string(col) + " is not positive");
    if (i > 0 && entries[i - 1].first >= col) throw DataError("sparse entries not strictly ascending");
  }
}

}  // namespace blamestyle
