#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "blamestyle/random.hpp"
#include "blamestyle/sparse.hpp"

namespace oracle {

struct TinyDataset {
  std::vector<std::vector<double>> x;  // dense rows
  std::vector<std::uint32_t> y;
  std::size_t classes = 0;
};

inline double gini_of(const std::vector<double>& counts) {
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total == 0.0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += (c / total) * (c / total);
  return 1.0 - sq;
}

/// Impurity decrease of splitting `d` on `column` at `threshold` (left when <=).
inline double gini_decrease(const TinyDataset& d, std::size_t column, double threshold) {
  std::vector<double> all(d.classes, 0.0), left(d.classes, 0.0), right(d.classes, 0.0);
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    all[d.y[i]] += 1;
    (d.x[i][column] <= threshold ? left : right)[d.y[i]] += 1;
  }
  const double n = static_cast<double>(d.x.size());
  const double nl = std::accumulate(left.begin(), left.end(), 0.0);
  const double nr = n - nl;
  return gini_of(all) - (nl / n) * gini_of(left) - (nr / n) * gini_of(right);
}

/// Exhaustive search over every column and every cut between distinct values.
inline double best_gini_decrease(const TinyDataset& d) {
  double best = 0.0;
  for (std::size_t col = 0; col < d.x.front().size(); ++col) {
    std::vector<double> values;
    for (const auto& row : d.x) values.push_back(row[col]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      best = std::max(best, gini_decrease(d, col, values[k]));
    }
  }
  return best;
}

/// Up to 8 rows, up to 3 columns, values in {0, 1, 2, 3} / 2, at least two labels.
inline TinyDataset random_tiny(blamestyle::Rng& rng) {
  TinyDataset d;
  const std::size_t n = 2 + rng() % 7;
  const std::size_t cols = 1 + rng() % 3;
  d.classes = 2 + rng() % 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (std::size_t c = 0; c < cols; ++c) row.push_back(static_cast<double>(rng() % 4) / 2.0);
    d.x.push_back(row);
    d.y.push_back(static_cast<std::uint32_t>(i < 2 ? i : rng() % d.classes));
  }
  return d;
}

inline blamestyle::SparseFeatureVector to_sparse(const std::vector<double>& row) {
  blamestyle::SparseFeatureVector v;
  v.dimension = row.size();
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(c), row[c]});
  }
  return v;
}

/// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  return r;
}

/// Pearson correlation of the ranks; absent when either side is constant.
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

/// Sum of squared deviations from the pooled mean.
inline double total_sum_of_squares(const std::vector<std::vector<double>>& groups) {
  double sum = 0.0;
  double n = 0.0;
  for (const auto& g : groups) {
    for (double x : g) {
      sum += x;
      n += 1;
    }
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& g : groups) {
    for (double x : g) ss += (x - mean) * (x - mean);
  }
  return ss;
}

}  // namespace oracle
