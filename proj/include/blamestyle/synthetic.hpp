#pragma once

#include <cstdint>

#include "blamestyle/corpus.hpp"

namespace blamestyle {

struct SyntheticOptions {
  std::size_t authors = 12;
  std::size_t fragments_per_author = 150;
  std::uint64_t seed = 20170419;
  /// Probability that a generated line comes from the pool shared by all authors.
  double shared_line_rate = 0.45;
};

/// Fragments drawn from per-author idiom distributions (naming, loop and
/// increment habits, preferred API calls and types, comment wording) mixed with
/// lines every author writes. Fragment contents are unique across the corpus,
/// and lengths follow a git-blame-like distribution dominated by one-line runs.
Corpus generate_synthetic_corpus(const SyntheticOptions& options = {});

}  // namespace blamestyle
