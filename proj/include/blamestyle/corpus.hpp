#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "blamestyle/blame.hpp"

namespace blamestyle {

/// A suspect set together with its fragments. Immutable by convention: every
/// operation below returns a new value.
struct Corpus {
  std::vector<Fragment> fragments;
  std::set<std::string> authors;

  /// Collects the author set from the fragments and checks id uniqueness.
  static Corpus from_fragments(std::vector<Fragment> fragments);

  bool empty() const { return fragments.empty(); }
  std::size_t size() const { return fragments.size(); }
  std::map<std::string, std::size_t> author_counts() const;
  /// Throws DataError when an invariant is broken.
  void validate() const;
};

/// Line-delimited JSON, one fragment per line:
/// {"fragment_id","author_key","origin":{"repo","path","start_line"},"loc","lines":[...]}
void write_corpus(std::ostream& os, const Corpus& c);
void write_corpus(const std::filesystem::path& path, const Corpus& c);
Corpus read_corpus(std::istream& is);
Corpus read_corpus(const std::filesystem::path& path);

/// Removes every fragment whose joined content occurs more than once.
Corpus dedupe(const Corpus& c);
Corpus filter_min_loc(const Corpus& c, std::size_t min_loc);
Corpus filter_max_loc(const Corpus& c, std::size_t max_loc);
Corpus exclude_authors(const Corpus& c, const std::set<std::string>& authors);
Corpus restrict_to_authors(const Corpus& c, const std::set<std::string>& authors);

/// Down-samples authors with at least `n_per_author` fragments to exactly that
/// many and drops the rest. Throws DataError if nothing survives.
Corpus balance_per_author(const Corpus& c, std::size_t n_per_author, std::uint64_t seed);

struct FoldPlan {
  std::size_t k = 0;
  std::map<std::string, std::size_t> assignment;  // fragment_id -> fold

  std::size_t fold_of(const std::string& fragment_id) const;
};

/// Per author: seeded shuffle, then round-robin over folds.
FoldPlan stratified_folds(const Corpus& c, std::size_t k, std::uint64_t seed);

/// Performs `m` label swaps between fragments whose labels differ. Each fragment
/// takes part in at most one swap, so exactly 2m labels end up wrong.
Corpus corrupt_labels(const Corpus& c, std::size_t m, std::uint64_t seed);

struct OpenWorldPartition {
  std::set<std::string> suspects;
  std::set<std::string> unknowns;
};

OpenWorldPartition partition_open_world(const Corpus& c, std::size_t n_unknown, std::size_t round,
                                        std::uint64_t seed);

struct LocBucket {
  std::string label;
  std::size_t count = 0;
  double percent = 0.0;
};

/// Buckets 1..9, 10-99 and 100+. A "0" bucket is emitted first only when the
/// corpus holds fragments without code lines.
std::vector<LocBucket> loc_histogram(const Corpus& c);
void write_loc_histogram_csv(std::ostream& os, const std::vector<LocBucket>& buckets);

}  // namespace blamestyle
