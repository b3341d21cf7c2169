#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "blamestyle/blame.hpp"
#include "blamestyle/sparse.hpp"

namespace blamestyle {

enum class FeatureCategory : std::uint8_t { AstNode, AstBigram, WordUnigram, Keyword, ApiSymbol };
enum class Weighting : std::uint8_t { Raw, Tfidf };

std::string_view to_string(FeatureCategory c);
std::string_view to_string(Weighting w);
FeatureCategory parse_category(std::string_view s);
Weighting parse_weighting(std::string_view s);

struct FeatureKey {
  FeatureCategory category = FeatureCategory::AstNode;
  Weighting weighting = Weighting::Raw;
  std::string token;

  auto operator<=>(const FeatureKey&) const = default;
};

/// The C++17 reserved words (alternative operator spellings included).
const std::set<std::string, std::less<>>& cpp_keywords();
/// Standard-library and POSIX identifiers from data/api_symbols.txt.
const std::set<std::string, std::less<>>& api_symbols();

std::map<std::string, std::size_t> keyword_counts(std::span<const std::string> tokens);
std::map<std::string, std::size_t> api_symbol_counts(std::span<const std::string> tokens);

/// Raw per-fragment counts before any weighting.
struct FragmentCounts {
  std::string fragment_id;
  std::string author_key;
  std::size_t token_count = 0;  // word tokens of the fragment's own lines
  std::map<std::pair<FeatureCategory, std::string>, std::size_t> counts;
};

/// AST features come from the dummy-main wrapped text; word, keyword and API
/// features from the fragment lines alone, so wrapper tokens never count.
FragmentCounts extract_counts(const Fragment& f);
/// Parallel over fragments; output order follows input order.
std::vector<FragmentCounts> extract_all(std::span<const Fragment> fragments);

/// Column layout fit on training fragments. Columns are ordered by
/// (category, weighting, token).
class FeatureDictionary {
 public:
  FeatureDictionary() = default;
  FeatureDictionary(std::vector<FeatureKey> keys, std::vector<double> idf, std::size_t n_authors_fit);

  std::size_t dimension() const { return keys_.size(); }
  std::size_t n_authors_fit() const { return n_authors_fit_; }
  const std::vector<FeatureKey>& keys() const { return keys_; }
  const std::vector<double>& idf() const { return idf_; }
  /// Column of `key`, or -1.
  std::int64_t index_of(const FeatureKey& key) const;

  bool operator==(const FeatureDictionary& o) const {
    return keys_ == o.keys_ && idf_ == o.idf_ && n_authors_fit_ == o.n_authors_fit_;
  }

 private:
  std::vector<FeatureKey> keys_;
  std::vector<double> idf_;  // per column; raw columns carry their key's idf too
  std::size_t n_authors_fit_ = 0;
  std::map<FeatureKey, std::uint32_t> index_;
};

/// tf = count / token_count (0 without tokens); idf = ln(n_authors / n_authors_using).
/// Keeps a raw and a tfidf column for each observed key unless that column is
/// constant over the training fragments. Throws DataError with fewer than two
/// fragments or authors, or when no column survives.
FeatureDictionary build_dictionary(std::span<const FragmentCounts> training);

SparseFeatureVector vectorize(const FragmentCounts& counts, const FeatureDictionary& dict);
std::vector<SparseFeatureVector> vectorize_all(std::span<const FragmentCounts> counts,
                                               const FeatureDictionary& dict);

void write_dictionary(std::ostream& os, const FeatureDictionary& dict);
FeatureDictionary read_dictionary(std::istream& is);
void write_dictionary(const std::filesystem::path& path, const FeatureDictionary& dict);
FeatureDictionary read_dictionary(const std::filesystem::path& path);

/// One line per fragment: `fragment_id<TAB>author<TAB>index:value ...`.
void write_vectors(std::ostream& os, std::span<const FragmentCounts> counts,
                   std::span<const SparseFeatureVector> vectors);

struct SparsityReport {
  std::size_t dimension = 0;
  std::size_t vectors = 0;
  double mean_nonzero = 0.0;
};

SparsityReport sparsity_report(std::span<const SparseFeatureVector> vectors);

}  // namespace blamestyle
