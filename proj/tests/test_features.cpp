#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "blamestyle/error.hpp"
#include "blamestyle/features.hpp"
#include "blamestyle/syntax.hpp"
#include "blamestyle/random.hpp"
#include "blamestyle/sparse.hpp"
#include "blamestyle/synthetic.hpp"

using namespace blamestyle;

namespace {

Fragment frag(const std::string& id, const std::string& author, std::vector<std::string> lines) {
  Fragment f;
  f.fragment_id = id;
  f.author_key = author;
  f.lines = std::move(lines);
  f.loc = count_loc(f.lines);
  return f;
}

FragmentCounts counts(const std::string& id, const std::string& author, std::size_t tokens,
                      std::map<std::string, std::size_t> words) {
  FragmentCounts fc;
  fc.fragment_id = id;
  fc.author_key = author;
  fc.token_count = tokens;
  for (const auto& [w, n] : words) fc.counts[{FeatureCategory::WordUnigram, w}] = n;
  return fc;
}

}  // namespace

TEST(Vocabularies, KeywordsAndSymbols) {
  EXPECT_TRUE(cpp_keywords().contains("constexpr"));
  EXPECT_FALSE(cpp_keywords().contains("printf"));
  EXPECT_TRUE(api_symbols().contains("printf"));
  EXPECT_GT(api_symbols().size(), 100u);
  const std::vector<std::string> toks = {"for", "int", "printf", "for", "x"};
  EXPECT_EQ(keyword_counts(toks), (std::map<std::string, std::size_t>{{"for", 2}, {"int", 1}}));
  EXPECT_EQ(api_symbol_counts(toks), (std::map<std::string, std::size_t>{{"printf", 1}}));
}

TEST(ExtractCounts, UsesFragmentLinesForWordsAndWrapperForAst) {
  const FragmentCounts fc = extract_counts(frag("a", "x", {"x++; // hi"}));
  EXPECT_EQ(fc.token_count, tokenize_words("x++; // hi").size());
  EXPECT_EQ(fc.counts.count({FeatureCategory::WordUnigram, "main"}), 0u);  // wrapper text excluded
  EXPECT_EQ(fc.counts.at({FeatureCategory::AstNode, "FunctionDef"}), 1u);  // wrapper parsed
  EXPECT_EQ(fc.counts.at({FeatureCategory::AstNode, "UnaryOp"}), 1u);
  EXPECT_EQ(fc.counts.at({FeatureCategory::AstBigram, "ExprStatement>UnaryOp"}), 1u);
  EXPECT_EQ(fc.counts.at({FeatureCategory::WordUnigram, "+"}), 2u);
}

TEST(ExtractAll, ParallelMatchesSequential) {
  SyntheticOptions opt;
  opt.authors = 3;
  opt.fragments_per_author = 30;
  const Corpus c = generate_synthetic_corpus(opt);
  const auto all = extract_all(c.fragments);
  ASSERT_EQ(all.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const FragmentCounts one = extract_counts(c.fragments[i]);
    EXPECT_EQ(all[i].fragment_id, one.fragment_id);
    EXPECT_EQ(all[i].counts, one.counts);
  }
}

TEST(Dictionary, HandComputedIdfAndValues) {
  // "a" used by both authors (idf 0), "b" only by author p, "c" constant across all samples.
  const std::vector<FragmentCounts> train = {counts("1", "p", 4, {{"a", 1}, {"b", 2}, {"c", 1}}),
                                             counts("2", "q", 2, {{"a", 2}, {"c", 1}}),
                                             counts("3", "p", 4, {{"b", 1}, {"c", 1}})};
  // "c": tf 1/4, 1/2, 1/4 varies, so it stays.
  const FeatureDictionary d = build_dictionary(train);
  const FeatureKey a_raw{FeatureCategory::WordUnigram, Weighting::Raw, "a"};
  const FeatureKey a_tfidf{FeatureCategory::WordUnigram, Weighting::Tfidf, "a"};
  const FeatureKey b_tfidf{FeatureCategory::WordUnigram, Weighting::Tfidf, "b"};
  EXPECT_GE(d.index_of(a_raw), 0);
  EXPECT_EQ(d.index_of(a_tfidf), -1);  // idf 0 makes the column constant zero
  ASSERT_GE(d.index_of(b_tfidf), 0);
  EXPECT_DOUBLE_EQ(d.idf()[static_cast<std::size_t>(d.index_of(b_tfidf))], std::log(2.0));
  const SparseFeatureVector v = vectorize(train[0], d);
  EXPECT_DOUBLE_EQ(v.value(static_cast<std::uint32_t>(d.index_of(a_raw))), 0.25);
  EXPECT_DOUBLE_EQ(v.value(static_cast<std::uint32_t>(d.index_of(b_tfidf))), 0.5 * std::log(2.0));
}

TEST(Dictionary, DropsConstantColumns) {
  const std::vector<FragmentCounts> train = {counts("1", "p", 2, {{"k", 1}, {"v", 1}}),
                                             counts("2", "q", 2, {{"k", 1}, {"w", 1}})};
  const FeatureDictionary d = build_dictionary(train);
  EXPECT_EQ(d.index_of({FeatureCategory::WordUnigram, Weighting::Raw, "k"}), -1);
  EXPECT_GE(d.index_of({FeatureCategory::WordUnigram, Weighting::Raw, "v"}), 0);
}

TEST(Dictionary, Preconditions) {
  EXPECT_THROW(build_dictionary(std::vector<FragmentCounts>{counts("1", "p", 1, {{"a", 1}})}), DataError);
  EXPECT_THROW(build_dictionary(std::vector<FragmentCounts>{counts("1", "p", 1, {{"a", 1}}), counts("2", "p", 1, {{"b", 1}})}),
               DataError);
  EXPECT_THROW(build_dictionary(std::vector<FragmentCounts>{counts("1", "p", 1, {{"a", 1}}), counts("2", "q", 1, {{"a", 1}})}),
               DataError);
}

// Brute-force oracle: dense tf matrix, column kept iff its values are not all equal.
TEST(Dictionary, MatchesDenseOracleOnRandomData) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<FragmentCounts> train;
    const std::size_t n = 2 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      std::map<std::string, std::size_t> words;
      for (int w = 0; w < 5; ++w) {
        if (rng() % 2) words[std::string(1, static_cast<char>('a' + w))] = 1 + rng() % 3;
      }
      train.push_back(counts(std::to_string(i), "u" + std::to_string(i % 3), 1 + rng() % 6, words));
    }
    std::set<std::string> authors;
    for (const auto& fc : train) authors.insert(fc.author_key);
    if (authors.size() < 2) continue;

    std::vector<FeatureKey> expect;
    for (int w = 0; w < 5; ++w) {
      const std::string tok(1, static_cast<char>('a' + w));
      std::vector<double> tf;
      std::set<std::string> users;
      for (const auto& fc : train) {
        const auto it = fc.counts.find({FeatureCategory::WordUnigram, tok});
        const double x = it == fc.counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(fc.token_count);
        tf.push_back(x);
        if (x > 0) users.insert(fc.author_key);
      }
      if (users.empty()) continue;
      const double idf = std::log(static_cast<double>(authors.size()) / static_cast<double>(users.size()));
      const auto varies = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
      };
      std::vector<double> weighted;
      for (double x : tf) weighted.push_back(x * idf);
      if (varies(tf)) expect.push_back({FeatureCategory::WordUnigram, Weighting::Raw, tok});
      if (varies(tf) && varies(weighted)) expect.push_back({FeatureCategory::WordUnigram, Weighting::Tfidf, tok});
    }
    std::sort(expect.begin(), expect.end());
    if (expect.empty()) {
      EXPECT_THROW(build_dictionary(train), DataError);
      continue;
    }
    const FeatureDictionary d = build_dictionary(train);
    EXPECT_EQ(d.keys(), expect);
    for (const auto& fc : train) {
      const SparseFeatureVector v = vectorize(fc, d);
      EXPECT_NO_THROW(v.validate());
      EXPECT_EQ(v.dimension, d.dimension());
    }
  }
}

TEST(Dictionary, UnseenFeaturesIgnored) {
  const std::vector<FragmentCounts> train = {counts("1", "p", 2, {{"a", 1}}), counts("2", "q", 2, {{"b", 1}})};
  const FeatureDictionary d = build_dictionary(train);
  const SparseFeatureVector v = vectorize(counts("3", "p", 2, {{"zzz", 2}}), d);
  EXPECT_EQ(v.nonzero(), 0u);
}

TEST(Dictionary, SerializationRoundTrip) {
  SyntheticOptions opt;
  opt.authors = 3;
  opt.fragments_per_author = 20;
  const auto all = extract_all(generate_synthetic_corpus(opt).fragments);
  const FeatureDictionary d = build_dictionary(all);
  std::stringstream ss;
  write_dictionary(ss, d);
  const FeatureDictionary back = read_dictionary(ss);
  EXPECT_EQ(back, d);
  EXPECT_EQ(vectorize_all(all, back), vectorize_all(all, d));
}

TEST(Dictionary, RejectsCorruptFile) {
  std::stringstream ss("blamestyle-dictionary 1 2 2\nword_unigram,raw,\"a\",0,0\n");
  EXPECT_THROW(read_dictionary(ss), ParseError);
  std::stringstream bad("something else\n");
  EXPECT_THROW(read_dictionary(bad), ParseError);
}

TEST(Sparse, ValueAndValidate) {
  SparseFeatureVector v;
  v.dimension = 10;
  v.entries = {{1, 0.5}, {7, 2.0}};
  EXPECT_DOUBLE_EQ(v.value(7), 2.0);
  EXPECT_DOUBLE_EQ(v.value(3), 0.0);
  EXPECT_NO_THROW(v.validate());
  v.entries = {{7, 1.0}, {1, 1.0}};
  EXPECT_THROW(v.validate(), DataError);
  v.entries = {{11, 1.0}};
  EXPECT_THROW(v.validate(), DataError);
  v.entries = {{1, 0.0}};
  EXPECT_THROW(v.validate(), DataError);
}

TEST(Sparsity, MeanNonzero) {
  std::vector<SparseFeatureVector> vs(2);
  vs[0].dimension = vs[1].dimension = 5;
  vs[0].entries = {{0, 1.0}};
  vs[1].entries = {{0, 1.0}, {3, 1.0}, {4, 1.0}};
  const SparsityReport r = sparsity_report(vs);
  EXPECT_EQ(r.dimension, 5u);
  EXPECT_DOUBLE_EQ(r.mean_nonzero, 2.0);
}
