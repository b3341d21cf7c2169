#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "blamestyle/corpus.hpp"
#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

using namespace blamestyle;

namespace {

Fragment frag(const std::string& id, const std::string& author, std::vector<std::string> lines) {
  Fragment f;
  f.fragment_id = id;
  f.author_key = author;
  f.lines = std::move(lines);
  f.origin = {"r", "p.cpp", 1};
  f.loc = count_loc(f.lines);
  return f;
}

/// `authors` authors with `per_author` one-line fragments each.
Corpus grid(std::size_t authors, std::size_t per_author) {
  std::vector<Fragment> fs;
  for (std::size_t a = 0; a < authors; ++a) {
    for (std::size_t i = 0; i < per_author; ++i) {
      fs.push_back(frag("f" + std::to_string(a) + "_" + std::to_string(i), "a" + std::to_string(a),
                        {"int v" + std::to_string(a) + "_" + std::to_string(i) + ";"}));
    }
  }
  return Corpus::from_fragments(std::move(fs));
}

}  // namespace

TEST(Corpus, FromFragmentsCollectsAuthors) {
  const Corpus c = grid(3, 2);
  EXPECT_EQ(c.authors, (std::set<std::string>{"a0", "a1", "a2"}));
  EXPECT_EQ(c.author_counts().at("a1"), 2u);
}

TEST(Corpus, RejectsDuplicateIds) {
  EXPECT_THROW(Corpus::from_fragments({frag("x", "a", {"1;"}), frag("x", "b", {"2;"})}), DataError);
}

TEST(CorpusJson, RoundTrips) {
  Corpus c = grid(2, 3);
  c.fragments[0].lines = {"std::string s = \"quote \\\" and tab\t\";", "// unicode \xc3\xa9"};
  c.fragments[0].loc = count_loc(c.fragments[0].lines);
  std::stringstream ss;
  write_corpus(ss, c);
  const Corpus back = read_corpus(ss);
  EXPECT_EQ(back.fragments, c.fragments);
  EXPECT_EQ(back.authors, c.authors);
}

TEST(CorpusJson, RejectsMalformedLine) {
  std::stringstream ss("{\"fragment_id\": 3}\n");
  EXPECT_THROW(read_corpus(ss), ParseError);
  std::stringstream bad("not json\n");
  EXPECT_THROW(read_corpus(bad), ParseError);
}

TEST(CorpusJson, EmptyInputGivesEmptyCorpus) {
  std::stringstream ss("");
  EXPECT_TRUE(read_corpus(ss).empty());
}

TEST(Dedupe, RemovesEveryCopyOfRepeatedContent) {
  const Corpus c = Corpus::from_fragments(
      {frag("1", "a", {"x++;"}), frag("2", "b", {"x++;"}), frag("3", "a", {"y++;"})});
  const Corpus d = dedupe(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.fragments[0].fragment_id, "3");
}

TEST(Filters, MinAndMaxLoc) {
  const Corpus c = Corpus::from_fragments({frag("1", "a", {"x;"}), frag("2", "a", {"x;", "y;", "z;"}),
                                           frag("3", "b", {"x;", "// c", "y;"})});
  EXPECT_EQ(filter_min_loc(c, 2).size(), 2u);
  EXPECT_EQ(filter_max_loc(c, 2).size(), 2u);
  EXPECT_EQ(filter_min_loc(c, 3).authors, (std::set<std::string>{"a"}));
}

TEST(Filters, ExcludeAndRestrict) {
  const Corpus c = grid(3, 2);
  EXPECT_EQ(exclude_authors(c, {"a0"}).authors, (std::set<std::string>{"a1", "a2"}));
  EXPECT_EQ(restrict_to_authors(c, {"a0"}).size(), 2u);
}

TEST(Balance, ExactCountsAndDropsSmallAuthors) {
  std::vector<Fragment> fs = grid(3, 5).fragments;
  fs.erase(fs.begin(), fs.begin() + 3);  // a0 keeps 2
  const Corpus c = Corpus::from_fragments(fs);
  const Corpus b = balance_per_author(c, 4, 9);
  EXPECT_EQ(b.authors, (std::set<std::string>{"a1", "a2"}));
  for (const auto& [a, n] : b.author_counts()) EXPECT_EQ(n, 4u);
  EXPECT_EQ(balance_per_author(c, 4, 9).fragments, b.fragments);
  EXPECT_THROW(balance_per_author(c, 6, 9), DataError);
}

TEST(Folds, StratifiedAndBalanced) {
  const Corpus c = grid(4, 23);
  const FoldPlan p = stratified_folds(c, 5, 3);
  std::map<std::pair<std::string, std::size_t>, std::size_t> cell;
  for (const Fragment& f : c.fragments) ++cell[{f.author_key, p.fold_of(f.fragment_id)}];
  for (const std::string& a : c.authors) {
    std::size_t lo = SIZE_MAX;
    std::size_t hi = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      lo = std::min(lo, cell[{a, k}]);
      hi = std::max(hi, cell[{a, k}]);
    }
    EXPECT_LE(hi - lo, 1u);
  }
  EXPECT_EQ(stratified_folds(c, 5, 3).assignment, p.assignment);
  EXPECT_NE(stratified_folds(c, 5, 4).assignment, p.assignment);
}

TEST(Folds, TooFewFragments) { EXPECT_THROW(stratified_folds(grid(2, 3), 5, 1), DataError); }

TEST(Corruption, ExactlyTwoMLabelsWrong) {
  const Corpus c = grid(5, 20);
  for (std::size_t m : {0u, 1u, 7u, 30u}) {
    const Corpus k = corrupt_labels(c, m, 11);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_EQ(k.fragments[i].fragment_id, c.fragments[i].fragment_id);
      wrong += k.fragments[i].author_key != c.fragments[i].author_key ? 1 : 0;
    }
    EXPECT_EQ(wrong, 2 * m);
    EXPECT_EQ(k.author_counts(), c.author_counts());  // swaps keep the label multiset
  }
}

TEST(Corruption, TooManySwaps) { EXPECT_THROW(corrupt_labels(grid(2, 3), 4, 1), DataError); }

TEST(OpenWorld, RoundsPartitionAuthors) {
  const Corpus c = grid(15, 1);
  std::set<std::string> seen;
  for (std::size_t r = 0; r < 3; ++r) {
    const OpenWorldPartition p = partition_open_world(c, 5, r, 4);
    EXPECT_EQ(p.unknowns.size(), 5u);
    EXPECT_EQ(p.suspects.size(), 10u);
    for (const std::string& u : p.unknowns) {
      EXPECT_FALSE(p.suspects.contains(u));
      EXPECT_TRUE(seen.insert(u).second);
    }
  }
  EXPECT_EQ(seen, c.authors);
  EXPECT_THROW(partition_open_world(c, 5, 3, 4), DataError);
}

TEST(LocHistogram, PercentagesSumToHundred) {
  const Corpus c = Corpus::from_fragments({frag("1", "a", {"x;"}), frag("2", "a", {"x;", "y;"}),
                                           frag("3", "b", std::vector<std::string>(12, "z;"))});
  const auto buckets = loc_histogram(c);
  double total = 0.0;
  for (const auto& b : buckets) total += b.percent;
  EXPECT_NEAR(total, 100.0, 0.1);
  EXPECT_EQ(buckets.front().label, "1");
  EXPECT_EQ(buckets[9].label, "10-99");
  EXPECT_EQ(buckets[9].count, 1u);
}
