#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "blamestyle/corpus.hpp"
#include "blamestyle/synthetic.hpp"
#include "test_util.hpp"

using namespace blamestyle;

TEST(Synthetic, ShapeAndDeterminism) {
  SyntheticOptions opt;
  opt.authors = 5;
  opt.fragments_per_author = 40;
  const Corpus a = generate_synthetic_corpus(opt);
  EXPECT_EQ(a.authors.size(), 5u);
  EXPECT_EQ(a.size(), 200u);
  for (const auto& [author, n] : a.author_counts()) EXPECT_EQ(n, 40u);
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(generate_synthetic_corpus(opt).fragments, a.fragments);
  opt.seed += 1;
  EXPECT_NE(generate_synthetic_corpus(opt).fragments, a.fragments);
}

TEST(Synthetic, UniqueContentAndOneLineMajority) {
  const Corpus c = generate_synthetic_corpus();
  std::set<std::vector<std::string>> contents;
  std::size_t one_line = 0;
  for (const Fragment& f : c.fragments) {
    EXPECT_TRUE(contents.insert(f.lines).second);
    EXPECT_GE(f.loc, 1u);
    one_line += f.loc == 1 ? 1 : 0;
  }
  EXPECT_GT(static_cast<double>(one_line) / static_cast<double>(c.size()), 0.4);
}

TEST(Synthetic, BundledCorpusMatchesGenerator) {
  std::ostringstream os;
  write_corpus(os, generate_synthetic_corpus());
  EXPECT_TRUE(os.str() == testutil::read_file(testutil::data_path("../data/synthetic_corpus.jsonl")));
}
