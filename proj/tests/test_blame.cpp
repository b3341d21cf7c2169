#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blamestyle/blame.hpp"
#include "blamestyle/corpus.hpp"
#include "blamestyle/error.hpp"
#include "test_util.hpp"

using namespace blamestyle;

namespace {

std::string porcelain_block(const std::string& sha, int orig, int final_line, const std::string& name,
                            const std::string& mail, const std::string& content) {
  std::ostringstream os;
  os << sha << ' ' << orig << ' ' << final_line << " 1\n"
     << "author " << name << "\nauthor-mail " << mail << "\nauthor-time 1483351200\nauthor-tz +0000\n"
     << "committer " << name << "\ncommitter-mail " << mail << "\nsummary msg\nfilename a.cpp\n"
     << '\t' << content << '\n';
  return os.str();
}

const std::string kSha = "0123456789abcdef0123456789abcdef01234567";

}  // namespace

TEST(NormalizeAuthor, LowercasesAndStripsBrackets) {
  EXPECT_EQ(normalize_author("<A@X.org>"), "a@x.org");
  EXPECT_EQ(normalize_author("bob@example.org"), "bob@example.org");
}

TEST(Porcelain, ParsesBlocksInOrder) {
  const std::string text = porcelain_block(kSha, 1, 1, "Ada", "<Ada@Example.org>", "int x;") +
                           porcelain_block(kSha, 2, 2, "Bob", "<bob@example.org>", "\tint y;");
  const auto lines = parse_line_porcelain(text);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].line_number, 1u);
  EXPECT_EQ(lines[0].author_key, "ada@example.org");
  EXPECT_EQ(lines[0].content, "int x;");
  EXPECT_EQ(lines[1].content, "\tint y;");
}

TEST(Porcelain, FallsBackToNameWithoutMail) {
  const auto lines = parse_line_porcelain(porcelain_block(kSha, 1, 1, "Someone", "<>", "x"));
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].author_key, "someone");
}

TEST(Porcelain, RejectsMalformedHeader) {
  EXPECT_THROW(parse_line_porcelain("not a header\n\tx\n"), ParseError);
}

TEST(Porcelain, RejectsTruncatedBlock) {
  std::string text = porcelain_block(kSha, 1, 1, "Ada", "<a@x>", "x");
  text = text.substr(0, text.find('\t'));
  EXPECT_THROW(parse_line_porcelain(text), ParseError);
}

TEST(Porcelain, RejectsDecreasingLineNumbers) {
  const std::string text = porcelain_block(kSha, 2, 2, "Ada", "<a@x>", "x") + porcelain_block(kSha, 1, 1, "Ada", "<a@x>", "y");
  EXPECT_THROW(parse_line_porcelain(text), ParseError);
}

TEST(Porcelain, ErrorNamesOffendingLine) {
  try {
    parse_line_porcelain("garbage header\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("garbage header"), std::string::npos);
  }
}

TEST(SegmentRuns, SplitsOnAuthorChange) {
  std::vector<BlamedLine> lines = {{1, "a", "int x;"}, {2, "a", "// c"}, {3, "b", "x++;"}, {4, "a", "return x;"}};
  const auto frags = segment_runs(lines, "repo", "f.cpp");
  ASSERT_EQ(frags.size(), 3u);
  EXPECT_EQ(frags[0].fragment_id, "repo/f.cpp:1");
  EXPECT_EQ(frags[0].lines.size(), 2u);
  EXPECT_EQ(frags[0].loc, 1u);
  EXPECT_EQ(frags[1].origin.start_line, 3u);
  EXPECT_EQ(frags[2].author_key, "a");
}

TEST(SegmentRuns, RunsCoverEveryLineOnce) {
  Rng rng = make_rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BlamedLine> lines;
    const std::size_t n = 1 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) lines.push_back({i + 1, std::string(1, static_cast<char>('a' + rng() % 3)), "x;"});
    const auto frags = segment_runs(lines, "r", "p");
    std::size_t total = 0;
    for (std::size_t k = 0; k < frags.size(); ++k) {
      total += frags[k].lines.size();
      if (k > 0) EXPECT_NE(frags[k].author_key, frags[k - 1].author_key);
    }
    EXPECT_EQ(total, n);
  }
}

TEST(CountLoc, IgnoresBlankAndCommentLines) {
  const std::vector<std::string> lines = {"", "  // note", "/* start", "still comment */", "int x; // tail",
                                          "/* a */ int y;", "const char* s = \"// not comment\";"};
  EXPECT_EQ(count_loc(lines), 3u);
}

TEST(WrapDummyMain, WrapsLines) {
  const std::vector<std::string> lines = {"x++;", "y--;"};
  EXPECT_EQ(wrap_dummy_main(lines), "int main() {\nx++;\ny--;\n}");
}

TEST(Utf8, Validates) {
  EXPECT_TRUE(is_valid_utf8("plain"));
  EXPECT_TRUE(is_valid_utf8("\xc3\xa9"));
  EXPECT_FALSE(is_valid_utf8("\xc3"));
  EXPECT_FALSE(is_valid_utf8("\xff"));
}

TEST(ScanRepository, RejectsNonRepository) {
  const auto dir = testutil::temp_dir("norepo");
  EXPECT_THROW(scan_repository(dir), NotARepositoryError);
}

TEST(ScanRepository, MatchesGoldenFixture) {
  const auto repo = testutil::clone_fixture("sample");
  ScanOptions opt;
  opt.repo_name = "sample";
  std::ostringstream os;
  write_corpus(os, Corpus::from_fragments(scan_repository(repo, opt)));
  EXPECT_EQ(os.str(), testutil::read_file(testutil::data_path("golden/sample_corpus.jsonl")));
}

TEST(ScanRepository, ExcludesAuthors) {
  const auto repo = testutil::clone_fixture("sample_excl");
  ScanOptions opt;
  opt.exclude_authors = {"bob@example.org"};
  for (const Fragment& f : scan_repository(repo, opt)) EXPECT_EQ(f.author_key, "ada@example.org");
}
