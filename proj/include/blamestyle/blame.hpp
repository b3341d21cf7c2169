#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blamestyle {

struct BlamedLine {
  std::size_t line_number = 0;  // 1-based
  std::string author_key;
  std::string content;
};

struct Origin {
  std::string repo;
  std::string path;
  std::size_t start_line = 0;

  bool operator==(const Origin&) const = default;
};

/// One maximal run of consecutive lines blamed to a single author.
struct Fragment {
  std::string fragment_id;
  std::string author_key;
  std::vector<std::string> lines;
  Origin origin;
  std::size_t loc = 0;  // lines that are neither blank nor comment-only

  bool operator==(const Fragment&) const = default;
};

/// Lowercases and strips angle brackets: "<A@X.org>" -> "a@x.org".
std::string normalize_author(std::string_view raw);

/// Parses `git blame --line-porcelain` output. Throws ParseError naming the
/// offending input line when a header or content line is malformed.
std::vector<BlamedLine> parse_line_porcelain(std::string_view text);

/// Splits file-ordered lines into maximal same-author runs. Fragment ids are
/// `<repo>/<path>:<start>`.
std::vector<Fragment> segment_runs(std::span<const BlamedLine> lines,
                                   const std::string& repo,
                                   const std::string& path);

/// `int main() {\n` + lines joined by '\n' + `\n}`.
std::string wrap_dummy_main(std::span<const std::string> lines);
std::string wrap_dummy_main(const Fragment& f);

/// Counts lines with code left after removing `//` tails and `/* */` spans
/// (tracked across lines, string literals respected).
std::size_t count_loc(std::span<const std::string> lines);

bool is_valid_utf8(std::string_view s);

struct ScanOptions {
  std::set<std::string> extensions = {".cpp", ".cc", ".cxx", ".c", ".h", ".hpp", ".hh", ".hxx"};
  std::set<std::string> exclude_authors;  // normalized author keys to drop
  std::string repo_name;                  // defaults to the directory name
};

/// Runs blame over every tracked file whose extension is in `options.extensions`.
/// Throws NotARepositoryError for paths outside a git work tree and GitError
/// (with stderr diagnostics) when a git invocation fails. Files that are not
/// valid UTF-8 are skipped with a warning on stderr.
std::vector<Fragment> scan_repository(const std::filesystem::path& repo,
                                      const ScanOptions& options = {});

}  // namespace blamestyle
