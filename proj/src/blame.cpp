#include "blamestyle/blame.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <iostream>
#include <optional>

#include "blamestyle/error.hpp"
#include "process.hpp"

namespace blamestyle {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.push_back(text.substr(pos));
      break;
    }
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

bool is_hex(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

std::optional<std::size_t> parse_count(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// "<sha> <orig> <final> [<count>]" -> final line number.
std::optional<std::size_t> parse_header(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t sp = line.find(' ', pos);
    const std::size_t end = sp == std::string_view::npos ? line.size() : sp;
    fields.push_back(line.substr(pos, end - pos));
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  if (fields.size() < 3 || fields.size() > 4) return std::nullopt;
  if ((fields[0].size() != 40 && fields[0].size() != 64) || !is_hex(fields[0])) return std::nullopt;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (!parse_count(fields[i])) return std::nullopt;
  }
  return parse_count(fields[2]);
}

std::string parse_error(std::size_t line_index, std::string_view what, std::string_view line) {
  std::string shown(line.substr(0, 120));
  return "porcelain line " + std::to_string(line_index + 1) + ": " + std::string(what) + ": '" +
         shown + "'";
}

}  // namespace

std::string normalize_author(std::string_view raw) {
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
  if (raw.size() >= 2 && raw.front() == '<' && raw.back() == '>') raw = raw.substr(1, raw.size() - 2);
  std::string out(raw);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<BlamedLine> parse_line_porcelain(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<BlamedLine> out;
  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string_view header = lines[i];
    if (header.empty() && i + 1 == lines.size()) break;  // trailing newline
    const auto final_line = parse_header(header);
    if (!final_line) throw ParseError(parse_error(i, "malformed porcelain header", header));
    if (*final_line == 0) throw ParseError(parse_error(i, "line number must be positive", header));
    if (!out.empty() && *final_line <= out.back().line_number) {
      throw ParseError(parse_error(i, "line numbers not increasing", header));
    }
    std::string mail;
    std::string name;
    ++i;
    bool have_content = false;
    while (i < lines.size()) {
      const std::string_view l = lines[i];
      if (!l.empty() && l.front() == '\t') {
        std::string key = !mail.empty() && mail != "<>" ? normalize_author(mail) : normalize_author(name);
        if (key.empty()) throw ParseError(parse_error(i, "line has no author", l));
        out.push_back({*final_line, std::move(key), std::string(l.substr(1))});
        have_content = true;
        ++i;
        break;
      }
      if (l.starts_with("author-mail ")) {
        mail = std::string(l.substr(12));
      } else if (l.starts_with("author ")) {
        name = std::string(l.substr(7));
      } else if (parse_header(l)) {
        throw ParseError(parse_error(i, "header without content line", l));
      }
      ++i;
    }
    if (!have_content) throw ParseError(parse_error(lines.size() - 1, "truncated porcelain block", header));
  }
  return out;
}

std::vector<Fragment> segment_runs(std::span<const BlamedLine> lines, const std::string& repo,
                                   const std::string& path) {
  std::vector<Fragment> out;
  for (const BlamedLine& bl : lines) {
    if (out.empty() || out.back().author_key != bl.author_key) {
      Fragment f;
      f.author_key = bl.author_key;
      f.origin = Origin{repo, path, bl.line_number};
      f.fragment_id = repo + "/" + path + ":" + std::to_string(bl.line_number);
      out.push_back(std::move(f));
    }
    out.back().lines.push_back(bl.content);
  }
  for (Fragment& f : out) f.loc = count_loc(f.lines);
  return out;
}

std::string wrap_dummy_main(std::span<const std::string> lines) {
  std::string out = "int main() {\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  out += "\n}";
  return out;
}

std::string wrap_dummy_main(const Fragment& f) { return wrap_dummy_main(std::span<const std::string>(f.lines)); }

std::size_t count_loc(std::span<const std::string> lines) {
  bool in_block = false;
  std::size_t loc = 0;
  for (const std::string& line : lines) {
    bool code = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      const char next = i + 1 < line.size() ? line[i + 1] : '\0';
      if (in_block) {
        if (c == '*' && next == '/') {
          in_block = false;
          ++i;
        }
        continue;
      }
      if (quote != 0) {
        if (c == '\\') {
          ++i;
        } else if (c == quote) {
          quote = 0;
        }
        continue;
      }
      if (c == '/' && next == '/') break;
      if (c == '/' && next == '*') {
        in_block = true;
        ++i;
        continue;
      }
      if (c == '"' || c == '\'') quote = c;
      if (!std::isspace(static_cast<unsigned char>(c))) code = true;
    }
    if (code) ++loc;
  }
  return loc;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::vector<Fragment> scan_repository(const std::filesystem::path& repo, const ScanOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(repo, ec)) throw NotARepositoryError("not a directory: " + repo.string());

  const auto probe = detail::run_process({"git", "rev-parse", "--show-toplevel"}, repo);
  if (probe.exit_code != 0) throw NotARepositoryError("not a git work tree: " + repo.string());

  const auto listing = detail::run_process({"git", "ls-files", "-z"}, repo);
  if (listing.exit_code != 0) throw GitError("git ls-files failed in " + repo.string(), listing.err);

  std::string repo_name = options.repo_name;
  if (repo_name.empty()) {
    fs::path canonical = fs::weakly_canonical(repo, ec);
    repo_name = (ec ? repo : canonical).filename().string();
  }

  std::vector<std::string> files;
  std::size_t pos = 0;
  while (pos < listing.out.size()) {
    const std::size_t end = listing.out.find('\0', pos);
    std::string file = listing.out.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? listing.out.size() : end + 1;
    if (file.empty()) continue;
    if (options.extensions.contains(fs::path(file).extension().string())) files.push_back(std::move(file));
  }
  std::sort(files.begin(), files.end());

  std::vector<Fragment> corpus;
  for (const std::string& file : files) {
    const auto blame = detail::run_process({"git", "blame", "--line-porcelain", "--", file}, repo);
    if (blame.exit_code != 0) throw GitError("git blame failed for " + file, blame.err);
    if (!is_valid_utf8(blame.out)) {
      std::cerr << "warning: skipping " << file << ": not valid UTF-8\n";
      continue;
    }
    const auto lines = parse_line_porcelain(blame.out);
    for (Fragment& f : segment_runs(lines, repo_name, file)) {
      if (options.exclude_authors.contains(f.author_key)) continue;
      corpus.push_back(std::move(f));
    }
  }
  return corpus;
}

}  // namespace blamestyle
