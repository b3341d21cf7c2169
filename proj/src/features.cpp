#include "blamestyle/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "blamestyle/error.hpp"
#include "blamestyle/syntax.hpp"

namespace blamestyle {

namespace detail {
extern const char* const kApiSymbolsText;
}

namespace {

constexpr std::array<std::string_view, 5> kCategoryNames = {"ast_node", "ast_bigram", "word_unigram", "keyword",
                                                            "api_symbol"};
constexpr std::array<std::string_view, 2> kWeightingNames = {"raw", "tfidf"};
constexpr std::string_view kDictionaryMagic = "blamestyle-dictionary";
constexpr int kDictionaryVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string_view to_string(FeatureCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Weighting w) { return kWeightingNames[static_cast<std::size_t>(w)]; }

FeatureCategory parse_category(std::string_view s) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == s) return static_cast<FeatureCategory>(i);
  }
  throw ParseError("unknown feature category '" + std::string(s) + "'");
}

Weighting parse_weighting(std::string_view s) {
  for (std::size_t i = 0; i < kWeightingNames.size(); ++i) {
    if (kWeightingNames[i] == s) return static_cast<Weighting>(i);
  }
  throw ParseError("unknown feature weighting '" + std::string(s) + "'");
}

const std::set<std::string, std::less<>>& cpp_keywords() {
  static const std::set<std::string, std::less<>> words = {
      "alignas",      "alignof",      "and",       "and_eq",        "asm",          "auto",
      "bitand",       "bitor",        "bool",      "break",         "case",         "catch",
      "char",         "char16_t",     "char32_t",  "class",         "compl",        "const",
      "constexpr",    "const_cast",   "continue",  "decltype",      "default",      "delete",
      "do",           "double",       "dynamic_cast", "else",       "enum",         "explicit",
      "export",       "extern",       "false",     "float",         "for",          "friend",
      "goto",         "if",           "inline",    "int",           "long",         "mutable",
      "namespace",    "new",          "noexcept",  "not",           "not_eq",       "nullptr",
      "operator",     "or",           "or_eq",     "private",       "protected",    "public",
      "register",     "reinterpret_cast", "return", "short",        "signed",       "sizeof",
      "static",       "static_assert", "static_cast", "struct",     "switch",       "template",
      "this",         "thread_local", "throw",     "true",          "try",          "typedef",
      "typeid",       "typename",     "union",     "unsigned",      "using",        "virtual",
      "void",         "volatile",     "wchar_t",   "while",         "xor",          "xor_eq",
  };
  return words;
}

const std::set<std::string, std::less<>>& api_symbols() {
  static const std::set<std::string, std::less<>> symbols = [] {
    std::set<std::string, std::less<>> out;
    std::istringstream in(detail::kApiSymbolsText);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      out.insert(line);
    }
    return out;
  }();
  return symbols;
}

namespace {

std::map<std::string, std::size_t> count_in(std::span<const std::string> tokens,
                                            const std::set<std::string, std::less<>>& vocabulary) {
  std::map<std::string, std::size_t> out;
  for (const std::string& t : tokens) {
    if (vocabulary.contains(t)) ++out[t];
  }
  return out;
}

}  // namespace

std::map<std::string, std::size_t> keyword_counts(std::span<const std::string> tokens) {
  return count_in(tokens, cpp_keywords());
}

std::map<std::string, std::size_t> api_symbol_counts(std::span<const std::string> tokens) {
  return count_in(tokens, api_symbols());
}

FragmentCounts extract_counts(const Fragment& f) {
  FragmentCounts fc;
  fc.fragment_id = f.fragment_id;
  fc.author_key = f.author_key;

  std::string body;
  for (std::size_t i = 0; i < f.lines.size(); ++i) {
    if (i > 0) body += '\n';
    body += f.lines[i];
  }
  const std::vector<std::string> tokens = tokenize_words(body);
  fc.token_count = tokens.size();

  const SyntaxNode tree = fuzzy_parse(wrap_dummy_main(f));
  for (auto& [k, n] : node_unigrams(tree)) fc.counts[{FeatureCategory::AstNode, k}] = n;
  for (auto& [k, n] : node_bigrams(tree)) fc.counts[{FeatureCategory::AstBigram, k}] = n;
  for (const std::string& t : tokens) ++fc.counts[{FeatureCategory::WordUnigram, t}];
  for (auto& [k, n] : keyword_counts(tokens)) fc.counts[{FeatureCategory::Keyword, k}] = n;
  for (auto& [k, n] : api_symbol_counts(tokens)) fc.counts[{FeatureCategory::ApiSymbol, k}] = n;
  return fc;
}

std::vector<FragmentCounts> extract_all(std::span<const Fragment> fragments) {
  std::vector<FragmentCounts> out(fragments.size());
  // Force the lazily built vocabularies before the parallel region.
  (void)cpp_keywords();
  (void)api_symbols();
  const auto n = static_cast<std::ptrdiff_t>(fragments.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = extract_counts(fragments[i]);
  return out;
}

FeatureDictionary::FeatureDictionary(std::vector<FeatureKey> keys, std::vector<double> idf,
                                     std::size_t n_authors_fit)
    : keys_(std::move(keys)), idf_(std::move(idf)), n_authors_fit_(n_authors_fit) {
  if (keys_.size() != idf_.size()) throw DataError("dictionary keys and idf differ in length");
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i].token.empty()) throw DataError("dictionary key with empty token");
    if (!(idf_[i] >= 0.0)) throw DataError("negative idf for " + keys_[i].token);
    if (!index_.emplace(keys_[i], static_cast<std::uint32_t>(i)).second) {
      throw DataError("duplicate dictionary key " + keys_[i].token);
    }
  }
}

std::int64_t FeatureDictionary::index_of(const FeatureKey& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

namespace {

double term_frequency(std::size_t count, std::size_t token_count) {
  return token_count == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(token_count);
}

}  // namespace

FeatureDictionary build_dictionary(std::span<const FragmentCounts> training) {
  if (training.size() < 2) throw DataError("dictionary needs at least two training fragments");
  std::map<std::string, std::uint32_t> author_ids;
  for (const FragmentCounts& fc : training) author_ids.emplace(fc.author_key, 0);
  if (author_ids.size() < 2) throw DataError("dictionary needs at least two training authors");
  std::uint32_t next = 0;
  for (auto& [a, id] : author_ids) id = next++;

  struct Observed {
    std::size_t present = 0;
    double first = 0.0;
    bool varies = false;
    std::set<std::uint32_t> users;
  };
  std::map<std::pair<FeatureCategory, std::string>, Observed> observed;
  for (const FragmentCounts& fc : training) {
    const std::uint32_t author = author_ids.at(fc.author_key);
    for (const auto& [key, count] : fc.counts) {
      if (count == 0) continue;
      Observed& o = observed[key];
      const double tf = term_frequency(count, fc.token_count);
      if (o.present == 0) {
        o.first = tf;
      } else if (tf != o.first) {
        o.varies = true;
      }
      ++o.present;
      o.users.insert(author);
    }
  }

  const double n_authors = static_cast<double>(author_ids.size());
  std::vector<std::pair<FeatureKey, double>> columns;
  for (const auto& [key, o] : observed) {
    // Absent samples contribute zeros.
    const bool constant = o.present == training.size() ? !o.varies : (!o.varies && o.first == 0.0);
    if (constant) continue;
    const double idf = std::log(n_authors / static_cast<double>(o.users.size()));
    columns.push_back({FeatureKey{key.first, Weighting::Raw, key.second}, idf});
    if (idf > 0.0) columns.push_back({FeatureKey{key.first, Weighting::Tfidf, key.second}, idf});
  }
  if (columns.empty()) throw DataError("no non-constant feature in the training fragments");
  std::sort(columns.begin(), columns.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<FeatureKey> keys;
  std::vector<double> idf;
  keys.reserve(columns.size());
  idf.reserve(columns.size());
  for (auto& [k, v] : columns) {
    keys.push_back(std::move(k));
    idf.push_back(v);
  }
  return FeatureDictionary(std::move(keys), std::move(idf), author_ids.size());
}

SparseFeatureVector vectorize(const FragmentCounts& counts, const FeatureDictionary& dict) {
  SparseFeatureVector v;
  v.dimension = dict.dimension();
  FeatureKey probe;
  for (const auto& [key, count] : counts.counts) {
    const double tf = term_frequency(count, counts.token_count);
    if (tf == 0.0) continue;
    probe.category = key.first;
    probe.token = key.second;
    probe.weighting = Weighting::Raw;
    if (const auto raw = dict.index_of(probe); raw >= 0) {
      v.entries.push_back({static_cast<std::uint32_t>(raw), tf});
    }
    probe.weighting = Weighting::Tfidf;
    if (const auto col = dict.index_of(probe); col >= 0) {
      const double w = tf * dict.idf()[static_cast<std::size_t>(col)];
      if (w != 0.0) v.entries.push_back({static_cast<std::uint32_t>(col), w});
    }
  }
  std::sort(v.entries.begin(), v.entries.end());
  return v;
}

std::vector<SparseFeatureVector> vectorize_all(std::span<const FragmentCounts> counts, const FeatureDictionary& dict) {
  std::vector<SparseFeatureVector> out(counts.size());
  const auto n = static_cast<std::ptrdiff_t>(counts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = vectorize(counts[i], dict);
  return out;
}

void write_dictionary(std::ostream& os, const FeatureDictionary& dict) {
  os << kDictionaryMagic << ' ' << kDictionaryVersion << ' ' << dict.dimension() << ' ' << dict.n_authors_fit()
     << '\n';
  for (std::size_t i = 0; i < dict.dimension(); ++i) {
    const FeatureKey& k = dict.keys()[i];
    os << to_string(k.category) << ',' << to_string(k.weighting) << ',' << csv_quote(k.token) << ',' << i << ','
       << format_double(dict.idf()[i]) << '\n';
  }
}

void write_dictionary(const std::filesystem::path& path, const FeatureDictionary& dict) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write dictionary " + path.string());
  write_dictionary(os, dict);
}

FeatureDictionary read_dictionary(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ParseError("dictionary: missing header");
  std::istringstream hs(header);
  std::string magic;
  int version = 0;
  std::size_t dimension = 0;
  std::size_t n_authors = 0;
  if (!(hs >> magic >> version >> dimension >> n_authors) || magic != kDictionaryMagic) {
    throw ParseError("dictionary: malformed header '" + header + "'");
  }
  if (version != kDictionaryVersion) throw ParseError("dictionary: unsupported version " + std::to_string(version));

  std::vector<FeatureKey> keys;
  std::vector<double> idf;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fail = [&](const char* what) {
      return ParseError("dictionary line " + std::to_string(line_no) + ": " + what);
    };
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || c2 + 1 >= line.size() || line[c2 + 1] != '"') throw fail("expected category,weighting,\"token\"");
    FeatureKey key;
    key.category = parse_category(std::string_view(line).substr(0, c1));
    key.weighting = parse_weighting(std::string_view(line).substr(c1 + 1, c2 - c1 - 1));
    std::size_t i = c2 + 2;
    for (;;) {
      if (i >= line.size()) throw fail("unterminated token");
      if (line[i] == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          key.token += '"';
          i += 2;
          continue;
        }
        ++i;
        break;
      }
      key.token += line[i++];
    }
    std::size_t index = 0;
    double value = 0.0;
    char comma1 = 0;
    char comma2 = 0;
    std::istringstream rest(line.substr(i));
    if (!(rest >> comma1 >> index >> comma2 >> value) || comma1 != ',' || comma2 != ',') {
      throw fail("expected ,index,idf");
    }
    if (index != keys.size()) throw fail("column indices must be dense and ascending");
    keys.push_back(std::move(key));
    idf.push_back(value);
  }
  if (keys.size() != dimension) throw ParseError("dictionary: header dimension does not match entry count");
  return FeatureDictionary(std::move(keys), std::move(idf), n_authors);
}

FeatureDictionary read_dictionary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open dictionary " + path.string());
  return read_dictionary(is);
}

void write_vectors(std::ostream& os, std::span<const FragmentCounts> counts,
                   std::span<const SparseFeatureVector> vectors) {
  if (counts.size() != vectors.size()) throw DataError("write_vectors: counts and vectors differ in length");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    os << counts[i].fragment_id << '\t' << counts[i].author_key << '\t';
    bool first = true;
    for (const auto& [col, val] : vectors[i].entries) {
      if (!first) os << ' ';
      first = false;
      os << col << ':' << format_double(val);
    }
    os << '\n';
  }
}

SparsityReport sparsity_report(std::span<const SparseFeatureVector> vectors) {
  SparsityReport r;
  r.vectors = vectors.size();
  if (vectors.empty()) return r;
  r.dimension = vectors.front().dimension;
  std::size_t total = 0;
  for (const SparseFeatureVector& v : vectors) total += v.nonzero();
  r.mean_nonzero = static_cast<double>(total) / static_cast<double>(vectors.size());
  return r;
}

}  // namespace blamestyle
