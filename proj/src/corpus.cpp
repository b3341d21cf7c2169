#include "blamestyle/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <unordered_map>

#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

namespace blamestyle {

using nlohmann::json;

Corpus Corpus::from_fragments(std::vector<Fragment> fragments) {
  Corpus c;
  c.fragments = std::move(fragments);
  for (const Fragment& f : c.fragments) c.authors.insert(f.author_key);
  c.validate();
  return c;
}

std::map<std::string, std::size_t> Corpus::author_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const std::string& a : authors) counts[a] = 0;
  for (const Fragment& f : fragments) ++counts[f.author_key];
  return counts;
}

void Corpus::validate() const {
  std::set<std::string_view> ids;
  for (const Fragment& f : fragments) {
    if (!ids.insert(f.fragment_id).second) throw DataError("duplicate fragment_id: " + f.fragment_id);
    if (!authors.contains(f.author_key)) throw DataError("fragment author not in author set: " + f.author_key);
    if (f.author_key.empty()) throw DataError("empty author_key in " + f.fragment_id);
  }
}

void write_corpus(std::ostream& os, const Corpus& c) {
  for (const Fragment& f : c.fragments) {
    json j;
    j["fragment_id"] = f.fragment_id;
    j["author_key"] = f.author_key;
    j["origin"] = {{"repo", f.origin.repo}, {"path", f.origin.path}, {"start_line", f.origin.start_line}};
    j["loc"] = f.loc;
    j["lines"] = f.lines;
    os << j.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, const Corpus& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write corpus file " + path.string());
  write_corpus(os, c);
}

Corpus read_corpus(std::istream& is) {
  std::vector<Fragment> fragments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Fragment f;
      f.fragment_id = j.at("fragment_id").get<std::string>();
      f.author_key = j.at("author_key").get<std::string>();
      const json& o = j.at("origin");
      f.origin = Origin{o.at("repo").get<std::string>(), o.at("path").get<std::string>(),
                        o.at("start_line").get<std::size_t>()};
      f.loc = j.at("loc").get<std::size_t>();
      f.lines = j.at("lines").get<std::vector<std::string>>();
      if (f.lines.empty()) throw ParseError("fragment has no lines");
      fragments.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw ParseError("corpus record " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("corpus record " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Corpus::from_fragments(std::move(fragments));
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open corpus file " + path.string());
  return read_corpus(is);
}

namespace {

std::string joined_content(const Fragment& f) {
  std::string s;
  for (std::size_t i = 0; i < f.lines.size(); ++i) {
    if (i > 0) s += '\n';
    s += f.lines[i];
  }
  return s;
}

template <typename Pred>
Corpus keep_if(const Corpus& c, Pred pred) {
  std::vector<Fragment> kept;
  for (const Fragment& f : c.fragments) {
    if (pred(f)) kept.push_back(f);
  }
  return Corpus::from_fragments(std::move(kept));
}

std::map<std::string, std::vector<const Fragment*>> by_author_sorted(const Corpus& c) {
  std::map<std::string, std::vector<const Fragment*>> out;
  for (const Fragment& f : c.fragments) out[f.author_key].push_back(&f);
  for (auto& [a, v] : out) {
    std::sort(v.begin(), v.end(),
              [](const Fragment* x, const Fragment* y) { return x->fragment_id < y->fragment_id; });
  }
  return out;
}

}  // namespace

Corpus dedupe(const Corpus& c) {
  std::unordered_map<std::string, std::size_t> seen;
  for (const Fragment& f : c.fragments) ++seen[joined_content(f)];
  return keep_if(c, [&](const Fragment& f) { return seen.at(joined_content(f)) == 1; });
}

Corpus filter_min_loc(const Corpus& c, std::size_t min_loc) {
  if (min_loc < 1) throw DataError("min_loc must be at least 1");
  return keep_if(c, [&](const Fragment& f) { return f.loc >= min_loc; });
}

Corpus filter_max_loc(const Corpus& c, std::size_t max_loc) {
  return keep_if(c, [&](const Fragment& f) { return f.loc <= max_loc; });
}

Corpus exclude_authors(const Corpus& c, const std::set<std::string>& authors) {
  return keep_if(c, [&](const Fragment& f) { return !authors.contains(f.author_key); });
}

Corpus restrict_to_authors(const Corpus& c, const std::set<std::string>& authors) {
  return keep_if(c, [&](const Fragment& f) { return authors.contains(f.author_key); });
}

Corpus balance_per_author(const Corpus& c, std::size_t n_per_author, std::uint64_t seed) {
  if (n_per_author < 1) throw DataError("n_per_author must be at least 1");
  std::vector<Fragment> kept;
  for (const auto& [author, frags] : by_author_sorted(c)) {
    if (frags.size() < n_per_author) continue;
    std::vector<const Fragment*> pool = frags;
    Rng rng = make_rng(derive_seed(seed, "balance"), hash_name(author));
    shuffle_in_place(pool, rng);
    pool.resize(n_per_author);
    std::sort(pool.begin(), pool.end(),
              [](const Fragment* x, const Fragment* y) { return x->fragment_id < y->fragment_id; });
    for (const Fragment* f : pool) kept.push_back(*f);
  }
  if (kept.empty()) {
    throw DataError("balancing at " + std::to_string(n_per_author) + " fragments per author leaves an empty corpus");
  }
  return Corpus::from_fragments(std::move(kept));
}

std::size_t FoldPlan::fold_of(const std::string& fragment_id) const {
  const auto it = assignment.find(fragment_id);
  if (it == assignment.end()) throw DataError("fragment not in fold plan: " + fragment_id);
  return it->second;
}

FoldPlan stratified_folds(const Corpus& c, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw DataError("fold count must be at least 1");
  FoldPlan plan;
  plan.k = k;
  std::size_t offset = 0;
  for (const auto& [author, frags] : by_author_sorted(c)) {
    if (frags.size() < k) {
      throw DataError("author " + author + " has " + std::to_string(frags.size()) + " fragments, fewer than " +
                      std::to_string(k) + " folds");
    }
    std::vector<const Fragment*> order = frags;
    Rng rng = make_rng(derive_seed(seed, "folds"), hash_name(author));
    shuffle_in_place(order, rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      plan.assignment[order[i]->fragment_id] = (offset + i) % k;
    }
    offset = (offset + order.size()) % k;
  }
  return plan;
}

Corpus corrupt_labels(const Corpus& c, std::size_t m, std::uint64_t seed) {
  if (m == 0) return c;
  if (c.authors.size() < 2) throw DataError("label corruption needs at least two distinct authors");

  Corpus out = c;
  Rng rng = make_rng(derive_seed(seed, "corrupt"));
  // Untouched fragment indices; swapped pairs are removed from the pool.
  std::vector<std::size_t> pool(out.fragments.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;

  for (std::size_t swap = 0; swap < m; ++swap) {
    if (pool.size() < 2) throw DataError("cannot perform " + std::to_string(m) + " swaps: fragments exhausted");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t a = pick(rng);
    const std::string& label_a = out.fragments[pool[a]].author_key;
    std::vector<std::size_t> partners;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (out.fragments[pool[j]].author_key != label_a) partners.push_back(j);
    }
    if (partners.empty()) {
      throw DataError("cannot perform " + std::to_string(m) +
                      " swaps: remaining fragments share a single author");
    }
    std::uniform_int_distribution<std::size_t> pick_partner(0, partners.size() - 1);
    const std::size_t b = partners[pick_partner(rng)];
    std::swap(out.fragments[pool[a]].author_key, out.fragments[pool[b]].author_key);
    const std::size_t hi = std::max(a, b);
    const std::size_t lo = std::min(a, b);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(hi));
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(lo));
  }
  return out;
}

OpenWorldPartition partition_open_world(const Corpus& c, std::size_t n_unknown, std::size_t round,
                                        std::uint64_t seed) {
  if (n_unknown < 1) throw DataError("n_unknown must be at least 1");
  const std::size_t rounds = c.authors.size() / n_unknown;
  if (n_unknown >= c.authors.size() || round >= rounds) {
    throw DataError("open-world round " + std::to_string(round) + " invalid for " +
                    std::to_string(c.authors.size()) + " authors with " + std::to_string(n_unknown) +
                    " unknowns per round");
  }
  std::vector<std::string> authors(c.authors.begin(), c.authors.end());
  Rng rng = make_rng(derive_seed(seed, "open-world"));
  shuffle_in_place(authors, rng);
  OpenWorldPartition p;
  for (std::size_t i = 0; i < authors.size(); ++i) {
    if (i / n_unknown == round) {
      p.unknowns.insert(authors[i]);
    } else {
      p.suspects.insert(authors[i]);
    }
  }
  return p;
}

std::vector<LocBucket> loc_histogram(const Corpus& c) {
  std::vector<LocBucket> buckets;
  buckets.push_back({"0", 0, 0.0});
  for (int i = 1; i <= 9; ++i) buckets.push_back({std::to_string(i), 0, 0.0});
  buckets.push_back({"10-99", 0, 0.0});
  buckets.push_back({"100+", 0, 0.0});
  for (const Fragment& f : c.fragments) {
    std::size_t idx = f.loc <= 9 ? f.loc : (f.loc <= 99 ? 10 : 11);
    ++buckets[idx].count;
  }
  if (buckets.front().count == 0) buckets.erase(buckets.begin());
  for (LocBucket& b : buckets) {
    b.percent = c.empty() ? 0.0 : 100.0 * static_cast<double>(b.count) / static_cast<double>(c.size());
  }
  return buckets;
}

void write_loc_histogram_csv(std::ostream& os, const std::vector<LocBucket>& buckets) {
  os << "loc_bucket,count,percent\n";
  char buf[64];
  for (const LocBucket& b : buckets) {
    std::snprintf(buf, sizeof buf, "%.2f", b.percent);
    os << b.label << ',' << b.count << ',' << buf << '\n';
  }
}

}  // namespace blamestyle
