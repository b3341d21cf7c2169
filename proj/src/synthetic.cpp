#include "blamestyle/synthetic.hpp"

#include <array>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

namespace blamestyle {

namespace {

const std::vector<std::string> kWordStems = {
    "count", "index", "buffer", "node", "value", "total", "offset", "size", "result", "item", "entry", "key",
    "len", "pos", "data", "state", "flag", "limit", "depth", "width", "height", "score", "weight", "parent",
    "child", "next", "prev", "head", "tail", "line", "token", "path", "name", "step", "delta", "cursor",
    "slot", "block", "frame", "chunk", "range", "level", "mask", "bits", "row", "col", "page", "queue"};

const std::vector<std::string> kVerbs = {"update", "compute", "load", "store", "parse", "reset", "build", "check",
                                         "apply", "flush", "merge", "split", "scan", "emit", "fetch", "init",
                                         "find", "insert", "remove", "resolve", "render", "encode", "decode", "sync"};

const std::vector<std::string> kTypes = {"int", "long", "unsigned", "size_t", "double", "float", "auto",
                                         "char", "bool", "int64_t", "uint32_t", "std::string", "short"};

const std::vector<std::string> kApis = {"memcpy", "memset", "strlen", "strcmp", "snprintf", "fprintf",
                                        "std::sort", "std::min", "std::max", "std::swap", "assert", "fopen",
                                        "fclose", "fread", "fwrite", "std::find", "std::fill", "std::copy",
                                        "qsort", "abs", "sqrt", "pow", "atoi", "strtol", "std::to_string",
                                        "std::move", "std::accumulate", "std::transform"};

const std::vector<std::string> kContainers = {"std::vector<int>", "std::vector<std::string>", "std::map<int, int>",
                                              "std::list<Node*>", "std::deque<double>", "std::set<int>",
                                              "std::unordered_map<std::string, int>", "std::array<char, 64>"};

const std::vector<std::string> kCommentWords = {
    "todo", "fixme", "note", "hack", "check", "this", "the", "we", "need", "handle", "edge", "case", "later",
    "ugly", "fast", "path", "avoid", "copy", "here", "because", "otherwise", "should", "never", "happen", "xxx",
    "see", "above", "below", "keep", "simple", "works", "for", "now", "temporary", "workaround", "bug"};

enum class Naming { Camel, Snake, Short, Hungarian };

enum Kind : std::size_t {
  kDecl, kAssign, kCompound, kIncrement, kCall, kApi, kIf, kFor, kWhile, kReturn, kClose, kOutput, kMember,
  kIndex, kContainer, kAlloc, kComment, kCase, kPreproc, kTernary, kNullCheck, kKindCount
};

struct Profile {
  std::string email;
  Naming naming = Naming::Camel;
  std::vector<std::string> vars;
  std::vector<std::string> funcs;
  std::vector<std::string> members;
  std::vector<std::string> types;
  std::vector<std::string> apis;
  std::vector<std::string> containers;
  std::vector<std::string> comment_words;
  std::vector<std::string> literals;
  std::vector<std::string> ops;
  std::string member_prefix;
  std::string obj;
  std::string null_literal;
  std::string constant;
  std::array<double, kKindCount> kind_weights{};
  int loop_style = 0;
  int increment_style = 0;
  int output_style = 0;
  int cast_style = 0;
  bool brace_same_line = true;
  bool use_this = false;
  bool yoda = false;
  bool comment_slash_star = false;
};

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }

std::string apply_naming(Naming naming, const std::string& a, const std::string& b) {
  switch (naming) {
    case Naming::Camel: {
      std::string s = a + b;
      s[a.size()] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[a.size()])));
      return s;
    }
    case Naming::Snake:
      return a + "_" + b;
    case Naming::Short:
      return a.substr(0, 1) + b.substr(0, std::min<std::size_t>(3, b.size()));
    case Naming::Hungarian: {
      std::string s = "n" + a;
      s[1] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[1])));
      return s + b.substr(0, 1);
    }
  }
  return a + b;
}

template <typename T>
std::vector<T> sample(const std::vector<T>& from, std::size_t n, Rng& rng) {
  std::vector<T> pool = from;
  shuffle_in_place(pool, rng);
  pool.resize(std::min(n, pool.size()));
  return pool;
}

Profile make_profile(std::size_t index, Rng& rng) {
  Profile p;
  char email[64];
  std::snprintf(email, sizeof email, "dev%02zu@example.org", index + 1);
  p.email = email;
  p.naming = static_cast<Naming>(uniform(rng, 0, 3));
  const auto stems = sample(kWordStems, 14, rng);
  for (std::size_t i = 0; i < 8; ++i) p.vars.push_back(apply_naming(p.naming, stems[i], stems[(i + 5) % stems.size()]));
  p.vars.push_back(stems[8]);
  p.vars.push_back(stems[9]);
  const auto verbs = sample(kVerbs, 5, rng);
  for (std::size_t i = 0; i < verbs.size(); ++i) p.funcs.push_back(apply_naming(p.naming, verbs[i], stems[10 + i % 4]));
  const std::array<std::string, 4> prefixes = {"m_", "", "_", "my"};
  p.member_prefix = prefixes[uniform(rng, 0, 3)];
  for (std::size_t i = 0; i < 4; ++i) {
    std::string m = stems[(i * 3 + 1) % stems.size()];
    p.members.push_back(p.member_prefix.empty() ? m + "_" : p.member_prefix + m);
  }
  p.types = sample(kTypes, 4, rng);
  p.apis = sample(kApis, 6, rng);
  p.containers = sample(kContainers, 2, rng);
  p.comment_words = sample(kCommentWords, 9, rng);
  p.literals = {std::to_string(uniform(rng, 2, 9)), std::to_string(uniform(rng, 10, 99)), coin(rng, 0.5) ? "0" : "1",
                coin(rng, 0.5) ? "0x" + std::to_string(uniform(rng, 10, 99)) : std::to_string(uniform(rng, 100, 999)) + "u"};
  const std::vector<std::string> ops = {"+", "-", "*", "/", "%", "<<", ">>", "&", "|", "^"};
  p.ops = sample(ops, 3, rng);
  const std::array<std::string, 4> objs = {"self", "ctx", "obj", "st"};
  p.obj = objs[uniform(rng, 0, 3)];
  const std::array<std::string, 3> nulls = {"NULL", "nullptr", "0"};
  p.null_literal = nulls[uniform(rng, 0, 2)];
  const std::string cstem = pick(kWordStems, rng);
  switch (uniform(rng, 0, 2)) {
    case 0:
      p.constant = "kMax" + std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(cstem[0])))) + cstem.substr(1);
      break;
    case 1: {
      std::string up = cstem;
      for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      p.constant = "MAX_" + up;
      break;
    }
    default:
      p.constant = "max_" + cstem;
  }
  std::gamma_distribution<double> g(0.7, 1.0);
  for (double& w : p.kind_weights) w = g(rng) + 0.05;
  p.kind_weights[kComment] *= 0.5;
  p.kind_weights[kClose] += 0.6;
  p.loop_style = static_cast<int>(uniform(rng, 0, 3));
  p.increment_style = static_cast<int>(uniform(rng, 0, 2));
  p.output_style = static_cast<int>(uniform(rng, 0, 3));
  p.cast_style = static_cast<int>(uniform(rng, 0, 1));
  p.brace_same_line = coin(rng, 0.7);
  p.use_this = coin(rng, 0.4);
  p.yoda = coin(rng, 0.25);
  p.comment_slash_star = coin(rng, 0.3);
  return p;
}

/// A fresh neutral profile for shared lines: style choices redrawn every call.
Profile commons_profile(Rng& rng) {
  Profile p = make_profile(0, rng);
  p.email.clear();
  return p;
}

class LineWriter {
 public:
  LineWriter(const Profile& p, Rng& rng) : p_(p), rng_(rng) {}

  std::string var() { return pick(p_.vars, rng_); }
  std::string literal() { return pick(p_.literals, rng_); }

  std::string expr() {
    switch (uniform(rng_, 0, 5)) {
      case 0:
        return var();
      case 1:
        return literal();
      case 2:
        return var() + " " + pick(p_.ops, rng_) + " " + literal();
      case 3:
        return var() + " " + pick(p_.ops, rng_) + " " + var();
      case 4:
        return pick(p_.funcs, rng_) + "(" + var() + ")";
      default:
        return cast(var());
    }
  }

  std::string cast(const std::string& e) {
    const std::string& t = pick(p_.types, rng_);
    const std::string type = t == "auto" || t == "std::string" ? "int" : t;
    return p_.cast_style == 0 ? "static_cast<" + type + ">(" + e + ")" : "(" + type + ")" + e;
  }

  std::string cond() {
    const std::array<std::string, 5> cmp = {"<", ">", "==", "!=", "<="};
    const std::string& c = cmp[uniform(rng_, 0, cmp.size() - 1)];
    if (p_.yoda && coin(rng_, 0.7)) return literal() + " " + c + " " + var();
    if (coin(rng_, 0.2)) return var() + " " + c + " " + p_.constant;
    return var() + " " + c + " " + (coin(rng_, 0.5) ? literal() : var());
  }

  std::string open(const std::string& head, std::vector<std::string>& out) {
    if (p_.brace_same_line) return head + " {";
    out.push_back(head);
    return "{";
  }

  std::string member() {
    const std::string& m = pick(p_.members, rng_);
    return p_.use_this ? "this->" + m : m;
  }

  std::string args() {
    switch (uniform(rng_, 0, 2)) {
      case 0:
        return var();
      case 1:
        return var() + ", " + literal();
      default:
        return var() + ", " + var();
    }
  }

  /// Appends one statement (sometimes two physical lines) to `out`.
  void statement(std::vector<std::string>& out, std::size_t kind, const std::string& indent) {
    std::vector<std::string> lines;
    std::string l;
    switch (kind) {
      case kDecl: {
        std::string t = pick(p_.types, rng_);
        l = t + " " + var() + " = " + (t == "std::string" ? "\"" + pick(p_.comment_words, rng_) + "\"" : expr()) + ";";
        break;
      }
      case kAssign:
        l = var() + " = " + expr() + ";";
        break;
      case kCompound:
        l = var() + " " + pick(p_.ops, rng_) + "= " + expr() + ";";
        break;
      case kIncrement: {
        const std::string v = var();
        l = p_.increment_style == 0 ? "++" + v + ";" : p_.increment_style == 1 ? v + "++;" : v + " += 1;";
        break;
      }
      case kCall:
        l = pick(p_.funcs, rng_) + "(" + args() + ");";
        break;
      case kApi:
        l = pick(p_.apis, rng_) + "(" + args() + ");";
        break;
      case kIf:
        l = open("if (" + cond() + ")", lines);
        break;
      case kFor: {
        const std::string i = p_.naming == Naming::Short ? "i" : pick(p_.vars, rng_);
        const std::string bound = coin(rng_, 0.5) ? var() : p_.constant;
        const std::string inc = p_.increment_style == 0 ? "++" + i : p_.increment_style == 1 ? i + "++" : i + " += 1";
        switch (p_.loop_style) {
          case 0:
            l = open("for (int " + i + " = 0; " + i + " < " + bound + "; " + inc + ")", lines);
            break;
          case 1:
            l = open("for (size_t " + i + " = 0; " + i + " != " + bound + "; " + inc + ")", lines);
            break;
          case 2:
            l = open("for (auto& " + i + " : " + var() + ")", lines);
            break;
          default:
            l = open("for (auto it = " + var() + ".begin(); it != " + var() + ".end(); ++it)", lines);
        }
        break;
      }
      case kWhile:
        l = open("while (" + cond() + ")", lines);
        break;
      case kReturn:
        l = "return " + expr() + ";";
        break;
      case kClose:
        l = coin(rng_, 0.25) ? (p_.brace_same_line ? "} else {" : "else") : "}";
        break;
      case kOutput: {
        const std::string v = var();
        const std::string w = pick(p_.comment_words, rng_);
        switch (p_.output_style) {
          case 0:
            l = "printf(\"" + w + " %d\\n\", " + v + ");";
            break;
          case 1:
            l = "std::cout << \"" + w + " \" << " + v + " << std::endl;";
            break;
          case 2:
            l = "fprintf(stderr, \"" + w + ": %d\\n\", " + v + ");";
            break;
          default:
            l = "LOG(\"" + w + "\", " + v + ");";
        }
        break;
      }
      case kMember:
        if (coin(rng_, 0.5)) {
          l = member() + " = " + expr() + ";";
        } else {
          l = p_.obj + (coin(rng_, 0.5) ? "->" : ".") + pick(p_.funcs, rng_) + "(" + args() + ");";
        }
        break;
      case kIndex:
        l = var() + "[" + var() + "] = " + expr() + ";";
        break;
      case kContainer: {
        const std::string& c = pick(p_.containers, rng_);
        if (coin(rng_, 0.5)) {
          l = c + " " + var() + ";";
        } else {
          const bool seq = c.find("vector") != std::string::npos || c.find("list") != std::string::npos ||
                           c.find("deque") != std::string::npos;
          l = var() + (seq ? ".push_back(" : ".insert(") + var() + ");";
        }
        break;
      }
      case kAlloc: {
        const std::string t = pick(p_.types, rng_) == "double" ? "double" : "int";
        if (p_.null_literal == "nullptr" || coin(rng_, 0.3)) {
          l = coin(rng_, 0.6) ? t + "* " + var() + " = new " + t + "[" + var() + "];" : "delete[] " + var() + ";";
        } else {
          l = coin(rng_, 0.6) ? var() + " = (" + t + "*)malloc(" + var() + " * sizeof(" + t + "));"
                              : "free(" + var() + ");";
        }
        break;
      }
      case kComment: {
        std::string text;
        const std::size_t words = uniform(rng_, 2, 5);
        for (std::size_t i = 0; i < words; ++i) text += (i ? " " : "") + pick(p_.comment_words, rng_);
        l = p_.comment_slash_star ? "/* " + text + " */" : "// " + text;
        break;
      }
      case kCase:
        l = "case " + literal() + ": " + var() + " = " + expr() + "; break;";
        break;
      case kPreproc:
        l = coin(rng_, 0.5) ? "#define " + p_.constant + " " + literal() : "#ifdef " + p_.constant;
        break;
      case kTernary:
        l = var() + " = (" + cond() + ") ? " + var() + " : " + literal() + ";";
        break;
      default: {
        const std::string v = var();
        l = p_.yoda ? "if (" + p_.null_literal + " == " + v + ") return;" : "if (" + v + " == " + p_.null_literal + ") return;";
      }
    }
    lines.push_back(l);
    for (std::string& x : lines) out.push_back(x.front() == '#' ? x : indent + x);
  }

 private:
  const Profile& p_;
  Rng& rng_;
};

std::size_t draw_loc(Rng& rng) {
  // Shape of a git-blame run-length distribution: mostly one-line runs.
  static const std::vector<double> weights = {54.1, 16.5, 7.9, 4.5, 2.9, 1.8, 1.6, 1.2, 1.0, 8.3};
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  const std::size_t bucket = d(rng);
  if (bucket < 9) return bucket + 1;
  return uniform(rng, 10, 40);
}

std::vector<std::string> make_fragment(const Profile& author, double shared_rate, Rng& rng) {
  const std::size_t target = draw_loc(rng);
  std::discrete_distribution<std::size_t> kinds(author.kind_weights.begin(), author.kind_weights.end());
  const std::string indent(uniform(rng, 0, 3) * 4, ' ');
  std::vector<std::string> lines;
  std::size_t code_lines = 0;
  while (code_lines < target) {
    std::size_t kind = kinds(rng);
    if (kind == kComment && target == 1) continue;  // a fragment needs code
    if (kind == kComment) {
      LineWriter(author, rng).statement(lines, kind, indent);
      continue;
    }
    const std::size_t before = lines.size();
    if (coin(rng, shared_rate)) {
      Profile common = commons_profile(rng);
      LineWriter(common, rng).statement(lines, kind, indent);
    } else {
      LineWriter(author, rng).statement(lines, kind, indent);
    }
    code_lines += lines.size() - before;
  }
  while (lines.size() > 1 && code_lines > target) {
    lines.pop_back();
    --code_lines;
  }
  return lines;
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticOptions& options) {
  if (options.authors < 2) throw DataError("synthetic corpus needs at least two authors");
  if (options.fragments_per_author < 1) throw DataError("synthetic corpus needs fragments");
  Rng profile_rng = make_rng(derive_seed(options.seed, "profiles"));
  std::vector<Profile> profiles;
  for (std::size_t a = 0; a < options.authors; ++a) {
    profiles.push_back(make_profile(a, profile_rng));
    char email[64];
    std::snprintf(email, sizeof email, "dev%02zu@example.org", a + 1);
    profiles.back().email = email;
  }

  std::set<std::string> seen;
  std::vector<Fragment> fragments;
  for (std::size_t a = 0; a < profiles.size(); ++a) {
    Rng rng = make_rng(derive_seed(options.seed, "fragments"), a);
    const Profile& p = profiles[a];
    std::size_t file = 0;
    std::size_t line = 1;
    for (std::size_t n = 0; n < options.fragments_per_author; ++n) {
      std::vector<std::string> lines;
      std::string joined;
      for (;;) {
        lines = make_fragment(p, options.shared_line_rate, rng);
        joined.clear();
        for (const std::string& l : lines) joined += l + "\n";
        if (seen.insert(joined).second) break;
      }
      if (line > 400) {
        ++file;
        line = 1;
      }
      Fragment f;
      f.author_key = p.email;
      char path[64];
      std::snprintf(path, sizeof path, "src/unit%02zu_%02zu.cpp", a + 1, file);
      f.origin = Origin{"synthetic", path, line};
      char id[96];
      std::snprintf(id, sizeof id, "synthetic/%s:%04zu", path, line);
      f.fragment_id = id;
      f.lines = std::move(lines);
      f.loc = count_loc(f.lines);
      line += f.lines.size() + uniform(rng, 1, 6);
      fragments.push_back(std::move(f));
    }
  }
  return Corpus::from_fragments(std::move(fragments));
}

}  // namespace blamestyle
