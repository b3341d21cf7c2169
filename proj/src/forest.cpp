#include "blamestyle/forest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "blamestyle/error.hpp"
#include "blamestyle/random.hpp"

namespace blamestyle {

void ForestConfig::validate() const {
  if (n_trees < 1) throw DataError("n_trees must be at least 1");
  if (features_per_split < 1) throw DataError("features_per_split must be at least 1");
  if (min_samples_leaf < 1) throw DataError("min_samples_leaf must be at least 1");
}

double gini(std::span<const double> class_weights) {
  double total = 0.0;
  double sumsq = 0.0;
  for (double w : class_weights) {
    total += w;
    sumsq += w * w;
  }
  return total > 0.0 ? 1.0 - sumsq / (total * total) : 0.0;
}

namespace {

std::uint32_t majority(const std::vector<double>& weights) {
  std::uint32_t best = 0;
  for (std::uint32_t k = 1; k < weights.size(); ++k) {
    if (weights[k] > weights[best]) best = k;
  }
  return best;
}

}  // namespace

const TreeNode& DecisionTree::leaf_for(const SparseFeatureVector& x) const {
  const TreeNode* n = &nodes.at(0);
  while (!n->is_leaf()) {
    n = &nodes[x.value(static_cast<std::uint32_t>(n->column)) <= n->threshold ? n->left : n->right];
  }
  return *n;
}

std::uint32_t DecisionTree::vote(const SparseFeatureVector& x) const { return majority(leaf_for(x).class_weights); }

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack = {{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return deepest;
}

std::size_t PredictionDistribution::argmax() const {
  if (probs.empty()) throw DataError("argmax of an empty distribution");
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

namespace {

void check_dimension(const RandomForestModel& m, const SparseFeatureVector& x) {
  if (x.dimension != m.dimension) {
    throw DataError("feature dimension " + std::to_string(x.dimension) + " does not match model dimension " +
                    std::to_string(m.dimension));
  }
}

PredictionDistribution vote_fractions(const RandomForestModel& m, const SparseFeatureVector& x) {
  check_dimension(m, x);
  std::vector<std::size_t> votes(m.classes->size(), 0);
  for (const DecisionTree& t : m.trees) ++votes[t.vote(x)];
  PredictionDistribution d;
  d.classes = m.classes;
  d.probs.resize(votes.size());
  const double n = static_cast<double>(m.trees.size());
  for (std::size_t k = 0; k < votes.size(); ++k) d.probs[k] = static_cast<double>(votes[k]) / n;
  return d;
}

}  // namespace

PredictionDistribution RandomForestModel::predict_distribution(const SparseFeatureVector& x) const {
  return vote_fractions(*this, x);
}

std::vector<PredictionDistribution> RandomForestModel::predict_all(std::span<const SparseFeatureVector> xs) const {
  for (const SparseFeatureVector& x : xs) check_dimension(*this, x);
  std::vector<PredictionDistribution> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = vote_fractions(*this, xs[i]);
  return out;
}

TrainingSet TrainingSet::with_classes(std::vector<SparseFeatureVector> rows, std::span<const std::string> labels,
                                      ClassList classes) {
  if (rows.size() != labels.size()) throw DataError("training rows and labels differ in length");
  if (!classes || classes->empty()) throw DataError("empty class list");
  if (!std::is_sorted(classes->begin(), classes->end()) ||
      std::adjacent_find(classes->begin(), classes->end()) != classes->end()) {
    throw DataError("class list must be sorted and unique");
  }
  TrainingSet t;
  t.classes = std::move(classes);
  t.dimension = rows.empty() ? 0 : rows.front().dimension;
  for (const SparseFeatureVector& r : rows) {
    if (r.dimension != t.dimension) throw DataError("training rows have differing dimensions");
  }
  t.labels.reserve(labels.size());
  for (const std::string& l : labels) {
    const auto it = std::lower_bound(t.classes->begin(), t.classes->end(), l);
    if (it == t.classes->end() || *it != l) throw DataError("label not in class list: " + l);
    t.labels.push_back(static_cast<std::uint32_t>(it - t.classes->begin()));
  }
  t.rows = std::move(rows);
  return t;
}

TrainingSet TrainingSet::from_labels(std::vector<SparseFeatureVector> rows, std::span<const std::string> labels) {
  std::vector<std::string> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return with_classes(std::move(rows), labels, std::make_shared<const std::vector<std::string>>(std::move(classes)));
}

namespace {

struct Split {
  std::int32_t column = -1;
  double threshold = 0.0;
  double decrease = 0.0;
};

// Grows one tree. Column values of the rows in a node are gathered with a
// counting sort keyed by column, so only nonzero entries are touched and the
// implicit zeros are accounted for by subtraction from the node totals.
class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestConfig& cfg, std::size_t tree_index)
      : data_(data),
        cfg_(cfg),
        n_classes_(data.classes->size()),
        rng_(make_rng(derive_seed(cfg.seed, "tree"), tree_index)),
        weight_(data.rows.size(), 0.0),
        col_count_(data.dimension, 0),
        col_start_(data.dimension, 0) {}

  DecisionTree grow() {
    const std::size_t n = data_.rows.size();
    if (cfg_.bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) weight_[draw(rng_)] += 1.0;
    } else {
      std::fill(weight_.begin(), weight_.end(), 1.0);
    }
    for (std::uint32_t r = 0; r < n; ++r) {
      if (weight_[r] > 0.0) samples_.push_back(r);
    }

    DecisionTree tree;
    tree.nodes.emplace_back();
    struct Pending {
      std::uint32_t node;
      std::size_t begin;
      std::size_t end;
      std::size_t depth;
    };
    std::vector<Pending> stack = {{0, 0, samples_.size(), 0}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      std::vector<double> totals(n_classes_, 0.0);
      for (std::size_t i = p.begin; i < p.end; ++i) totals[data_.labels[samples_[i]]] += weight_[samples_[i]];

      Split split;
      const std::size_t populated =
          static_cast<std::size_t>(std::count_if(totals.begin(), totals.end(), [](double w) { return w > 0.0; }));
      double total_weight = 0.0;
      for (double w : totals) total_weight += w;
      const bool depth_left = cfg_.max_depth == 0 || p.depth < cfg_.max_depth;
      if (populated > 1 && depth_left && total_weight >= 2.0 * static_cast<double>(cfg_.min_samples_leaf)) {
        split = best_split(p.begin, p.end, totals, total_weight);
      }
      if (split.column < 0) {
        tree.nodes[p.node].class_weights = std::move(totals);
        continue;
      }

      const auto col = static_cast<std::uint32_t>(split.column);
      const auto first = samples_.begin() + static_cast<std::ptrdiff_t>(p.begin);
      const auto last = samples_.begin() + static_cast<std::ptrdiff_t>(p.end);
      const auto mid = std::partition(
          first, last, [&](std::uint32_t r) { return data_.rows[r].value(col) <= split.threshold; });
      const std::size_t cut = static_cast<std::size_t>(mid - samples_.begin());

      const auto left = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[p.node];
      node.column = split.column;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, cut, p.end, p.depth + 1});
      stack.push_back({left, p.begin, cut, p.depth + 1});
    }
    return tree;
  }

 private:
  struct Entry {
    double value;
    std::uint32_t row;
  };

  void gather(std::size_t begin, std::size_t end) {
    touched_.clear();
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& [col, val] : data_.rows[samples_[i]].entries) {
        if (col_count_[col]++ == 0) touched_.push_back(col);
      }
    }
    std::sort(touched_.begin(), touched_.end());
    std::uint32_t offset = 0;
    for (std::uint32_t col : touched_) {
      col_start_[col] = offset;
      offset += col_count_[col];
      col_count_[col] = 0;  // reused as the fill cursor below
    }
    scatter_.resize(offset);
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t r = samples_[i];
      for (const auto& [col, val] : data_.rows[r].entries) {
        scatter_[col_start_[col] + col_count_[col]++] = Entry{val, r};
      }
    }
  }

  void release() {
    for (std::uint32_t col : touched_) col_count_[col] = 0;
  }

  /// Best threshold on one column, or nullopt-like column -1. Sets `constant`
  /// when the column holds a single value across the node.
  Split evaluate_column(std::uint32_t col, std::size_t node_rows, const std::vector<double>& totals,
                        double total_weight, double parent_score, bool& constant) {
    Split best;
    best.column = -1;
    column_.assign(scatter_.begin() + col_start_[col], scatter_.begin() + col_start_[col] + col_count_[col]);
    std::sort(column_.begin(), column_.end(), [](const Entry& a, const Entry& b) {
      return a.value < b.value || (a.value == b.value && a.row < b.row);
    });
    const bool has_zero = column_.size() < node_rows;
    constant = !has_zero && column_.front().value == column_.back().value;
    if (constant) return best;

    zero_weights_ = totals;
    for (const Entry& e : column_) zero_weights_[data_.labels[e.row]] -= weight_[e.row];

    left_.assign(n_classes_, 0.0);
    right_ = totals;
    double wl = 0.0;
    double wr = total_weight;
    double sql = 0.0;
    double sqr = 0.0;
    for (double w : totals) sqr += w * w;
    const double msl = static_cast<double>(cfg_.min_samples_leaf);

    bool have_prev = false;
    double prev = 0.0;
    const auto consider = [&](double next) {
      if (!have_prev || !(next > prev)) return;
      if (wl < msl || wr < msl) return;
      const double score = sql / wl + sqr / wr;
      const double decrease = (score - parent_score) / total_weight;
      if (decrease > std::max(best.decrease, kMinDecrease)) {
        double threshold = prev + (next - prev) / 2.0;
        if (!(threshold < next)) threshold = prev;
        best.column = static_cast<std::int32_t>(col);
        best.threshold = threshold;
        best.decrease = decrease;
      }
    };
    const auto move_left = [&](std::uint32_t k, double w) {
      sql += (left_[k] + w) * (left_[k] + w) - left_[k] * left_[k];
      sqr += (right_[k] - w) * (right_[k] - w) - right_[k] * right_[k];
      left_[k] += w;
      right_[k] -= w;
      wl += w;
      wr -= w;
    };
    const auto add_zero_block = [&] {
      consider(0.0);
      for (std::uint32_t k = 0; k < n_classes_; ++k) {
        if (zero_weights_[k] > 0.0) move_left(k, zero_weights_[k]);
      }
      have_prev = true;
      prev = 0.0;
    };

    bool zero_done = !has_zero;
    for (const Entry& e : column_) {
      if (!zero_done && e.value > 0.0) {
        add_zero_block();
        zero_done = true;
      }
      consider(e.value);
      move_left(data_.labels[e.row], weight_[e.row]);
      have_prev = true;
      prev = e.value;
    }
    if (!zero_done) add_zero_block();
    return best;
  }

  Split best_split(std::size_t begin, std::size_t end, const std::vector<double>& totals, double total_weight) {
    gather(begin, end);
    double parent_sq = 0.0;
    for (double w : totals) parent_sq += w * w;
    const double parent_score = parent_sq / total_weight;

    Split best;
    candidates_.assign(touched_.begin(), touched_.end());
    std::size_t evaluated = 0;
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      if (evaluated >= cfg_.features_per_split && best.column >= 0) break;
      std::uniform_int_distribution<std::size_t> pick(i, candidates_.size() - 1);
      std::swap(candidates_[i], candidates_[pick(rng_)]);
      bool constant = false;
      const Split s = evaluate_column(candidates_[i], end - begin, totals, total_weight, parent_score, constant);
      if (constant) continue;
      ++evaluated;
      if (s.column >= 0 && s.decrease > best.decrease) best = s;
    }
    release();
    return best;
  }

  static constexpr double kMinDecrease = 1e-12;

  const TrainingSet& data_;
  const ForestConfig& cfg_;
  std::uint32_t n_classes_;
  Rng rng_;
  std::vector<double> weight_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::uint32_t> col_count_;
  std::vector<std::uint32_t> col_start_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t> candidates_;
  std::vector<Entry> scatter_;
  std::vector<Entry> column_;
  std::vector<double> zero_weights_;
  std::vector<double> left_;
  std::vector<double> right_;
};

void check_training_set(const TrainingSet& data, const ForestConfig& cfg) {
  cfg.validate();
  if (data.rows.empty()) throw DataError("cannot train on an empty training set");
  if (data.rows.size() != data.labels.size()) throw DataError("training rows and labels differ in length");
  std::vector<bool> seen(data.classes->size(), false);
  std::size_t distinct = 0;
  for (std::uint32_t l : data.labels) {
    if (!seen.at(l)) {
      seen[l] = true;
      ++distinct;
    }
  }
  if (distinct < 2) throw DataError("training needs at least two distinct labels");
}

RandomForestModel empty_model(const TrainingSet& data, const ForestConfig& cfg) {
  RandomForestModel m;
  m.classes = data.classes;
  m.dimension = data.dimension;
  m.config = cfg;
  m.trees.resize(cfg.n_trees);
  return m;
}

}  // namespace

RandomForestModel train_forest(const TrainingSet& data, const ForestConfig& cfg) {
  check_training_set(data, cfg);
  RandomForestModel m = empty_model(data, cfg);
  const auto n = static_cast<std::ptrdiff_t>(cfg.n_trees);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    m.trees[t] = TreeBuilder(data, cfg, static_cast<std::size_t>(t)).grow();
  }
  return m;
}

RandomForestModel train_forest(std::span<const SparseFeatureVector> xs, std::span<const std::string> labels,
                               const ForestConfig& cfg) {
  return train_forest(TrainingSet::from_labels({xs.begin(), xs.end()}, labels), cfg);
}

namespace reference {

RandomForestModel train_forest_serial(const TrainingSet& data, const ForestConfig& cfg) {
  check_training_set(data, cfg);
  RandomForestModel m = empty_model(data, cfg);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) m.trees[t] = TreeBuilder(data, cfg, t).grow();
  return m;
}

std::vector<PredictionDistribution> predict_all_serial(const RandomForestModel& m,
                                                       std::span<const SparseFeatureVector> xs) {
  std::vector<PredictionDistribution> out;
  out.reserve(xs.size());
  for (const SparseFeatureVector& x : xs) out.push_back(vote_fractions(m, x));
  return out;
}

}  // namespace reference

namespace {

constexpr std::string_view kModelMagic = "blamestyle-forest";
constexpr int kModelVersion = 1;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_model(std::ostream& os, const RandomForestModel& m) {
  const ForestConfig& c = m.config;
  os << kModelMagic << ' ' << kModelVersion << '\n';
  os << "config " << c.n_trees << ' ' << c.max_depth << ' ' << c.features_per_split << ' ' << c.min_samples_leaf
     << ' ' << (c.bootstrap ? 1 : 0) << ' ' << c.seed << '\n';
  os << "dimension " << m.dimension << '\n';
  os << "classes " << m.classes->size() << '\n';
  for (const std::string& cls : *m.classes) os << cls << '\n';
  for (const DecisionTree& t : m.trees) {
    os << "tree " << t.nodes.size() << '\n';
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        os << 'L';
        for (double w : n.class_weights) os << ' ' << fmt(w);
      } else {
        os << "S " << n.column << ' ' << fmt(n.threshold) << ' ' << n.left << ' ' << n.right;
      }
      os << '\n';
    }
  }
}

void write_model(const std::filesystem::path& path, const RandomForestModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write model " + path.string());
  write_model(os, m);
}

RandomForestModel read_model(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  const auto next = [&]() -> std::istringstream {
    if (!std::getline(is, line)) throw ParseError("model: unexpected end of file after line " + std::to_string(line_no));
    ++line_no;
    return std::istringstream(line);
  };
  const auto fail = [&](const std::string& what) {
    return ParseError("model line " + std::to_string(line_no) + ": " + what);
  };

  RandomForestModel m;
  std::string word;
  int version = 0;
  if (auto s = next(); !(s >> word >> version) || word != kModelMagic) throw fail("not a model file");
  if (version != kModelVersion) throw fail("unsupported version " + std::to_string(version));
  int bootstrap = 0;
  if (auto s = next(); !(s >> word >> m.config.n_trees >> m.config.max_depth >> m.config.features_per_split >>
                         m.config.min_samples_leaf >> bootstrap >> m.config.seed) ||
                       word != "config") {
    throw fail("expected config");
  }
  m.config.bootstrap = bootstrap != 0;
  if (auto s = next(); !(s >> word >> m.dimension) || word != "dimension") throw fail("expected dimension");
  std::size_t n_classes = 0;
  if (auto s = next(); !(s >> word >> n_classes) || word != "classes" || n_classes == 0) throw fail("expected classes");
  std::vector<std::string> classes;
  for (std::size_t i = 0; i < n_classes; ++i) {
    next();
    classes.push_back(line);
  }
  m.classes = std::make_shared<const std::vector<std::string>>(std::move(classes));
  m.trees.resize(m.config.n_trees);
  for (DecisionTree& t : m.trees) {
    std::size_t n_nodes = 0;
    if (auto s = next(); !(s >> word >> n_nodes) || word != "tree" || n_nodes == 0) throw fail("expected tree");
    t.nodes.resize(n_nodes);
    for (TreeNode& n : t.nodes) {
      auto s = next();
      char tag = 0;
      s >> tag;
      if (tag == 'L') {
        n.class_weights.resize(n_classes);
        for (double& w : n.class_weights) {
          if (!(s >> w)) throw fail("short leaf");
        }
      } else if (tag == 'S') {
        if (!(s >> n.column >> n.threshold >> n.left >> n.right) || n.column < 0 ||
            static_cast<std::size_t>(n.column) >= m.dimension || n.left >= n_nodes || n.right >= n_nodes) {
          throw fail("bad split node");
        }
      } else {
        throw fail("unknown node tag");
      }
    }
  }
  return m;
}

RandomForestModel read_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open model " + path.string());
  return read_model(is);
}

}  // namespace blamestyle
