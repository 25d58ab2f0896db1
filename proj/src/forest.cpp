#include "qprof/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "parallel.hpp"
#include "qprof/rng.hpp"

namespace qprof {
namespace {

int argmax_first(std::span<const std::uint32_t> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                          counts.begin());
}

struct Split {
  Eigen::Index feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum_c L_c^2 / n_L + sum_c R_c^2 / n_R
};

/// Grows one tree on its bootstrap sample.
class TreeGrower {
 public:
  TreeGrower(const FeatureMatrix& x, std::span<const int> y, int n_classes,
             const ForestParams& params, Rng& rng)
      : x_(x), y_(y), k_(n_classes), params_(params), rng_(rng) {
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), Eigen::Index{0});
  }

  DecisionTree grow(std::vector<std::int32_t> samples) {
    samples_ = std::move(samples);
    struct Pending {
      std::size_t node, begin, end;
      int depth;
    };
    std::vector<Pending> stack{{0, 0, samples_.size(), 0}};
    nodes_.assign(1, TreeNode{});
    std::vector<std::vector<std::uint32_t>> leaf_counts(1);
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      std::vector<std::uint32_t> counts = class_counts(p.begin, p.end);
      const std::size_t size = p.end - p.begin;
      const bool pure =
          std::count(counts.begin(), counts.end(), 0u) == k_ - 1;
      const bool depth_capped = params_.max_depth && p.depth >= *params_.max_depth;
      std::optional<Split> split;
      if (!pure && !depth_capped &&
          size > static_cast<std::size_t>(params_.min_node_size)) {
        split = best_split(p.begin, p.end, counts);
      }
      if (!split) {
        nodes_[p.node] = TreeNode{-1, 0.0, -1, -1};
        if (leaf_counts.size() <= p.node) leaf_counts.resize(p.node + 1);
        leaf_counts[p.node] = std::move(counts);
        continue;
      }
      auto first = samples_.begin() + static_cast<std::ptrdiff_t>(p.begin);
      auto last = samples_.begin() + static_cast<std::ptrdiff_t>(p.end);
      auto mid = std::stable_partition(first, last, [&](std::int32_t s) {
        return x_(s, split->feature) <= split->threshold;
      });
      const std::size_t cut = static_cast<std::size_t>(mid - samples_.begin());
      const auto left = static_cast<std::int32_t>(nodes_.size());
      nodes_.push_back({});
      nodes_.push_back({});
      nodes_[p.node] = TreeNode{static_cast<std::int32_t>(split->feature),
                                split->threshold, left, left + 1};
      // Right pushed first so the left subtree is grown first.
      stack.push_back({static_cast<std::size_t>(left) + 1, cut, p.end, p.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), p.begin, cut, p.depth + 1});
    }
    // Number leaves in node order so the serialized form is canonical.
    std::vector<std::uint32_t> flat;
    std::int32_t leaf_id = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].is_leaf()) continue;
      nodes_[i].left = leaf_id++;
      flat.insert(flat.end(), leaf_counts[i].begin(), leaf_counts[i].end());
    }
    return DecisionTree(std::move(nodes_), std::move(flat), k_);
  }

 private:
  std::vector<std::uint32_t> class_counts(std::size_t begin,
                                          std::size_t end) const {
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(k_), 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[y_[samples_[i]]];
    return counts;
  }

  std::optional<Split> best_split(std::size_t begin, std::size_t end,
                                  const std::vector<std::uint32_t>& counts) {
    const std::size_t n = end - begin;
    double parent_sq = 0.0;
    for (auto c : counts) parent_sq += double(c) * double(c);
    const double parent = parent_sq / double(n);
    // Ignore gains that are only rounding noise.
    const double min_score = parent + 1e-12 * double(n);

    // Features are drawn without replacement, mtry at a time. When none of
    // the drawn features improves the node, further features are drawn
    // until one does or all have been tried.
    const auto mtry = static_cast<std::size_t>(*params_.mtry);
    std::optional<Split> best;
    column_.resize(n);
    std::vector<double> left(static_cast<std::size_t>(k_));
    std::vector<double> right(static_cast<std::size_t>(k_));
    for (std::size_t fi = 0; fi < features_.size(); ++fi) {
      if (fi >= mtry && best) break;
      std::swap(features_[fi], features_[fi + rng_.below(features_.size() - fi)]);
      const Eigen::Index f = features_[fi];
      for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t s = samples_[begin + i];
        column_[i] = {x_(s, f), y_[s]};
      }
      std::sort(column_.begin(), column_.end());
      if (column_.front().first == column_.back().first) continue;

      std::fill(left.begin(), left.end(), 0.0);
      for (int c = 0; c < k_; ++c) right[c] = counts[c];
      double left_sq = 0.0;
      double right_sq = parent_sq;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const int c = column_[i].second;
        left_sq += 2.0 * left[c] + 1.0;
        left[c] += 1.0;
        right_sq -= 2.0 * right[c] - 1.0;
        right[c] -= 1.0;
        const double a = column_[i].first;
        const double b = column_[i + 1].first;
        if (a == b) continue;
        const double nl = double(i + 1);
        const double score = left_sq / nl + right_sq / (double(n) - nl);
        if (score > min_score && (!best || score > best->score)) {
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best = Split{f, t, score};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  std::span<const int> y_;
  int k_;
  const ForestParams& params_;
  Rng& rng_;
  std::vector<Eigen::Index> features_;
  std::vector<std::int32_t> samples_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, int>> column_;
};

ForestParams resolve(ForestParams params, Eigen::Index m) {
  if (params.n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
  if (params.min_node_size < 1)
    throw InvalidArgument("min_node_size must be >= 1");
  if (params.max_depth && *params.max_depth < 1)
    throw InvalidArgument("max_depth must be >= 1");
  if (!params.mtry)
    params.mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(double(m)))));
  if (*params.mtry < 1 || *params.mtry > m)
    throw InvalidArgument("mtry must lie in [1, " + std::to_string(m) + "]");
  return params;
}

}  // namespace

DecisionTree grow_tree(const FeatureMatrix& features, std::span<const int> codes,
                       int n_classes, std::vector<std::int32_t> samples,
                       const ForestParams& params, Rng& rng) {
  if (!params.mtry || *params.mtry < 1 || *params.mtry > features.cols())
    throw InvalidArgument("grow_tree needs mtry in [1, m]");
  if (samples.empty()) throw InvalidArgument("grow_tree needs samples");
  return TreeGrower(features, codes, n_classes, params, rng).grow(std::move(samples));
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes,
                           std::vector<std::uint32_t> counts, int n_classes)
    : nodes_(std::move(nodes)), counts_(std::move(counts)), n_classes_(n_classes) {
  const std::size_t leaves = n_classes_ > 0 ? counts_.size() / n_classes_ : 0;
  leaf_class_.reserve(leaves);
  for (std::size_t l = 0; l < leaves; ++l)
    leaf_class_.push_back(argmax_first(leaf_counts(l)));
}

std::vector<bool> DecisionTree::used_features(Eigen::Index m) const {
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  for (const TreeNode& n : nodes_)
    if (!n.is_leaf()) used[static_cast<std::size_t>(n.feature)] = true;
  return used;
}

EncodedLabels encode_labels(std::span<const std::string> labels) {
  std::set<std::string> distinct(labels.begin(), labels.end());
  EncodedLabels out{{distinct.begin(), distinct.end()}, {}};
  out.codes = encode_labels(labels, out.classes);
  return out;
}

std::vector<int> encode_labels(std::span<const std::string> labels,
                               std::span<const std::string> classes) {
  std::vector<int> codes;
  codes.reserve(labels.size());
  for (const std::string& l : labels) {
    auto it = std::find(classes.begin(), classes.end(), l);
    if (it == classes.end()) throw InvalidArgument("unknown class label '" + l + "'");
    codes.push_back(static_cast<int>(it - classes.begin()));
  }
  return codes;
}

Forest train(const FeatureMatrix& features, std::span<const int> codes,
             std::vector<std::string> classes, const ForestParams& params) {
  const Eigen::Index n = features.rows();
  const Eigen::Index m = features.cols();
  if (n < 2) throw InvalidArgument("training needs at least 2 samples");
  if (static_cast<Eigen::Index>(codes.size()) != n)
    throw InvalidArgument("label count does not match sample count");
  if (m < 1) throw InvalidArgument("training needs at least 1 feature");
  if (!features.allFinite())
    throw InvalidArgument("feature matrix contains non-finite values");
  const int k = static_cast<int>(classes.size());
  std::set<int> present;
  for (int c : codes) {
    if (c < 0 || c >= k) throw InvalidArgument("label code out of range");
    present.insert(c);
  }
  if (present.size() < 2)
    throw InvalidArgument("training needs at least 2 distinct classes");

  Forest forest;
  forest.params = resolve(params, m);
  forest.classes = std::move(classes);
  forest.n_features = m;
  forest.trees.resize(static_cast<std::size_t>(forest.params.n_trees));
  forest.oob_masks.resize(forest.trees.size());

  detail::parallel_for(forest.trees.size(), forest.params.threads, [&](std::size_t t) {
    Rng rng(derive_seed(forest.params.seed, {t}));
    std::vector<std::int32_t> samples(static_cast<std::size_t>(n));
    std::vector<bool> oob(static_cast<std::size_t>(n), true);
    for (auto& s : samples) {
      s = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
      oob[static_cast<std::size_t>(s)] = false;
    }
    forest.trees[t] = grow_tree(features, codes, k, std::move(samples),
                                forest.params, rng);
    forest.oob_masks[t] = std::move(oob);
  });
  return forest;
}

Forest train(const FeatureMatrix& features,
             std::span<const std::string> labels, const ForestParams& params) {
  EncodedLabels enc = encode_labels(labels);
  return train(features, enc.codes, std::move(enc.classes), params);
}

Eigen::MatrixXd predict_scores(const Forest& forest,
                               const FeatureMatrix& features) {
  if (features.cols() != forest.n_features)
    throw InvalidArgument("feature matrix has " + std::to_string(features.cols()) +
                          " columns, model expects " +
                          std::to_string(forest.n_features));
  Eigen::MatrixXd scores(features.rows(), forest.n_classes());
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    scores.row(i) = predict_scores(forest, features.row(i)).transpose();
  return scores;
}

int predict(const ScoreVector& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return static_cast<int>(best);
}

int predict(const ScoreVector& scores, double spam_threshold,
            int positive_class) {
  if (!(spam_threshold >= 0.0 && spam_threshold <= 1.0))
    throw InvalidArgument("spam threshold must lie in [0, 1]");
  if (scores.size() != 2)
    throw InvalidArgument("thresholded prediction needs a binary model");
  return scores[positive_class] >= spam_threshold ? positive_class
                                                  : 1 - positive_class;
}

int positive_class(const Forest& forest) {
  if (forest.n_classes() != 2)
    throw InvalidArgument("model is not binary");
  return forest.classes[0] == "spam" ? 0 : 1;
}

OobReport oob_error(const Forest& forest, const FeatureMatrix& features,
                    std::span<const int> codes) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n != forest.n_samples() || codes.size() != n)
    throw InvalidArgument("OOB error needs the training set of the forest");
  Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n),
                                                forest.n_classes());
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!forest.oob_masks[t][i]) continue;
      const auto row = static_cast<Eigen::Index>(i);
      ++votes(row, forest.trees[t].predict(features.row(row)));
    }
  }
  OobReport report;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (votes.row(row).sum() == 0) {
      report.skipped.push_back(i);
      continue;
    }
    Eigen::Index best = 0;
    votes.row(row).maxCoeff(&best);  // first maximum
    ++report.evaluated;
    if (best != codes[i]) ++wrong;
  }
  report.error =
      report.evaluated ? double(wrong) / double(report.evaluated) : 0.0;
  return report;
}

ImportanceReport permutation_importance(const Forest& forest,
                                        const FeatureMatrix& features,
                                        std::span<const int> codes,
                                        std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n != forest.n_samples() || codes.size() != n)
    throw InvalidArgument("importance needs the training set of the forest");
  const Eigen::Index m = forest.n_features;
  Eigen::MatrixXd per_tree = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(forest.trees.size()));
  std::vector<char> has_oob(forest.trees.size(), 0);

  detail::parallel_for(forest.trees.size(), forest.params.threads, [&](std::size_t t) {
    const DecisionTree& tree = forest.trees[t];
    std::vector<Eigen::Index> oob;
    for (std::size_t i = 0; i < n; ++i)
      if (forest.oob_masks[t][i]) oob.push_back(static_cast<Eigen::Index>(i));
    if (oob.empty()) return;
    has_oob[t] = 1;
    std::size_t base_correct = 0;
    for (Eigen::Index i : oob)
      base_correct += tree.predict(features.row(i)) == codes[static_cast<std::size_t>(i)];
    const std::vector<bool> used = tree.used_features(m);
    std::vector<double> shuffled(oob.size());
    for (Eigen::Index f = 0; f < m; ++f) {
      // A feature the tree never splits on cannot change its predictions.
      if (!used[static_cast<std::size_t>(f)]) continue;
      for (std::size_t r = 0; r < oob.size(); ++r) shuffled[r] = features(oob[r], f);
      Rng rng(derive_seed(seed, {t, static_cast<std::uint64_t>(f)}));
      rng.shuffle(std::span<double>(shuffled));
      std::size_t correct = 0;
      for (std::size_t r = 0; r < oob.size(); ++r) {
        const Eigen::Index i = oob[r];
        const std::size_t leaf = tree.route([&](Eigen::Index g) {
          return g == f ? shuffled[r] : features(i, g);
        });
        correct += tree.leaf_class(leaf) == codes[static_cast<std::size_t>(i)];
      }
      per_tree(f, static_cast<Eigen::Index>(t)) =
          (double(base_correct) - double(correct)) / double(oob.size());
    }
  });

  const auto trees_with_oob = std::count(has_oob.begin(), has_oob.end(), 1);
  ImportanceReport report;
  report.importance = per_tree.rowwise().sum();
  if (trees_with_oob > 0) report.importance /= double(trees_with_oob);
  report.ranking.resize(static_cast<std::size_t>(m));
  std::iota(report.ranking.begin(), report.ranking.end(), Eigen::Index{0});
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return report.importance[a] > report.importance[b];
                   });
  return report;
}

std::vector<Eigen::Index> select_top_k(const ImportanceReport& report,
                                       Eigen::Index k) {
  const auto m = static_cast<Eigen::Index>(report.ranking.size());
  if (k < 1 || k > m)
    throw InvalidArgument("k must lie in [1, " + std::to_string(m) + "]");
  return {report.ranking.begin(), report.ranking.begin() + k};
}

}  // namespace qprof
