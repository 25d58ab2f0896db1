#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qprof/error.hpp"

namespace qprof {

/// Samples in rows, features in columns.
using FeatureMatrix = Eigen::MatrixXd;
using ScoreVector = Eigen::VectorXd;

/// Classification defaults of the classic R randomForest port.
struct ForestParams {
  int n_trees = 500;
  std::optional<int> mtry;  ///< floor(sqrt(m)) when unset
  int min_node_size = 1;
  std::optional<int> max_depth;  ///< unlimited when unset
  std::uint64_t seed = 0;
  /// Worker threads for training and importance; 0 picks the hardware
  /// concurrency. Never affects results.
  unsigned threads = 0;
};

struct TreeNode {
  /// Split feature, or -1 for a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  /// Child indices for internal nodes. For a leaf, `left` is the leaf id.
  std::int32_t left = -1;
  std::int32_t right = -1;

  bool is_leaf() const noexcept { return feature < 0; }
};

/// CART tree. Samples with x[feature] <= threshold go left.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::vector<std::uint32_t> counts,
               int n_classes);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const noexcept { return leaf_class_.size(); }
  int n_classes() const noexcept { return n_classes_; }

  /// Training class counts of a leaf.
  std::span<const std::uint32_t> leaf_counts(std::size_t leaf) const {
    return {counts_.data() + leaf * n_classes_,
            static_cast<std::size_t>(n_classes_)};
  }
  /// Majority class of a leaf, ties to the earlier class.
  int leaf_class(std::size_t leaf) const { return leaf_class_[leaf]; }

  /// Leaf reached by a sample; `value(f)` returns feature f.
  template <typename FeatureFn>
  std::size_t route(FeatureFn&& value) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const TreeNode& n = nodes_[i];
      i = static_cast<std::size_t>(value(n.feature) <= n.threshold ? n.left
                                                                   : n.right);
    }
    return static_cast<std::size_t>(nodes_[i].left);
  }

  template <typename Derived>
  int predict(const Eigen::DenseBase<Derived>& x) const {
    return leaf_class(route([&](Eigen::Index f) { return x(f); }));
  }

  /// Features that appear in at least one split.
  std::vector<bool> used_features(Eigen::Index m) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::uint32_t> counts_;  // leaf-major, n_classes per leaf
  std::vector<int> leaf_class_;
  int n_classes_ = 0;
};

struct EncodedLabels {
  std::vector<std::string> classes;  ///< sorted, unique
  std::vector<int> codes;            ///< index into classes
};

/// Maps labels to codes over their sorted distinct values.
EncodedLabels encode_labels(std::span<const std::string> labels);
/// Maps labels to codes over a fixed class list; unknown labels throw.
std::vector<int> encode_labels(std::span<const std::string> labels,
                               std::span<const std::string> classes);

class Rng;

/// Grows one CART tree on `samples` (row indices, repeats allowed).
/// `params.mtry` must be set; the forest uses this on each bootstrap.
DecisionTree grow_tree(const FeatureMatrix& features, std::span<const int> codes,
                       int n_classes, std::vector<std::int32_t> samples,
                       const ForestParams& params, Rng& rng);

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::string> classes;
  /// oob_masks[t][i] is true when sample i was not drawn for tree t.
  std::vector<std::vector<bool>> oob_masks;
  Eigen::Index n_features = 0;
  /// Parameters with mtry and seed resolved.
  ForestParams params;

  int n_classes() const noexcept { return static_cast<int>(classes.size()); }
  std::size_t n_samples() const noexcept {
    return oob_masks.empty() ? 0 : oob_masks.front().size();
  }
};

/// Grows `params.n_trees` trees on bootstrap samples. Throws
/// InvalidArgument for fewer than two samples or classes, non-finite
/// features, or inconsistent shapes.
Forest train(const FeatureMatrix& features, std::span<const int> codes,
             std::vector<std::string> classes, const ForestParams& params);
Forest train(const FeatureMatrix& features,
             std::span<const std::string> labels, const ForestParams& params);

/// Fraction of trees voting for each class. Throws InvalidArgument on a
/// dimension mismatch.
template <typename Derived>
ScoreVector predict_scores(const Forest& forest,
                           const Eigen::DenseBase<Derived>& x);

/// Scores for every row.
Eigen::MatrixXd predict_scores(const Forest& forest,
                               const FeatureMatrix& features);

/// Argmax of the scores, ties to the earlier class.
int predict(const ScoreVector& scores);
/// Binary forests only: spam (positive class) iff its score >= threshold.
int predict(const ScoreVector& scores, double spam_threshold,
            int positive_class);

/// Index of the positive class of a binary forest ("spam" if present,
/// otherwise the second class).
int positive_class(const Forest& forest);

struct OobReport {
  double error = 0.0;
  std::size_t evaluated = 0;
  std::vector<std::size_t> skipped;  ///< rows that were in-bag for every tree
};

/// Majority vote of the trees for which each sample was out of bag.
OobReport oob_error(const Forest& forest, const FeatureMatrix& features,
                    std::span<const int> codes);

struct ImportanceReport {
  Eigen::VectorXd importance;          ///< mean decrease in accuracy
  std::vector<Eigen::Index> ranking;   ///< descending importance
};

/// Per tree: OOB accuracy minus OOB accuracy after permuting one column
/// among that tree's OOB rows; averaged over trees.
ImportanceReport permutation_importance(const Forest& forest,
                                        const FeatureMatrix& features,
                                        std::span<const int> codes,
                                        std::uint64_t seed);

/// First k entries of the ranking. Throws InvalidArgument unless 1 <= k <= m.
std::vector<Eigen::Index> select_top_k(const ImportanceReport& report,
                                       Eigen::Index k);

/// Text model format. Byte-stable: serialize(deserialize(s)) == s.
void serialize(const Forest& forest, std::ostream& out);
std::string serialize(const Forest& forest);
/// Throws ParseError naming the offending line.
Forest deserialize(std::istream& in);
Forest deserialize(std::string_view text);

void save_model(const Forest& forest, const std::filesystem::path& path);
Forest load_model(const std::filesystem::path& path);

template <typename Derived>
ScoreVector predict_scores(const Forest& forest,
                           const Eigen::DenseBase<Derived>& x) {
  if (x.size() != forest.n_features)
    throw InvalidArgument("profile has " + std::to_string(x.size()) +
                          " features, model expects " +
                          std::to_string(forest.n_features));
  ScoreVector votes = ScoreVector::Zero(forest.n_classes());
  for (const DecisionTree& tree : forest.trees) votes[tree.predict(x)] += 1.0;
  return votes / static_cast<double>(forest.trees.size());
}

}  // namespace qprof
