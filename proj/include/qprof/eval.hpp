#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qprof {

/// counts(i, j) = emails of true class i predicted as class j.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<std::string> classes;

  std::int64_t total() const { return counts.sum(); }
};

/// Throws InvalidArgument on length mismatch or unknown labels.
ConfusionMatrix confusion(std::span<const std::string> truth,
                          std::span<const std::string> predicted,
                          std::span<const std::string> class_order);
ConfusionMatrix confusion(std::span<const int> truth,
                          std::span<const int> predicted,
                          std::vector<std::string> class_order);

/// fpr = FP / (TN + FP), fnr = FN / (TP + FN). A zero denominator gives 0
/// and raises the matching flag.
struct ErrorRates {
  double fpr = 0.0;
  double fnr = 0.0;
  bool fpr_undefined = false;
  bool fnr_undefined = false;
};

/// Binary matrices only. The positive class is "spam" when present,
/// otherwise the second class.
ErrorRates fpr_fnr(const ConfusionMatrix& matrix);

struct RocPoint {
  double fpr;
  double tpr;
  /// Scores >= threshold are called positive. The first point uses +inf.
  double threshold;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Sweeps the threshold over the distinct scores in descending order; tied
/// scores move together. AUC is the trapezoidal area. `positive[i]` is
/// nonzero for spam. Throws InvalidArgument for single-class input or
/// non-finite scores.
RocCurve roc(std::span<const double> scores, std::span<const int> positive);

struct OperatingPoint {
  double target_fpr = 0.0;
  double achieved_fpr = 0.0;
  double fnr = 1.0;
  double threshold = 0.0;
};

/// Lowest fnr among thresholds whose fpr does not exceed the target. No
/// interpolation between thresholds.
OperatingPoint fnr_at_fpr(const RocCurve& curve, double target_fpr);
OperatingPoint fnr_at_fpr(std::span<const double> scores,
                          std::span<const int> positive, double target_fpr);

/// Emails per header-line count for the emails whose label equals `label`.
using LineCountHistogram = std::map<std::size_t, std::size_t>;
LineCountHistogram header_line_histogram(
    std::span<const std::size_t> header_lines,
    std::span<const std::string> labels, const std::string& label);

/// `fpr,tpr,threshold` rows.
void write_roc_csv(const RocCurve& curve, std::ostream& out);
/// `class,line_count,email_count` rows, classes in the given order.
void write_histogram_csv(const std::vector<std::string>& classes,
                         const std::vector<LineCountHistogram>& histograms,
                         std::ostream& out);
/// Table with true classes as rows, predictions as columns.
void write_confusion(const ConfusionMatrix& matrix, std::ostream& out);

}  // namespace qprof
