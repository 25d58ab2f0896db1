#include "qprof/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "qprof/error.hpp"
#include "qprof/forest.hpp"

namespace qprof {
namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> truth,
                          std::span<const int> predicted,
                          std::vector<std::string> class_order) {
  if (truth.size() != predicted.size())
    throw InvalidArgument("truth and prediction lists differ in length");
  const auto k = static_cast<int>(class_order.size());
  ConfusionMatrix cm;
  cm.counts.setZero(k, k);
  cm.classes = std::move(class_order);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k)
      throw InvalidArgument("class code out of range");
    ++cm.counts(truth[i], predicted[i]);
  }
  return cm;
}

ConfusionMatrix confusion(std::span<const std::string> truth,
                          std::span<const std::string> predicted,
                          std::span<const std::string> class_order) {
  if (truth.size() != predicted.size())
    throw InvalidArgument("truth and prediction lists differ in length");
  return confusion(encode_labels(truth, class_order),
                   encode_labels(predicted, class_order),
                   {class_order.begin(), class_order.end()});
}

ErrorRates fpr_fnr(const ConfusionMatrix& matrix) {
  if (matrix.counts.rows() != 2)
    throw InvalidArgument("fpr/fnr need a binary confusion matrix");
  const int pos = matrix.classes.size() == 2 && matrix.classes[0] == "spam" ? 0 : 1;
  const int neg = 1 - pos;
  const auto tp = double(matrix.counts(pos, pos));
  const auto fn = double(matrix.counts(pos, neg));
  const auto tn = double(matrix.counts(neg, neg));
  const auto fp = double(matrix.counts(neg, pos));
  ErrorRates r;
  if (tn + fp > 0) r.fpr = fp / (tn + fp);
  else r.fpr_undefined = true;
  if (tp + fn > 0) r.fnr = fn / (tp + fn);
  else r.fnr_undefined = true;
  return r;
}

RocCurve roc(std::span<const double> scores, std::span<const int> positive) {
  if (scores.size() != positive.size())
    throw InvalidArgument("score and label lists differ in length");
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw InvalidArgument("non-finite score");
    n_pos += positive[i] != 0;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw InvalidArgument("ROC needs both positive and negative examples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;  // in units of (negatives x positives)
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::size_t tp_before = tp, fp_before = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i)
      (positive[order[i]] ? tp : fp) += 1;
    area += double(fp - fp_before) * double(tp + tp_before) / 2.0;
    curve.points.push_back({double(fp) / double(n_neg),
                            double(tp) / double(n_pos), s});
  }
  curve.auc = area / (double(n_pos) * double(n_neg));
  return curve;
}

OperatingPoint fnr_at_fpr(const RocCurve& curve, double target_fpr) {
  if (!(target_fpr > 0.0 && target_fpr < 1.0))
    throw InvalidArgument("target fpr must lie in (0, 1)");
  // Points are ordered by non-decreasing fpr and tpr, so the best admissible
  // point is the first one reaching the highest admissible tpr.
  const RocPoint* best = &curve.points.front();
  for (const RocPoint& p : curve.points) {
    if (p.fpr > target_fpr) break;
    if (p.tpr > best->tpr) best = &p;
  }
  return {target_fpr, best->fpr, 1.0 - best->tpr, best->threshold};
}

OperatingPoint fnr_at_fpr(std::span<const double> scores,
                          std::span<const int> positive, double target_fpr) {
  return fnr_at_fpr(roc(scores, positive), target_fpr);
}

LineCountHistogram header_line_histogram(
    std::span<const std::size_t> header_lines,
    std::span<const std::string> labels, const std::string& label) {
  if (header_lines.size() != labels.size())
    throw InvalidArgument("line counts and labels differ in length");
  LineCountHistogram h;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) ++h[header_lines[i]];
  return h;
}

void write_roc_csv(const RocCurve& curve, std::ostream& out) {
  out << "fpr,tpr,threshold\n";
  for (const RocPoint& p : curve.points)
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
        << format_double(p.threshold) << '\n';
}

void write_histogram_csv(const std::vector<std::string>& classes,
                         const std::vector<LineCountHistogram>& histograms,
                         std::ostream& out) {
  out << "class,line_count,email_count\n";
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (const auto& [lines, emails] : histograms.at(c))
      out << classes[c] << ',' << lines << ',' << emails << '\n';
}

void write_confusion(const ConfusionMatrix& matrix, std::ostream& out) {
  std::size_t width = 6;
  for (const auto& c : matrix.classes) width = std::max(width, c.size() + 1);
  for (Eigen::Index i = 0; i < matrix.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.counts.cols(); ++j)
      width = std::max(width, std::to_string(matrix.counts(i, j)).size() + 1);
  const auto w = static_cast<int>(width);
  out << std::setw(w) << std::left << "count" << std::right;
  for (const auto& c : matrix.classes) out << std::setw(w) << c;
  out << '\n';
  for (Eigen::Index i = 0; i < matrix.counts.rows(); ++i) {
    out << std::setw(w) << std::left << matrix.classes[static_cast<std::size_t>(i)]
        << std::right;
    for (Eigen::Index j = 0; j < matrix.counts.cols(); ++j)
      out << std::setw(w) << matrix.counts(i, j);
    out << '\n';
  }
}

}  // namespace qprof
