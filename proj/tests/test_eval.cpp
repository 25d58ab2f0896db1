#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qprof/error.hpp"
#include "qprof/eval.hpp"
#include "qprof/rng.hpp"

namespace qprof {
namespace {

/// Probability that a random spam outscores a random ham, ties counted 1/2.
double pair_count_auc(const std::vector<double>& s, const std::vector<int>& pos) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (pos[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

/// Random scores on a coarse grid so ties are common; both classes present.
void random_case(Rng& rng, std::vector<double>& s, std::vector<int>& pos) {
  const std::size_t n = 2 + rng.below(199);
  s.resize(n);
  pos.resize(n);
  const auto grid = 1 + rng.below(20);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = static_cast<int>(rng.below(2));
    s[i] = double(rng.below(grid)) / double(grid) + pos[i] * 0.1 * rng.uniform();
  }
  pos[0] = 1;
  pos[1] = 0;
}

TEST(Confusion, BinaryExample) {
  const std::vector<std::string> truth{"spam", "spam", "ham", "ham", "ham", "ham",
                                       "ham",  "ham",  "ham", "ham"};
  const std::vector<std::string> pred{"spam", "spam", "spam", "ham", "ham",
                                      "ham",  "ham",  "ham",  "ham", "ham"};
  const std::vector<std::string> order{"ham", "spam"};
  const ConfusionMatrix cm = confusion(truth, pred, order);
  Eigen::Matrix<std::int64_t, 2, 2> expected;
  expected << 7, 1, 0, 2;
  EXPECT_EQ(cm.counts, expected);
  EXPECT_EQ(cm.total(), 10);
}

TEST(Confusion, PerfectPredictionIsDiagonal) {
  const std::vector<int> y{0, 1, 2, 3, 2, 1};
  const ConfusionMatrix cm = confusion(y, y, {"a", "b", "c", "d"});
  EXPECT_TRUE(cm.counts.isDiagonal());
  EXPECT_EQ(cm.counts.trace(), 6);
}

TEST(Confusion, MarginsMatchCounts) {
  Rng rng(3);
  std::vector<int> t(300), p(300);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<int>(rng.below(4));
    p[i] = static_cast<int>(rng.below(4));
  }
  const ConfusionMatrix cm = confusion(t, p, {"a", "b", "c", "d"});
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(cm.counts.row(c).sum(), std::count(t.begin(), t.end(), c));
    EXPECT_EQ(cm.counts.col(c).sum(), std::count(p.begin(), p.end(), c));
  }
}

TEST(Confusion, RejectsUnknownLabel) {
  const std::vector<std::string> truth{"ham"}, pred{"eggs"}, order{"ham", "spam"};
  EXPECT_THROW(confusion(truth, pred, order), InvalidArgument);
}

ConfusionMatrix binary(std::int64_t tn, std::int64_t fp, std::int64_t fn, std::int64_t tp) {
  ConfusionMatrix cm;
  cm.classes = {"ham", "spam"};
  cm.counts.resize(2, 2);
  cm.counts << tn, fp, fn, tp;
  return cm;
}

TEST(FprFnr, Arithmetic) {
  const ErrorRates r = fpr_fnr(binary(199, 1, 3, 97));
  EXPECT_DOUBLE_EQ(r.fpr, 0.005);
  EXPECT_DOUBLE_EQ(r.fnr, 0.03);
  EXPECT_FALSE(r.fpr_undefined || r.fnr_undefined);
}

TEST(FprFnr, PerfectClassifier) {
  const ErrorRates r = fpr_fnr(binary(10, 0, 0, 5));
  EXPECT_EQ(r.fpr, 0.0);
  EXPECT_EQ(r.fnr, 0.0);
}

TEST(FprFnr, NoHamFlagsFpr) {
  const ErrorRates r = fpr_fnr(binary(0, 0, 1, 5));
  EXPECT_TRUE(r.fpr_undefined);
  EXPECT_EQ(r.fpr, 0.0);
  EXPECT_FALSE(r.fnr_undefined);
}

TEST(FprFnr, SpamFirstInClassOrder) {
  ConfusionMatrix cm;
  cm.classes = {"spam", "ok"};
  cm.counts.resize(2, 2);
  cm.counts << 97, 3, 1, 199;  // rows: true spam, true ok
  const ErrorRates r = fpr_fnr(cm);
  EXPECT_DOUBLE_EQ(r.fpr, 0.005);
  EXPECT_DOUBLE_EQ(r.fnr, 0.03);
}

TEST(FprFnr, RejectsMultiClass) {
  ConfusionMatrix cm;
  cm.classes = {"a", "b", "c"};
  cm.counts.setZero(3, 3);
  EXPECT_THROW(fpr_fnr(cm), InvalidArgument);
}

TEST(Roc, PerfectSeparation) {
  const std::vector<double> s{0.9, 0.8, 0.3, 0.1};
  const std::vector<int> pos{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(roc(s, pos).auc, 1.0);
}

TEST(Roc, AllTiedCollapses) {
  const std::vector<double> s{0.4, 0.4, 0.4, 0.4};
  const std::vector<int> pos{1, 0, 1, 0};
  const RocCurve c = roc(s, pos);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].fpr, 0.0);
  EXPECT_EQ(c.points[0].tpr, 0.0);
  EXPECT_EQ(c.points[1].fpr, 1.0);
  EXPECT_EQ(c.points[1].tpr, 1.0);
  EXPECT_DOUBLE_EQ(c.auc, 0.5);
}

TEST(Roc, RejectsSingleClassAndNan) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(roc(s, std::vector<int>{1, 1}), InvalidArgument);
  EXPECT_THROW(roc(std::vector<double>{NAN, 0.2}, std::vector<int>{1, 0}),
               InvalidArgument);
}

TEST(Roc, AucEqualsPairCounting) {
  Rng rng(2024);
  std::vector<double> s;
  std::vector<int> pos;
  for (int trial = 0; trial < 200; ++trial) {
    random_case(rng, s, pos);
    const RocCurve c = roc(s, pos);
    EXPECT_NEAR(c.auc, pair_count_auc(s, pos), 1e-12);
    EXPECT_EQ(c.points.front().fpr, 0.0);
    EXPECT_EQ(c.points.back().fpr, 1.0);
    EXPECT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].fpr, c.points[i - 1].fpr);
      EXPECT_GE(c.points[i].tpr, c.points[i - 1].tpr);
    }
  }
}

TEST(Roc, InvariantUnderIncreasingTransform) {
  Rng rng(77);
  std::vector<double> s;
  std::vector<int> pos;
  for (int trial = 0; trial < 50; ++trial) {
    random_case(rng, s, pos);
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
    const RocCurve a = roc(s, pos), b = roc(t, pos);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_EQ(a.points[i].fpr, b.points[i].fpr);
      EXPECT_EQ(a.points[i].tpr, b.points[i].tpr);
    }
    EXPECT_EQ(a.auc, b.auc);
  }
}

TEST(FnrAtFpr, PerfectScoresGiveZero) {
  const std::vector<double> s{0.9, 0.8, 0.3, 0.1};
  const std::vector<int> pos{1, 1, 0, 0};
  EXPECT_EQ(fnr_at_fpr(s, pos, 0.005).fnr, 0.0);
}

TEST(FnrAtFpr, HandEnumeratedThresholds) {
  // Thresholds 0.9: (fpr 0, tpr 1/2); 0.8: (1, 1/2); 0.7: (1, 1).
  const std::vector<double> s{0.9, 0.8, 0.7};
  const std::vector<int> pos{1, 0, 1};
  const OperatingPoint p = fnr_at_fpr(s, pos, 0.4);
  EXPECT_EQ(p.threshold, 0.9);
  EXPECT_EQ(p.fnr, 0.5);
  EXPECT_EQ(p.achieved_fpr, 0.0);
}

TEST(FnrAtFpr, FallsBackToAllHamThreshold) {
  const std::vector<double> s{0.2, 0.9, 0.5};
  const std::vector<int> pos{1, 0, 0};
  const OperatingPoint p = fnr_at_fpr(s, pos, 0.1);
  EXPECT_EQ(p.fnr, 1.0);
  EXPECT_TRUE(std::isinf(p.threshold));
}

TEST(FnrAtFpr, MonotoneInTargetAndRespectsConstraint) {
  Rng rng(5);
  std::vector<double> s;
  std::vector<int> pos;
  for (int trial = 0; trial < 100; ++trial) {
    random_case(rng, s, pos);
    const RocCurve c = roc(s, pos);
    double last = 1.0;
    for (double target : {0.005, 0.01, 0.05, 0.1, 0.3, 0.6, 0.99}) {
      const OperatingPoint p = fnr_at_fpr(c, target);
      EXPECT_LE(p.achieved_fpr, target);
      EXPECT_LE(p.fnr, last);
      last = p.fnr;
    }
  }
}

TEST(FnrAtFpr, RejectsTargetOutsideUnitInterval) {
  const std::vector<double> s{0.9, 0.1};
  const std::vector<int> pos{1, 0};
  EXPECT_THROW(fnr_at_fpr(s, pos, 0.0), InvalidArgument);
  EXPECT_THROW(fnr_at_fpr(s, pos, 1.0), InvalidArgument);
}

TEST(HeaderLineHistogram, CountsPerClass) {
  const std::vector<std::size_t> lines{2, 2, 2, 5};
  const std::vector<std::string> labels{"ham", "ham", "ham", "spam"};
  EXPECT_EQ(header_line_histogram(lines, labels, "ham"), (LineCountHistogram{{2, 3}}));
  EXPECT_EQ(header_line_histogram(lines, labels, "spam"), (LineCountHistogram{{5, 1}}));
  EXPECT_TRUE(header_line_histogram(lines, labels, "advert").empty());
}

TEST(CsvWriters, Formats) {
  std::ostringstream roc_csv;
  write_roc_csv(roc(std::vector<double>{0.75, 0.25}, std::vector<int>{1, 0}), roc_csv);
  EXPECT_EQ(roc_csv.str(), "fpr,tpr,threshold\n0,0,inf\n0,1,0.75\n1,1,0.25\n");

  std::ostringstream hist;
  write_histogram_csv({"ham", "spam"}, {{{2, 3}}, {{5, 1}, {7, 2}}}, hist);
  EXPECT_EQ(hist.str(), "class,line_count,email_count\nham,2,3\nspam,5,1\nspam,7,2\n");
}

}  // namespace
}  // namespace qprof
