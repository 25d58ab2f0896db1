#include "qprof/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "qprof/corpus.hpp"
#include "qprof/error.hpp"
#include "qprof/eval.hpp"
#include "qprof/forest.hpp"
#include "qprof/synthetic.hpp"

namespace qprof {
namespace {

/// Bad flag combination or value; exits with kExitUsage.
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct Options {
  std::string index;
  std::string root;
  std::string csv;
  std::string kind = "cp";
  std::string scope = "full";
  int max_lines = static_cast<int>(kDefaultMaxLines);
  std::optional<long> n_train;
  int trees = 500;
  std::optional<int> mtry;
  int min_node_size = 1;
  std::optional<int> max_depth;
  std::uint64_t seed = 0;
  std::vector<double> target_fpr;
  double threshold = 0.5;
  std::string model;
  std::string out;
  std::optional<long> top;
  unsigned threads = 0;
  std::string preset_name;
  long n_emails = 1000;
};

std::string percent(double fraction) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << fraction * 100.0 << '%';
  return s.str();
}

std::string shortest(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void add_source_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--index", o.index, "Corpus index file (label path per line)");
  cmd->add_option("--root", o.root, "Directory the index paths are relative to");
  cmd->add_option("--csv", o.csv, "Profile CSV produced by 'extract'");
  cmd->add_option("--kind", o.kind, "Profile kind")
      ->check(CLI::IsMember({"cp", "lp"}));
  cmd->add_option("--scope", o.scope, "Part of the email to profile")
      ->check(CLI::IsMember({"full", "header", "body"}));
  cmd->add_option("--k", o.max_lines, "Number of lines in a line profile")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

void add_forest_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--trees", o.trees, "Number of trees");
  cmd->add_option("--mtry", o.mtry, "Features tried per split (default sqrt(m))");
  cmd->add_option("--min-node-size", o.min_node_size, "Nodes this small are not split");
  cmd->add_option("--max-depth", o.max_depth, "Maximum tree depth");
}

ForestParams forest_params(const Options& o) {
  ForestParams p;
  p.n_trees = o.trees;
  p.mtry = o.mtry;
  p.min_node_size = o.min_node_size;
  p.max_depth = o.max_depth;
  p.seed = o.seed;
  p.threads = o.threads;
  if (p.n_trees < 1) throw UsageError("--trees must be >= 1");
  if (p.mtry && *p.mtry < 1) throw UsageError("--mtry must be >= 1");
  if (p.min_node_size < 1) throw UsageError("--min-node-size must be >= 1");
  if (p.max_depth && *p.max_depth < 1) throw UsageError("--max-depth must be >= 1");
  return p;
}

void check_source(const Options& o) {
  const bool corpus = !o.index.empty() || !o.root.empty();
  if (corpus == !o.csv.empty())
    throw UsageError("give either --index and --root, or --csv");
  if (corpus && (o.index.empty() || o.root.empty()))
    throw UsageError("--index and --root must be given together");
}

Dataset load_source(const Options& o, std::ostream& err) {
  check_source(o);
  if (!o.csv.empty()) {
    std::ifstream in(o.csv, std::ios::binary);
    if (!in) throw Error("cannot open " + o.csv);
    return read_profile_csv(in);
  }
  const ProfileOptions opts{parse_profile_kind(o.kind), parse_scope(o.scope),
                            o.max_lines};
  LoadResult r = load(read_index(o.index), o.root, opts, o.threads);
  if (!r.skipped.empty()) {
    err << "skipped " << r.skipped.size() << " unreadable file(s)\n";
    for (const SkippedFile& s : r.skipped) err << "  " << s.path << ": " << s.reason << '\n';
  }
  return r.dataset;
}

/// Rows used for training and the held-out rest (empty when no split).
std::pair<Dataset, Dataset> split_rows(const Dataset& data, const Options& o) {
  if (!o.n_train) return {data, slice(data, data.rows(), data.rows())};
  if (*o.n_train < 1 || *o.n_train >= data.rows())
    throw UsageError("--n-train must lie in [1, " + std::to_string(data.rows() - 1) +
                     "] for " + std::to_string(data.rows()) + " emails");
  return chronological_split(data, *o.n_train);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

void print_class_counts(const Dataset& data, std::ostream& out) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : data.labels) ++counts[l];
  out << std::left << std::setw(8) << "corpus" << std::right;
  for (const auto& [label, n] : counts) out << std::setw(10) << label;
  out << std::setw(10) << "total" << '\n';
  out << std::left << std::setw(8) << "emails" << std::right;
  for (const auto& [label, n] : counts) out << std::setw(10) << n;
  out << std::setw(10) << data.rows() << '\n';
}

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw UsageError("extract needs --out");
  const Dataset data = load_source(o, err);
  std::ofstream csv = open_output(o.out);
  write_profile_csv(data, csv);
  if (!csv) throw Error("write failed: " + o.out);
  print_class_counts(data, out);
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty()) throw UsageError("train needs --model");
  const ForestParams params = forest_params(o);
  const Dataset data = load_source(o, err);
  const Dataset train_rows = split_rows(data, o).first;
  if (params.mtry && *params.mtry > train_rows.profiles.cols())
    throw UsageError("--mtry exceeds the feature count");
  const EncodedLabels labels = encode_labels(train_rows.labels);
  const FeatureMatrix x = train_rows.features();
  const Forest forest = train(x, labels.codes, labels.classes, params);
  save_model(forest, o.model);
  const OobReport oob = oob_error(forest, x, labels.codes);
  out << "trained " << forest.trees.size() << " trees on " << train_rows.rows()
      << " emails, " << forest.n_features << " features, mtry "
      << *forest.params.mtry << '\n'
      << "oob_error: " << percent(oob.error) << " (" << oob.evaluated
      << " evaluated, " << oob.skipped.size() << " never out of bag)\n";
  return kExitOk;
}

/// Held-out rows with their label codes under the model's class list.
struct TestSet {
  FeatureMatrix x;
  std::vector<int> codes;
};

TestSet test_rows(const Forest& forest, const Dataset& rows) {
  if (rows.profiles.cols() != forest.n_features)
    throw Error("data has " + std::to_string(rows.profiles.cols()) +
                " features, model expects " + std::to_string(forest.n_features));
  for (const auto& l : rows.labels)
    if (std::find(forest.classes.begin(), forest.classes.end(), l) ==
        forest.classes.end())
      throw Error("label '" + l + "' is not a class of the model");
  return {rows.features(), encode_labels(rows.labels, forest.classes)};
}

struct BinaryMetrics {
  RocCurve roc;
  std::vector<OperatingPoint> points;
};

BinaryMetrics binary_metrics(const Forest& forest, const Eigen::MatrixXd& scores,
                             std::span<const int> codes,
                             const std::vector<double>& targets) {
  const int pos = positive_class(forest);
  std::vector<double> s(codes.size());
  std::vector<int> positive(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    s[i] = scores(static_cast<Eigen::Index>(i), pos);
    positive[i] = codes[i] == pos;
  }
  BinaryMetrics m{roc(s, positive), {}};
  for (double t : targets) m.points.push_back(fnr_at_fpr(m.roc, t));
  return m;
}

std::vector<double> targets(const Options& o) {
  std::vector<double> t = o.target_fpr.empty() ? std::vector<double>{0.005, 0.01}
                                               : o.target_fpr;
  for (double v : t)
    if (!(v > 0.0 && v < 1.0)) throw UsageError("--target-fpr must lie in (0, 1)");
  return t;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty()) throw UsageError("evaluate needs --model");
  if (!(o.threshold >= 0.0 && o.threshold <= 1.0))
    throw UsageError("--threshold must lie in [0, 1]");
  const std::vector<double> target_list = targets(o);
  const Forest forest = load_model(o.model);
  const Dataset data = load_source(o, err);
  const Dataset rows = o.n_train ? split_rows(data, o).second : data;
  const TestSet test = test_rows(forest, rows);
  const Eigen::MatrixXd scores = predict_scores(forest, test.x);

  std::vector<int> predicted(test.codes.size());
  const bool binary = forest.n_classes() == 2;
  const int pos = binary ? positive_class(forest) : -1;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const ScoreVector row = scores.row(i).transpose();
    predicted[static_cast<std::size_t>(i)] =
        binary ? predict(row, o.threshold, pos) : predict(row);
  }
  const ConfusionMatrix cm = confusion(test.codes, predicted, forest.classes);

  out << "test_emails: " << rows.rows() << '\n';
  out << "confusion" << (binary ? " (spam threshold " + shortest(o.threshold) + ")" : "")
      << ":\n";
  write_confusion(cm, out);
  out << "accuracy: " << percent(double(cm.counts.trace()) / double(std::max<std::int64_t>(cm.total(), 1)))
      << '\n';
  if (!binary) return kExitOk;

  const ErrorRates rates = fpr_fnr(cm);
  out << "fpr: " << percent(rates.fpr) << (rates.fpr_undefined ? " (undefined: no ham)" : "")
      << '\n'
      << "fnr: " << percent(rates.fnr) << (rates.fnr_undefined ? " (undefined: no spam)" : "")
      << '\n';
  const bool both = cm.counts.row(pos).sum() > 0 && cm.counts.row(1 - pos).sum() > 0;
  if (!both) {
    err << "test rows contain a single class; ROC metrics skipped\n";
    return kExitOk;
  }
  const BinaryMetrics m = binary_metrics(forest, scores, test.codes, target_list);
  out << "auc: " << std::fixed << std::setprecision(6) << m.roc.auc << '\n';
  out.unsetf(std::ios::floatfield);
  for (const OperatingPoint& p : m.points)
    out << "operating_point target_fpr=" << percent(p.target_fpr)
        << " achieved_fpr=" << percent(p.achieved_fpr) << " fnr=" << percent(p.fnr)
        << " threshold=" << shortest(p.threshold) << '\n';
  if (!o.out.empty()) {
    std::ofstream csv = open_output(o.out);
    write_roc_csv(m.roc, csv);
  }
  return kExitOk;
}

/// Training rows of a model with codes under its class list.
struct TrainSet {
  Dataset rows;
  FeatureMatrix x;
  std::vector<int> codes;
};

TrainSet train_rows_for(const Forest& forest, const Options& o, std::ostream& err) {
  const Dataset data = load_source(o, err);
  TrainSet t{split_rows(data, o).first, {}, {}};
  if (static_cast<std::size_t>(t.rows.rows()) != forest.n_samples() ||
      t.rows.profiles.cols() != forest.n_features)
    throw Error("data does not match the model's training set (" +
                std::to_string(forest.n_samples()) + " rows, " +
                std::to_string(forest.n_features) + " features)");
  t.x = t.rows.features();
  t.codes = encode_labels(t.rows.labels, forest.classes);
  return t;
}

int cmd_importance(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty()) throw UsageError("importance needs --model");
  const Forest forest = load_model(o.model);
  if (o.top && (*o.top < 1 || *o.top > forest.n_features))
    throw UsageError("--top must lie in [1, " + std::to_string(forest.n_features) + "]");
  const TrainSet t = train_rows_for(forest, o, err);
  const ImportanceReport report = permutation_importance(forest, t.x, t.codes, o.seed);
  const auto shown = o.top ? *o.top : static_cast<long>(forest.n_features);
  const bool lines = o.csv.empty() && o.kind == "lp";
  out << "rank,feature,importance\n";
  for (long r = 0; r < shown; ++r) {
    const Eigen::Index f = report.ranking[static_cast<std::size_t>(r)];
    out << r + 1 << ",f" << f << ',' << shortest(report.importance[f]) << '\n';
  }
  const auto top5 = select_top_k(report, std::min<Eigen::Index>(5, forest.n_features));
  out << (lines ? "most important lines: (" : "most important features: (");
  for (std::size_t i = 0; i < top5.size(); ++i)
    out << (i ? ", " : "") << (lines ? top5[i] + 1 : top5[i]);
  out << ")" << (lines ? "-th lines" : "") << '\n';
  if (!o.out.empty()) {
    std::ofstream csv = open_output(o.out);
    csv << "rank,feature,importance\n";
    for (std::size_t r = 0; r < report.ranking.size(); ++r)
      csv << r + 1 << ",f" << report.ranking[r] << ','
          << shortest(report.importance[report.ranking[r]]) << '\n';
  }
  return kExitOk;
}

int cmd_reduce(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty()) throw UsageError("reduce needs --model");
  if (!o.top) throw UsageError("reduce needs --top");
  if (!o.n_train) throw UsageError("reduce needs --n-train to hold out test rows");
  const std::vector<double> target_list = targets(o);
  const Forest full = load_model(o.model);
  if (*o.top < 1 || *o.top > full.n_features)
    throw UsageError("--top must lie in [1, " + std::to_string(full.n_features) + "]");
  const TrainSet t = train_rows_for(full, o, err);
  const Dataset test_data = split_rows(load_source(o, err), o).second;
  const TestSet test = test_rows(full, test_data);

  const ImportanceReport report = permutation_importance(full, t.x, t.codes, o.seed);
  std::vector<Eigen::Index> keep = select_top_k(report, *o.top);
  // Column order follows the original layout so k = m reproduces the model.
  std::sort(keep.begin(), keep.end());

  ForestParams params = full.params;
  params.threads = o.threads;
  const int default_mtry =
      std::max(1, static_cast<int>(std::floor(std::sqrt(double(full.n_features)))));
  if (*params.mtry == default_mtry) params.mtry.reset();
  else params.mtry = std::min<int>(*params.mtry, static_cast<int>(keep.size()));
  const Forest reduced =
      train(t.x(Eigen::all, keep), t.codes, full.classes, params);

  const Eigen::MatrixXd full_scores = predict_scores(full, test.x);
  const Eigen::MatrixXd reduced_scores =
      predict_scores(reduced, FeatureMatrix(test.x(Eigen::all, keep)));

  out << "features: full " << full.n_features << ", reduced " << keep.size() << '\n';
  if (full.n_classes() != 2) {
    auto accuracy = [&](const Eigen::MatrixXd& s) {
      std::size_t hits = 0;
      for (Eigen::Index i = 0; i < s.rows(); ++i)
        hits += predict(ScoreVector(s.row(i).transpose())) == test.codes[static_cast<std::size_t>(i)];
      return double(hits) / double(std::max<Eigen::Index>(s.rows(), 1));
    };
    out << "accuracy: full " << percent(accuracy(full_scores)) << ", reduced "
        << percent(accuracy(reduced_scores)) << '\n';
    return kExitOk;
  }
  const BinaryMetrics fm = binary_metrics(full, full_scores, test.codes, target_list);
  const BinaryMetrics rm = binary_metrics(reduced, reduced_scores, test.codes, target_list);
  out << "auc: full " << std::fixed << std::setprecision(6) << fm.roc.auc
      << ", reduced " << rm.roc.auc << '\n';
  out.unsetf(std::ios::floatfield);
  for (std::size_t i = 0; i < target_list.size(); ++i)
    out << "fnr at fpr " << percent(target_list[i]) << ": full "
        << percent(fm.points[i].fnr) << ", reduced " << percent(rm.points[i].fnr)
        << '\n';
  return kExitOk;
}

int cmd_headerhist(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.index.empty() || o.root.empty())
    throw UsageError("headerhist needs --index and --root");
  const HeaderLineCounts counts = load_header_line_counts(read_index(o.index), o.root);
  if (!counts.skipped.empty())
    err << "skipped " << counts.skipped.size() << " unreadable file(s)\n";
  std::vector<std::string> classes = encode_labels(counts.labels).classes;
  std::vector<LineCountHistogram> hists;
  for (const auto& c : classes)
    hists.push_back(header_line_histogram(counts.counts, counts.labels, c));
  if (o.out.empty()) {
    write_histogram_csv(classes, hists, out);
  } else {
    std::ofstream csv = open_output(o.out);
    write_histogram_csv(classes, hists, csv);
  }
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw UsageError("generate needs --out");
  if (o.n_emails < 1) throw UsageError("--n must be >= 1");
  const SyntheticSpec spec = preset(o.preset_name, o.seed);
  const CorpusIndex index =
      generate_synthetic(spec, static_cast<std::size_t>(o.n_emails), o.out);
  std::map<std::string, std::size_t> counts;
  for (const auto& e : index.entries) ++counts[e.label];
  out << "wrote " << index.entries.size() << " emails to " << o.out << '\n';
  for (const auto& [label, n] : counts) out << "  " << label << ": " << n << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Spam filtering and email categorization by quantitative profiles",
               "qprof"};
  app.require_subcommand(1);
  Options o;

  auto* extract = app.add_subcommand("extract", "Write the profile CSV of a corpus");
  add_source_flags(extract, o);
  extract->add_option("--out", o.out, "Output CSV");

  auto* train_cmd = app.add_subcommand("train", "Train a Random Forest on the first rows");
  add_source_flags(train_cmd, o);
  add_forest_flags(train_cmd, o);
  train_cmd->add_option("--n-train", o.n_train, "Rows used for training (default all)");
  train_cmd->add_option("--seed", o.seed, "Random seed");
  train_cmd->add_option("--model", o.model, "Output model file");

  auto* evaluate = app.add_subcommand("evaluate", "Score held-out rows");
  add_source_flags(evaluate, o);
  evaluate->add_option("--n-train", o.n_train, "Rows before the test set (default 0)");
  evaluate->add_option("--model", o.model, "Model file");
  evaluate->add_option("--target-fpr", o.target_fpr, "Target fpr (repeatable)");
  evaluate->add_option("--threshold", o.threshold, "Spam threshold for the confusion table");
  evaluate->add_option("--out", o.out, "ROC CSV output");

  auto* importance = app.add_subcommand("importance", "Rank features by mean decrease of accuracy");
  add_source_flags(importance, o);
  importance->add_option("--n-train", o.n_train, "Training rows of the model");
  importance->add_option("--model", o.model, "Model file");
  importance->add_option("--seed", o.seed, "Permutation seed");
  importance->add_option("--top", o.top, "Print only the top N features");
  importance->add_option("--out", o.out, "Full ranking CSV output");

  auto* reduce = app.add_subcommand("reduce", "Retrain on the top-k features and compare");
  add_source_flags(reduce, o);
  reduce->add_option("--n-train", o.n_train, "Training rows of the model");
  reduce->add_option("--model", o.model, "Full model file");
  reduce->add_option("--seed", o.seed, "Permutation seed");
  reduce->add_option("--top", o.top, "Number of features to keep");
  reduce->add_option("--target-fpr", o.target_fpr, "Target fpr (repeatable)");

  auto* headerhist = app.add_subcommand("headerhist", "Header line count distribution per class");
  headerhist->add_option("--index", o.index, "Corpus index file");
  headerhist->add_option("--root", o.root, "Corpus root");
  headerhist->add_option("--out", o.out, "Output CSV (default stdout)");

  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus");
  generate->add_option("--preset", o.preset_name, "separable, header-leakage, line-profile or four-category")
      ->required();
  generate->add_option("--n", o.n_emails, "Number of emails");
  generate->add_option("--seed", o.seed, "Random seed");
  generate->add_option("--out", o.out, "Output directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) return cmd_extract(o, out, err);
    if (*train_cmd) return cmd_train(o, out, err);
    if (*evaluate) return cmd_evaluate(o, out, err);
    if (*importance) return cmd_importance(o, out, err);
    if (*reduce) return cmd_reduce(o, out, err);
    if (*headerhist) return cmd_headerhist(o, out, err);
    if (*generate) return cmd_generate(o, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace qprof
