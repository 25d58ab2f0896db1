#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qprof/email.hpp"
#include "qprof/forest.hpp"
#include "qprof/profiles.hpp"

namespace qprof {

struct IndexEntry {
  std::string label;
  std::string path;  ///< relative to the corpus root

  bool operator==(const IndexEntry&) const = default;
};

/// Entries in the order they appear in the index file.
struct CorpusIndex {
  std::vector<IndexEntry> entries;
};

/// TREC-style index: one `label<whitespace>path` per non-empty line. The
/// path is everything after the first whitespace run. Throws ParseError
/// with the line number for a line without a path.
CorpusIndex parse_index(std::string_view text);
CorpusIndex read_index(const std::filesystem::path& path);
void write_index(const CorpusIndex& index, std::ostream& out);

using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;

/// Profiles of a corpus, one row per email in corpus order.
struct Dataset {
  CountMatrix profiles;
  std::vector<std::string> labels;
  std::vector<std::string> ids;

  Eigen::Index rows() const noexcept { return profiles.rows(); }
  FeatureMatrix features() const { return profiles.cast<double>(); }
};

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct LoadResult {
  Dataset dataset;
  std::vector<SkippedFile> skipped;
};

struct ProfileOptions {
  ProfileKind kind = ProfileKind::Character;
  Scope scope = Scope::Full;
  Eigen::Index max_lines = kDefaultMaxLines;
};

/// Profiles every indexed email. Unreadable files are skipped and reported.
/// Throws Error if `root` is not a directory.
LoadResult load(const CorpusIndex& index, const std::filesystem::path& root,
                const ProfileOptions& options, unsigned threads = 0);

/// Header line count of every readable email, with its label.
struct HeaderLineCounts {
  std::vector<std::size_t> counts;
  std::vector<std::string> labels;
  std::vector<SkippedFile> skipped;
};
HeaderLineCounts load_header_line_counts(const CorpusIndex& index,
                                         const std::filesystem::path& root);

/// First `n_train` rows and the rest, order preserved. Throws
/// InvalidArgument unless 0 < n_train < rows.
std::pair<Dataset, Dataset> chronological_split(const Dataset& dataset,
                                                Eigen::Index n_train);

/// Rows [begin, end).
Dataset slice(const Dataset& dataset, Eigen::Index begin, Eigen::Index end);

/// `label,f0,...,f{m-1}` header, decimal integers, LF line endings.
void write_profile_csv(const Dataset& dataset, std::ostream& out);
/// Inverse of write_profile_csv; ids become `row<N>`. Throws ParseError.
Dataset read_profile_csv(std::istream& in);

}  // namespace qprof
