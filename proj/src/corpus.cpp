#include "qprof/corpus.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "parallel.hpp"
#include "qprof/error.hpp"

namespace qprof {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

CorpusIndex parse_index(std::string_view text) {
  CorpusIndex index;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    std::size_t ws = 0;
    while (ws < line.size() && !is_space(line[ws])) ++ws;
    if (ws == line.size())
      throw ParseError(line_no, "expected '<label> <path>'");
    std::size_t p = ws;
    while (is_space(line[p])) ++p;
    index.entries.push_back({std::string(line.substr(0, ws)),
                             std::string(line.substr(p))});
  }
  return index;
}

CorpusIndex read_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_index(text.str());
}

void write_index(const CorpusIndex& index, std::ostream& out) {
  for (const IndexEntry& e : index.entries) out << e.label << ' ' << e.path << '\n';
}

LoadResult load(const CorpusIndex& index, const std::filesystem::path& root,
                const ProfileOptions& options, unsigned threads) {
  if (!std::filesystem::is_directory(root))
    throw Error("corpus root " + root.string() + " is not a directory");
  if (options.kind == ProfileKind::Line && options.max_lines < 1)
    throw InvalidArgument("line profile length must be >= 1");
  const Eigen::Index m = profile_dimension(options.kind, options.max_lines);
  const std::size_t n = index.entries.size();

  std::vector<std::optional<Profile>> profiles(n);
  std::vector<std::string> errors(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    try {
      const RawEmail email = RawEmail::read_file(root / index.entries[i].path);
      profiles[i] = profile_email(email, options.kind, options.scope,
                                  options.max_lines);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  LoadResult result;
  Eigen::Index rows = 0;
  for (const auto& p : profiles) rows += p.has_value();
  result.dataset.profiles.resize(rows, m);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!profiles[i]) {
      result.skipped.push_back({index.entries[i].path, errors[i]});
      continue;
    }
    result.dataset.profiles.row(r++) = profiles[i]->values.transpose();
    result.dataset.labels.push_back(index.entries[i].label);
    result.dataset.ids.push_back(index.entries[i].path);
  }
  return result;
}

HeaderLineCounts load_header_line_counts(const CorpusIndex& index,
                                         const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw Error("corpus root " + root.string() + " is not a directory");
  HeaderLineCounts out;
  for (const IndexEntry& e : index.entries) {
    try {
      out.counts.push_back(count_header_lines(RawEmail::read_file(root / e.path)));
      out.labels.push_back(e.label);
    } catch (const Error& err) {
      out.skipped.push_back({e.path, err.what()});
    }
  }
  return out;
}

Dataset slice(const Dataset& dataset, Eigen::Index begin, Eigen::Index end) {
  Dataset out;
  out.profiles = dataset.profiles.middleRows(begin, end - begin);
  out.labels.assign(dataset.labels.begin() + begin, dataset.labels.begin() + end);
  out.ids.assign(dataset.ids.begin() + begin, dataset.ids.begin() + end);
  return out;
}

std::pair<Dataset, Dataset> chronological_split(const Dataset& dataset,
                                                Eigen::Index n_train) {
  if (n_train <= 0 || n_train >= dataset.rows())
    throw InvalidArgument("n_train must lie in [1, " +
                          std::to_string(dataset.rows() - 1) + "]");
  return {slice(dataset, 0, n_train), slice(dataset, n_train, dataset.rows())};
}

void write_profile_csv(const Dataset& dataset, std::ostream& out) {
  out << "label";
  for (Eigen::Index j = 0; j < dataset.profiles.cols(); ++j) out << ",f" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < dataset.rows(); ++i) {
    out << dataset.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < dataset.profiles.cols(); ++j)
      out << ',' << dataset.profiles(i, j);
    out << '\n';
  }
}

Dataset read_profile_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty profile CSV");
  std::vector<std::string_view> header;
  {
    std::string_view rest = line;
    for (std::size_t c; (c = rest.find(',')) != std::string_view::npos;) {
      header.push_back(rest.substr(0, c));
      rest.remove_prefix(c + 1);
    }
    header.push_back(rest);
  }
  if (header.size() < 2 || header[0] != "label")
    throw ParseError(1, "expected header 'label,f0,...'");
  const auto m = static_cast<Eigen::Index>(header.size() - 1);
  for (Eigen::Index j = 0; j < m; ++j)
    if (header[static_cast<std::size_t>(j + 1)] != "f" + std::to_string(j))
      throw ParseError(1, "unexpected column name");

  std::vector<Count> values;
  Dataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0)
      throw ParseError(line_no, "row has no label");
    ds.labels.push_back(line.substr(0, comma));
    ds.ids.push_back("row" + std::to_string(ds.labels.size() - 1));
    const char* p = line.data() + comma + 1;
    const char* end = line.data() + line.size();
    for (Eigen::Index j = 0; j < m; ++j) {
      Count v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{} || v < 0)
        throw ParseError(line_no, "bad value in column f" + std::to_string(j));
      values.push_back(v);
      p = next;
      if (j + 1 < m) {
        if (p == end || *p != ',')
          throw ParseError(line_no, "expected " + std::to_string(m) + " values");
        ++p;
      }
    }
    if (p != end) throw ParseError(line_no, "trailing data");
  }
  const auto n = static_cast<Eigen::Index>(ds.labels.size());
  ds.profiles = Eigen::Map<const Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(values.data(), n, m);
  return ds;
}

}  // namespace qprof
