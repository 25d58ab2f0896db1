#include "qprof/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "qprof/error.hpp"

namespace qprof {
namespace {

void check_nb(const NegativeBinomial& nb, const std::string& what) {
  if (!(nb.mean >= 0.0) || !std::isfinite(nb.mean) || nb.shape < 1)
    throw InvalidArgument(what + ": negative binomial needs mean >= 0, shape >= 1");
}

void check_bytes(const ByteWeights& w, const std::string& what) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidArgument(what + ": byte weights must be finite and >= 0");
    total += x;
  }
  if (total <= 0.0) throw InvalidArgument(what + ": byte weights are all zero");
  if (w['\n'] != 0.0 || w['\r'] != 0.0)
    throw InvalidArgument(what + ": LF and CR must have zero weight");
}

std::vector<double> cumulative(const ByteWeights& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.classes.empty()) throw InvalidArgument("synthetic spec has no classes");
  double total = 0.0;
  for (const ClassModel& c : spec.classes) {
    const std::string what = "class '" + c.label + "'";
    if (c.label.empty() || c.label.find_first_of(" \t\r\n") != std::string::npos)
      throw InvalidArgument("class labels must be non-empty without whitespace");
    if (!(c.weight > 0.0)) throw InvalidArgument(what + ": weight must be > 0");
    total += c.weight;
    if (c.header_lines_min < 0 || c.header_lines_max < c.header_lines_min)
      throw InvalidArgument(what + ": bad header line range");
    check_nb(c.header_line_length, what + " header line length");
    check_nb(c.body_lines, what + " body lines");
    check_nb(c.body_line_length, what + " body line length");
    check_bytes(c.header_bytes, what + " header");
    check_bytes(c.body_bytes, what + " body");
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("class weights must sum to 1");
}

SyntheticGenerator::SyntheticGenerator(SyntheticSpec spec)
    : spec_(std::move(spec)), rng_(spec_.seed) {
  validate(spec_);
  for (const ClassModel& c : spec_.classes) {
    header_cdf_.push_back(cumulative(c.header_bytes));
    body_cdf_.push_back(cumulative(c.body_bytes));
  }
}

std::size_t SyntheticGenerator::pick_class() {
  const double u = rng_.uniform();
  double acc = 0.0;
  for (std::size_t c = 0; c + 1 < spec_.classes.size(); ++c) {
    acc += spec_.classes[c].weight;
    if (u < acc) return c;
  }
  return spec_.classes.size() - 1;
}

std::int64_t SyntheticGenerator::draw(const NegativeBinomial& nb) {
  if (nb.mean == 0.0) return 0;
  // Sum of `shape` geometric failure counts, each by inversion.
  const double p = nb.shape / (nb.shape + nb.mean);
  const double log_q = std::log1p(-p);
  std::int64_t total = 0;
  for (int i = 0; i < nb.shape; ++i) {
    const double u = 1.0 - rng_.uniform();  // (0, 1]
    total += static_cast<std::int64_t>(std::floor(std::log(u) / log_q));
  }
  return total;
}

Byte SyntheticGenerator::draw_byte(const std::vector<double>& cdf) {
  const double u = rng_.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<Byte>(std::min<std::ptrdiff_t>(it - cdf.begin(), 255));
}

void SyntheticGenerator::emit_line(std::vector<Byte>& out, std::string_view prefix,
                                   std::int64_t length,
                                   const std::vector<double>& cdf) {
  out.insert(out.end(), prefix.begin(), prefix.end());
  for (std::int64_t i = 0; i < length; ++i) out.push_back(draw_byte(cdf));
  out.push_back('\n');
}

SyntheticEmail SyntheticGenerator::next() {
  const std::size_t c = pick_class();
  const ClassModel& model = spec_.classes[c];
  SyntheticEmail email{model.label, {}};
  const auto span = static_cast<std::uint64_t>(model.header_lines_max -
                                               model.header_lines_min + 1);
  const auto header_lines =
      model.header_lines_min + static_cast<int>(rng_.below(span));
  for (int i = 0; i < header_lines; ++i) {
    // The field name keeps header lines non-empty.
    const std::string name = "X-Field-" + std::to_string(i) + ": ";
    emit_line(email.bytes, name, draw(model.header_line_length), header_cdf_[c]);
  }
  email.bytes.push_back('\n');
  const std::int64_t body_lines = draw(model.body_lines);
  for (std::int64_t i = 0; i < body_lines; ++i)
    emit_line(email.bytes, {}, draw(model.body_line_length), body_cdf_[c]);
  return email;
}

CorpusIndex generate_synthetic(const SyntheticSpec& spec, std::size_t n_emails,
                               const std::filesystem::path& out_dir) {
  SyntheticGenerator gen(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "mail", ec);
  if (ec) throw Error("cannot create " + (out_dir / "mail").string() + ": " + ec.message());

  CorpusIndex index;
  for (std::size_t i = 0; i < n_emails; ++i) {
    SyntheticEmail email = gen.next();
    char name[32];
    std::snprintf(name, sizeof name, "mail/%06zu.eml", i + 1);
    std::ofstream out(out_dir / name, std::ios::binary);
    out.write(reinterpret_cast<const char*>(email.bytes.data()),
              static_cast<std::streamsize>(email.bytes.size()));
    if (!out) throw Error("cannot write " + (out_dir / name).string());
    index.entries.push_back({email.label, name});
  }
  std::ofstream idx(out_dir / "index", std::ios::binary);
  write_index(index, idx);
  if (!idx) throw Error("cannot write " + (out_dir / "index").string());
  return index;
}

ByteWeights uniform_bytes(std::string_view alphabet) {
  ByteWeights w{};
  for (char ch : alphabet) w[static_cast<Byte>(ch)] = 1.0;
  return w;
}

ByteWeights printable_bytes() {
  ByteWeights w{};
  for (int b = 0x20; b < 0x7f; ++b) w[b] = 1.0;
  // Spaces are common in text.
  w[' '] = 12.0;
  return w;
}

SyntheticSpec separable_preset(std::uint64_t seed) {
  ClassModel ham{.label = "ham", .weight = 0.6};
  ham.header_bytes = printable_bytes();
  ham.body_bytes = uniform_bytes("abcdefghijklm ");
  ClassModel spam = ham;
  spam.label = "spam";
  spam.weight = 0.4;
  spam.body_bytes = uniform_bytes("NOPQRSTUVWXYZ!$%");
  return {{ham, spam}, seed};
}

SyntheticSpec header_leakage_preset(std::uint64_t seed) {
  ClassModel ham{.label = "ham", .weight = 0.5};
  ham.header_bytes = printable_bytes();
  ham.body_bytes = printable_bytes();
  ham.header_lines_min = 6;
  ham.header_lines_max = 13;
  ClassModel spam = ham;
  spam.label = "spam";
  spam.header_lines_min = 13;
  spam.header_lines_max = 22;
  return {{ham, spam}, seed};
}

SyntheticSpec line_profile_preset(std::uint64_t seed) {
  ClassModel ham{.label = "ham", .weight = 0.6};
  // Fixed header shape: every difference between classes is in the body.
  ham.header_lines_min = ham.header_lines_max = 10;
  ham.header_line_length = {0.0, 1};
  ham.header_bytes = printable_bytes();
  ham.body_bytes = printable_bytes();
  ham.body_lines = {12.0, 20};
  ham.body_line_length = {48.0, 16};
  ClassModel spam = ham;
  spam.label = "spam";
  spam.weight = 0.4;
  spam.body_lines = {10.0, 20};
  spam.body_line_length = {30.0, 16};
  return {{ham, spam}, seed};
}

SyntheticSpec four_category_preset(std::uint64_t seed) {
  ClassModel advert{.label = "advert", .weight = 0.15};
  advert.header_bytes = printable_bytes();
  advert.body_bytes = printable_bytes();
  advert.body_bytes['<'] = advert.body_bytes['>'] = 4.0;
  advert.header_lines_min = 12;
  advert.header_lines_max = 20;
  advert.body_lines = {60.0, 3};
  advert.body_line_length = {70.0, 4};

  ClassModel sham = advert;
  sham.label = "s.ham";
  sham.weight = 0.35;
  sham.body_bytes = printable_bytes();
  sham.header_lines_min = 8;
  sham.header_lines_max = 16;
  sham.body_lines = {15.0, 2};
  sham.body_line_length = {55.0, 3};

  ClassModel notify = sham;
  notify.label = "notify";
  notify.weight = 0.3;
  notify.body_bytes = uniform_bytes("0123456789:-/ ABCDEFabcdef");
  notify.header_lines_min = 10;
  notify.header_lines_max = 14;
  notify.body_lines = {8.0, 8};
  notify.body_line_length = {30.0, 10};

  ClassModel spam = sham;
  spam.label = "spam";
  spam.weight = 0.2;
  spam.body_bytes = printable_bytes();
  spam.body_bytes['!'] = spam.body_bytes['$'] = 3.0;
  spam.header_lines_min = 6;
  spam.header_lines_max = 18;
  spam.body_lines = {25.0, 2};
  spam.body_line_length = {45.0, 2};
  return {{advert, sham, notify, spam}, seed};
}

SyntheticSpec preset(std::string_view name, std::uint64_t seed) {
  if (name == "separable") return separable_preset(seed);
  if (name == "header-leakage") return header_leakage_preset(seed);
  if (name == "line-profile") return line_profile_preset(seed);
  if (name == "four-category") return four_category_preset(seed);
  throw InvalidArgument("unknown preset '" + std::string(name) +
                        "' (expected separable, header-leakage, line-profile "
                        "or four-category)");
}

}  // namespace qprof
