#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qprof/corpus.hpp"
#include "qprof/rng.hpp"

namespace qprof {

/// Negative binomial count: failures before `shape` successes, with the
/// success probability chosen so the mean is `mean`.
struct NegativeBinomial {
  double mean = 0.0;
  int shape = 1;
};

/// Unnormalised weights over the 256 byte values.
using ByteWeights = std::array<double, 256>;

/// Generative model of one class. An email is a header of
/// `header_lines` non-empty lines, a blank line, then a body of
/// `body_lines` lines; line contents are drawn byte by byte.
struct ClassModel {
  std::string label;
  double weight = 1.0;
  int header_lines_min = 8;
  int header_lines_max = 16;
  NegativeBinomial header_line_length{30.0, 4};
  ByteWeights header_bytes{};
  NegativeBinomial body_lines{20.0, 4};
  NegativeBinomial body_line_length{50.0, 4};
  ByteWeights body_bytes{};
};

struct SyntheticSpec {
  std::vector<ClassModel> classes;
  std::uint64_t seed = 0;
};

/// Throws InvalidArgument unless weights sum to 1 and every distribution
/// is proper. LF and CR may not carry weight in the byte distributions;
/// line structure comes from the line-length draws.
void validate(const SyntheticSpec& spec);

/// Draws one email. The class is chosen from the mixture.
struct SyntheticEmail {
  std::string label;
  std::vector<Byte> bytes;
};

class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(SyntheticSpec spec);
  SyntheticEmail next();

 private:
  std::size_t pick_class();
  std::int64_t draw(const NegativeBinomial& nb);
  Byte draw_byte(const std::vector<double>& cumulative);
  void emit_line(std::vector<Byte>& out, std::string_view prefix,
                 std::int64_t length, const std::vector<double>& cumulative);

  SyntheticSpec spec_;
  Rng rng_;
  std::vector<std::vector<double>> header_cdf_;
  std::vector<std::vector<double>> body_cdf_;
};

/// Writes `n_emails` files under `out_dir/mail/` and an index at
/// `out_dir/index` (paths relative to `out_dir`). Throws Error if the
/// directory cannot be written.
CorpusIndex generate_synthetic(const SyntheticSpec& spec, std::size_t n_emails,
                               const std::filesystem::path& out_dir);

/// Printable ASCII letters, digits, space and punctuation.
ByteWeights printable_bytes();
/// Uniform weight on the bytes of `alphabet`.
ByteWeights uniform_bytes(std::string_view alphabet);

/// Named presets used by the tests and the CLI.
SyntheticSpec separable_preset(std::uint64_t seed);
SyntheticSpec header_leakage_preset(std::uint64_t seed);
SyntheticSpec line_profile_preset(std::uint64_t seed);
SyntheticSpec four_category_preset(std::uint64_t seed);
SyntheticSpec preset(std::string_view name, std::uint64_t seed);

}  // namespace qprof
