#include <gtest/gtest.h>

#include <algorithm>

#include "qprof/error.hpp"
#include "qprof/profiles.hpp"
#include "test_util.hpp"

namespace qprof {
namespace {

/// Naive line splitter: lengths of LF-terminated lines, zero-filled.
std::vector<Count> naive_line_lengths(const std::vector<Byte>& bytes, std::size_t k) {
  std::vector<Count> out;
  std::string line;
  for (Byte b : bytes) {
    if (b == '\n') {
      out.push_back(static_cast<Count>(line.size()));
      line.clear();
    } else {
      line.push_back(char(b));
    }
  }
  out.resize(std::max(out.size(), k), 0);
  out.resize(k);
  return out;
}

std::vector<Count> to_vector(const CountVector& v) { return {v.begin(), v.end()}; }

TEST(CharacterProfile, EmptyIsZero) {
  const Profile p = character_profile(as_bytes(""));
  EXPECT_EQ(p.dimension(), 256);
  EXPECT_EQ(p.values.sum(), 0);
}

TEST(CharacterProfile, CountsByHand) {
  const Profile p = character_profile(as_bytes("aab\n"));
  EXPECT_EQ(p.values[97], 2);
  EXPECT_EQ(p.values[98], 1);
  EXPECT_EQ(p.values[10], 1);
  EXPECT_EQ(p.values.sum(), 4);
}

TEST(CharacterProfile, MassEqualsLength) {
  Rng rng(1);
  std::vector<Byte> bytes(10000);
  for (auto& b : bytes) b = static_cast<Byte>(rng.below(256));
  EXPECT_EQ(character_profile(bytes).values.sum(), 10000);
}

TEST(CharacterProfile, AdditiveAndPermutationInvariant) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = testing::random_bytes(rng, rng.below(300));
    auto b = testing::random_bytes(rng, rng.below(300));
    std::vector<Byte> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const CountVector sum = character_profile(a).values + character_profile(b).values;
    EXPECT_EQ(character_profile(ab).values, sum);
    rng.shuffle(std::span<Byte>(ab));
    EXPECT_EQ(character_profile(ab).values, sum);
  }
}

TEST(BinaryProfile, GapsByHand) {
  const Profile p = binary_profile(as_bytes("hello\nworld!\n"), {'\n', 5});
  EXPECT_EQ(to_vector(p.values), (std::vector<Count>{5, 6, 0, 0, 0}));
}

TEST(BinaryProfile, AdjacentSpecialsAndTruncation) {
  const Profile p = binary_profile(as_bytes("\n\n\n"), {'\n', 2});
  EXPECT_EQ(to_vector(p.values), (std::vector<Count>{0, 0}));
}

TEST(BinaryProfile, NoSpecialByte) {
  const Profile p = binary_profile(as_bytes("abc def"), {'\n', 100});
  EXPECT_EQ(p.dimension(), 100);
  EXPECT_EQ(p.values.sum(), 0);
}

TEST(BinaryProfile, OtherSpecialByte) {
  const Profile p = binary_profile(as_bytes("a,bb,,ccc"), {',', 4});
  EXPECT_EQ(to_vector(p.values), (std::vector<Count>{1, 2, 0, 0}));
}

TEST(BinaryProfile, RejectsNonPositiveDimension) {
  EXPECT_THROW(binary_profile(as_bytes("x"), {'\n', 0}), InvalidArgument);
}

TEST(LineProfile, CrCountsAsContent) {
  const Profile p = line_profile(as_bytes("hi\r\nyo\r\n"));
  EXPECT_EQ(p.dimension(), 100);
  EXPECT_EQ(p.values[0], 3);
  EXPECT_EQ(p.values[1], 3);
  EXPECT_EQ(p.values.tail(98).sum(), 0);
}

TEST(LineProfile, TruncatesAtK) {
  std::string text;
  for (int i = 0; i < 150; ++i) text += "x\n";
  const Profile p = line_profile(as_bytes(text), 100);
  EXPECT_TRUE((p.values.array() == 1).all());
}

TEST(LineProfile, EmptyInput) {
  EXPECT_EQ(line_profile(as_bytes("")).values, CountVector::Zero(100));
}

TEST(LineProfile, MatchesNaiveSplitter) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto bytes = testing::random_bytes(rng, rng.below(400));
    const auto k = static_cast<Eigen::Index>(1 + rng.below(40));
    EXPECT_EQ(to_vector(line_profile(bytes, k).values),
              naive_line_lengths(bytes, static_cast<std::size_t>(k)));
  }
}

TEST(LineProfile, ReconstructsLengthWhenAllLinesFit) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    auto bytes = testing::random_bytes(rng, rng.below(300));
    bytes.push_back('\n');
    const auto lf = std::count(bytes.begin(), bytes.end(), Byte{'\n'});
    const Profile p = line_profile(bytes, 200);
    ASSERT_LE(lf, 200);
    EXPECT_EQ(p.values.sum() + lf, static_cast<Count>(bytes.size()));
  }
}

TEST(LineProfile, ShorterKIsPrefix) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto bytes = testing::random_bytes(rng, rng.below(400));
    const auto a = static_cast<Eigen::Index>(1 + rng.below(30));
    const auto b = a + static_cast<Eigen::Index>(1 + rng.below(30));
    EXPECT_EQ(line_profile(bytes, a).values, line_profile(bytes, b).values.head(a));
  }
}

TEST(LineProfile, NotPermutationInvariant) {
  const std::string text = "aaaa\nb\n";
  std::string shuffled = "a\naaab\n";
  ASSERT_TRUE(std::is_permutation(text.begin(), text.end(), shuffled.begin()));
  EXPECT_EQ(character_profile(as_bytes(text)).values,
            character_profile(as_bytes(shuffled)).values);
  EXPECT_NE(line_profile(as_bytes(text)).values, line_profile(as_bytes(shuffled)).values);
}

TEST(ProfileEmail, ScopedVariants) {
  const RawEmail email("A: 1\n\nhi\n");
  const Profile lpb = profile_email(email, ProfileKind::Line, Scope::Body, 100);
  EXPECT_EQ(lpb.values[0], 2);
  EXPECT_EQ(lpb.values.tail(99).sum(), 0);
  EXPECT_EQ(lpb.scope, Scope::Body);

  const Profile cph = profile_email(email, ProfileKind::Character, Scope::Header);
  EXPECT_EQ(cph.values, character_profile(as_bytes("A: 1\n")).values);

  // Full CP is the sum over header, separator and body.
  const Profile cp = profile_email(email, ProfileKind::Character, Scope::Full);
  const CountVector oracle = character_profile(as_bytes("A: 1\n")).values +
                             character_profile(as_bytes("\n")).values +
                             character_profile(as_bytes("hi\n")).values;
  EXPECT_EQ(cp.values, oracle);
}

TEST(ProfileEmail, FeaturesAreExactCasts) {
  const Profile p = line_profile(as_bytes("abc\nde\n"), 3);
  const Eigen::VectorXd f = p.features();
  EXPECT_EQ(f, Eigen::Vector3d(3, 2, 0));
}

TEST(ProfileKindNames, RoundTrip) {
  EXPECT_EQ(parse_profile_kind("lp"), ProfileKind::Line);
  EXPECT_EQ(to_string(ProfileKind::Character), "cp");
  EXPECT_THROW(parse_profile_kind("bp"), InvalidArgument);
}

}  // namespace
}  // namespace qprof
