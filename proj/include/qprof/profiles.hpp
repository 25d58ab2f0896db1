#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string_view>

#include "qprof/email.hpp"

namespace qprof {

/// Exact integer counts; converted to reals only at the classifier boundary.
using Count = std::int64_t;
template <typename Scalar>
using ProfileVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using CountVector = ProfileVector<Count>;

enum class ProfileKind { Character, Line };

inline constexpr Eigen::Index kAlphabetSize = 256;
inline constexpr Eigen::Index kDefaultMaxLines = 100;

/// A fixed-dimension quantitative profile of one email (or one part of it).
struct Profile {
  CountVector values;
  ProfileKind kind = ProfileKind::Character;
  Scope scope = Scope::Full;

  Eigen::Index dimension() const noexcept { return values.size(); }

  /// Real-valued feature vector for the classifier.
  template <typename Scalar = double>
  ProfileVector<Scalar> features() const {
    return values.cast<Scalar>();
  }
};

/// Gap lengths between successive occurrences of `special`, truncated or
/// zero-filled to `max_occurrences` entries.
struct BinaryProfileConfig {
  Byte special = '\n';
  Eigen::Index max_occurrences = kDefaultMaxLines;
};

/// Histogram of byte values: entry j counts bytes equal to j.
Profile character_profile(ByteView segment);

/// Entry j is T_j - T_{j-1} - 1 where T_j is the 1-based position of the
/// j-th special byte and T_0 = 0. Occurrences past the configured maximum
/// are ignored; missing ones give zeros. Throws InvalidArgument if the
/// maximum is not positive.
Profile binary_profile(ByteView segment, const BinaryProfileConfig& config);

/// Lengths in bytes of the first `max_lines` LF-terminated lines. CR is an
/// ordinary byte and counts towards the line length.
Profile line_profile(ByteView segment,
                     Eigen::Index max_lines = kDefaultMaxLines);

/// Profile of the selected part of an email. `max_lines` is ignored for
/// character profiles.
Profile profile_email(const RawEmail& email, ProfileKind kind, Scope scope,
                      Eigen::Index max_lines = kDefaultMaxLines);

/// Feature dimension a given kind produces.
Eigen::Index profile_dimension(ProfileKind kind, Eigen::Index max_lines);

std::string_view to_string(ProfileKind kind);
ProfileKind parse_profile_kind(std::string_view name);

}  // namespace qprof
