#include "qprof/profiles.hpp"

#include <string>

#include "qprof/error.hpp"

namespace qprof {

Profile character_profile(ByteView segment) {
  Profile p{CountVector::Zero(kAlphabetSize), ProfileKind::Character,
            Scope::Full};
  for (Byte b : segment) ++p.values[b];
  return p;
}

Profile binary_profile(ByteView segment, const BinaryProfileConfig& config) {
  if (config.max_occurrences < 1)
    throw InvalidArgument("binary profile needs at least one occurrence slot");
  Profile p{CountVector::Zero(config.max_occurrences), ProfileKind::Line,
            Scope::Full};
  Eigen::Index seen = 0;
  Count gap = 0;
  for (Byte b : segment) {
    if (b != config.special) {
      ++gap;
      continue;
    }
    p.values[seen++] = gap;
    if (seen == config.max_occurrences) break;
    gap = 0;
  }
  return p;
}

Profile line_profile(ByteView segment, Eigen::Index max_lines) {
  return binary_profile(segment, {Byte{'\n'}, max_lines});
}

Profile profile_email(const RawEmail& email, ProfileKind kind, Scope scope,
                      Eigen::Index max_lines) {
  const ByteView part = scoped_bytes(email, scope);
  Profile p = kind == ProfileKind::Character ? character_profile(part)
                                             : line_profile(part, max_lines);
  p.scope = scope;
  return p;
}

Eigen::Index profile_dimension(ProfileKind kind, Eigen::Index max_lines) {
  return kind == ProfileKind::Character ? kAlphabetSize : max_lines;
}

std::string_view to_string(ProfileKind kind) {
  return kind == ProfileKind::Character ? "cp" : "lp";
}

ProfileKind parse_profile_kind(std::string_view name) {
  if (name == "cp") return ProfileKind::Character;
  if (name == "lp") return ProfileKind::Line;
  throw InvalidArgument("unknown profile kind '" + std::string(name) +
                        "' (expected cp or lp)");
}

}  // namespace qprof
