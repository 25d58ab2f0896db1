#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace qprof {

using Byte = std::uint8_t;
using ByteView = std::span<const Byte>;

/// Which part of an email a profile is computed over.
enum class Scope { Full, Header, Body };

/// An email as an opaque octet stream. Nothing is decoded, transcoded or
/// normalised; the bytes are exactly what was on disk.
class RawEmail {
 public:
  RawEmail() = default;
  explicit RawEmail(std::vector<Byte> bytes) : bytes_(std::move(bytes)) {}
  explicit RawEmail(std::string_view text)
      : bytes_(text.begin(), text.end()) {}

  /// Reads a file verbatim. Throws qprof::Error if it cannot be read.
  static RawEmail read_file(const std::filesystem::path& path);

  ByteView bytes() const noexcept { return bytes_; }
  std::size_t size() const noexcept { return bytes_.size(); }

 private:
  std::vector<Byte> bytes_;
};

/// Header, blank-line separator and body of an email. All three are views
/// into the email, so header ++ separator ++ body is the full byte stream.
struct HeaderBody {
  ByteView header;
  ByteView separator;
  ByteView body;
};

/// Splits at the first empty line, LF LF or CRLF CRLF, whichever starts
/// earlier. Without an empty line the header is the whole email.
HeaderBody split_header_body(ByteView email);
inline HeaderBody split_header_body(const RawEmail& email) {
  return split_header_body(email.bytes());
}

ByteView scoped_bytes(ByteView email, Scope scope);
inline ByteView scoped_bytes(const RawEmail& email, Scope scope) {
  return scoped_bytes(email.bytes(), scope);
}

/// LF count in the header, plus one for a trailing unterminated line.
std::size_t count_header_lines(ByteView email);
inline std::size_t count_header_lines(const RawEmail& email) {
  return count_header_lines(email.bytes());
}

std::string_view to_string(Scope scope);
Scope parse_scope(std::string_view name);

/// Convenience for tests and literals.
inline ByteView as_bytes(std::string_view text) noexcept {
  return {reinterpret_cast<const Byte*>(text.data()), text.size()};
}

}  // namespace qprof
