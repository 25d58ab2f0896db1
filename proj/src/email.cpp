#include "qprof/email.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "qprof/error.hpp"

namespace qprof {

RawEmail RawEmail::read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Byte> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) throw Error("read failed: " + path.string());
  return RawEmail(std::move(bytes));
}

HeaderBody split_header_body(ByteView email) {
  const std::size_t n = email.size();
  // Walk line starts; an empty line is "\n" after an LF-terminated line or
  // "\r\n" after a CRLF-terminated line (or either at offset 0).
  std::size_t start = 0;
  bool prev_crlf = true;
  while (start < n) {
    if (email[start] == '\n') {
      return {email.first(start), email.subspan(start, 1),
              email.subspan(start + 1)};
    }
    if (prev_crlf && start + 1 < n && email[start] == '\r' &&
        email[start + 1] == '\n') {
      return {email.first(start), email.subspan(start, 2),
              email.subspan(start + 2)};
    }
    auto it = std::find(email.begin() + start, email.end(), Byte{'\n'});
    if (it == email.end()) break;
    const std::size_t lf = static_cast<std::size_t>(it - email.begin());
    prev_crlf = lf > start && email[lf - 1] == '\r';
    start = lf + 1;
  }
  return {email, email.subspan(n), email.subspan(n)};
}

ByteView scoped_bytes(ByteView email, Scope scope) {
  switch (scope) {
    case Scope::Full:
      return email;
    case Scope::Header:
      return split_header_body(email).header;
    case Scope::Body:
      return split_header_body(email).body;
  }
  return email;
}

std::size_t count_header_lines(ByteView email) {
  const ByteView header = split_header_body(email).header;
  auto lines = static_cast<std::size_t>(
      std::count(header.begin(), header.end(), Byte{'\n'}));
  if (!header.empty() && header.back() != '\n') ++lines;
  return lines;
}

std::string_view to_string(Scope scope) {
  switch (scope) {
    case Scope::Full:
      return "full";
    case Scope::Header:
      return "header";
    case Scope::Body:
      return "body";
  }
  return "full";
}

Scope parse_scope(std::string_view name) {
  if (name == "full") return Scope::Full;
  if (name == "header") return Scope::Header;
  if (name == "body") return Scope::Body;
  throw InvalidArgument("unknown scope '" + std::string(name) +
                        "' (expected full, header or body)");
}

}  // namespace qprof
