#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qprof/email.hpp"
#include "qprof/rng.hpp"

namespace qprof::testing {

inline std::string to_string(ByteView bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

/// Random byte string biased towards LF and CR so line structure shows up.
inline std::vector<Byte> random_bytes(Rng& rng, std::size_t n) {
  std::vector<Byte> out(n);
  for (auto& b : out) {
    const auto r = rng.below(16);
    b = r == 0 ? Byte{'\n'} : r == 1 ? Byte{'\r'} : static_cast<Byte>(rng.below(256));
  }
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("qprof-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace qprof::testing
