#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace shadowkit {

/// Whole-file read; throws DataError naming the path if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`, creating parent
/// directories as needed. Readers never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// 64-bit FNV-1a, streaming.
class Fnv1a {
 public:
  void update(std::string_view bytes) noexcept;
  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace shadowkit
