#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trek {

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 for hashing many files without concatenating them.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  void update_file(const std::filesystem::path& path);
  std::string hex();

 private:
  void* ctx_;
};

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// see either the old content or the new content. Throws WriteError.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs `/bin/sh -c command` and captures both output streams.
ProcessResult run_shell(const std::string& command);

/// Single-quotes `arg` for the POSIX shell.
std::string shell_quote(std::string_view arg);

}  // namespace trek
