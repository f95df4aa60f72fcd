#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ztn {

// Configuration / usage problems; the CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (trace rows, policy files); carries a line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Shortest decimal form that round-trips the exact double value.
std::string format_double(double v);

// Writes to <path>.tmp and renames into place, so a failed run never
// leaves a partial file behind.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

std::vector<std::string> split(const std::string& s, char delim);

// FNV-1a over a byte string; used for world-state hashing.
std::uint64_t hash_bytes(const std::string& bytes);

// Log verbosity from the ZTN_LOG environment variable: 0 quiet (default),
// 1 info, 2 debug.  Messages go to stderr.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace ztn
