#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vgdial {

// config / command-line problems -> exit code 2
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// malformed corpora / prediction files -> exit code 3
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// whitespace tokenization; question strings are stored pre-tokenized with
// punctuation detached ("... the cylinder ?"), so this is the whole story
std::vector<std::string> tokenize(const std::string& text);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

// fixed-precision helper for places where we format floats ourselves
// (JSON output goes through nlohmann's exact round-trip printer instead)
std::string format_double(double v, int precision = 6);

// Runs f(0..n-1) across up to `workers` threads. Tasks must only touch their
// own output slot; the first exception is rethrown after all threads join.
void parallel_for(int n, int workers, const std::function<void(int)>& f);

}  // namespace vgdial
