#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hdd {

std::string trim(std::string_view s);

// Strict full-string parses; `what` names the key or location in the error.
double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);
std::uint64_t parse_u64(const std::string& s, const std::string& what);
bool parse_bool(const std::string& s, const std::string& what);

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};
// "key = value" lines; '#' starts a comment; blank lines ignored.
std::vector<KeyValue> read_key_values(std::istream& in, const std::string& source);
std::vector<KeyValue> read_key_values(const std::filesystem::path& path);

}  // namespace hdd
