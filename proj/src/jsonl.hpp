#pragma once

// Line-oriented JSON helpers shared by the catalog store, the manifest reader
// and the featuremap precompute file.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace divex::jsonl {

using Json = nlohmann::ordered_json;

/// Calls `fn(lineNumber, object)` for every non-blank line. Parse failures and
/// exceptions thrown by `fn` are rethrown as Error with "<file>:<line>" context,
/// keeping the original error code where there is one.
void read(const std::filesystem::path& path,
          const std::function<void(std::size_t, const Json&)>& fn);

/// Writes through a temporary file and renames into place.
void write_file(const std::filesystem::path& path, const std::string& contents);

void append_line(std::string& out, const Json& value);

/// Rounds to at most 9 significant digits.
double round9(double value);

// Typed field accessors; throw Error(Parse) naming the field.
const Json& field(const Json& obj, const char* name);
std::string get_string(const Json& obj, const char* name);
double get_number(const Json& obj, const char* name);
std::uint64_t get_uint(const Json& obj, const char* name);

}  // namespace divex::jsonl
