#include "jsonl.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "divex/error.hpp"

namespace divex::jsonl {

void read(const std::filesystem::path& path, const std::function<void(std::size_t, const Json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");

  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    const auto where = path.string() + ":" + std::to_string(lineNo) + ": ";
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::Parse, where + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) fail(ErrorCode::Parse, where + "expected a JSON object");
    try {
      fn(lineNo, obj);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    } catch (const Json::exception& e) {
      fail(ErrorCode::Parse, where + e.what());
    }
  }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "cannot rename '" + tmp.string() + "': " + ec.message());
}

void append_line(std::string& out, const Json& value) {
  out += value.dump(-1, ' ', false, Json::error_handler_t::strict);
  out += '\n';
}

double round9(double value) {
  if (!std::isfinite(value)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // drop negative zero
}

const Json& field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) fail(ErrorCode::Parse, std::string("missing field '") + name + "'");
  return *it;
}

std::string get_string(const Json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_string()) fail(ErrorCode::Parse, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double get_number(const Json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_number()) fail(ErrorCode::Parse, std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_uint(const Json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  fail(ErrorCode::Parse, std::string("field '") + name + "' must be a non-negative integer");
}

}  // namespace divex::jsonl
