#include "divex/frame.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "divex/error.hpp"

namespace divex {

Frame::Frame(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "frame dimensions must be positive");
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "frame dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * 3) {
    fail(ErrorCode::InvalidArgument, "pixel buffer length must equal width*height*3");
  }
}

namespace {

// Reads one header token, skipping whitespace and '#' comments.
std::string header_token(const std::string& bytes, std::size_t& pos, const std::string& name) {
  while (pos < bytes.size()) {
    const auto c = static_cast<unsigned char>(bytes[pos]);
    if (std::isspace(c)) {
      ++pos;
    } else if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const auto start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') ++pos;
  if (start == pos) fail(ErrorCode::Parse, "'" + name + "': truncated PPM header");
  return bytes.substr(start, pos - start);
}

int header_int(const std::string& bytes, std::size_t& pos, const std::string& name, const char* what) {
  const auto tok = header_token(bytes, pos, name);
  if (tok.size() > 9 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    fail(ErrorCode::Parse, "'" + name + "': invalid PPM " + what + " '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

Frame decode_ppm(const std::string& bytes, const std::string& name) {
  std::size_t pos = 0;
  const auto magic = header_token(bytes, pos, name);
  if (magic != "P6") {
    if (magic.size() == 2 && magic[0] == 'P') {
      fail(ErrorCode::UnsupportedFormat, "'" + name + "': unsupported PPM variant " + magic + " (only binary P6 is accepted)");
    }
    fail(ErrorCode::Parse, "'" + name + "': not a PPM file");
  }
  const int width = header_int(bytes, pos, name, "width");
  const int height = header_int(bytes, pos, name, "height");
  const int maxval = header_int(bytes, pos, name, "maxval");
  if (width <= 0 || height <= 0) fail(ErrorCode::Parse, "'" + name + "': PPM dimensions must be positive");
  if (maxval != 255) fail(ErrorCode::UnsupportedFormat, "'" + name + "': maxval must be 255, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(ErrorCode::Parse, "'" + name + "': missing whitespace after PPM header");
  }
  ++pos;
  const auto need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() - pos < need) fail(ErrorCode::Parse, "'" + name + "': truncated pixel data");
  std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return Frame(width, height, std::move(pixels));
}

Frame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_ppm(ss.str(), path.string());
}

std::string encode_ppm(const Frame& frame) {
  std::string out = "P6\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(frame.bytes().data()), frame.bytes().size());
  return out;
}

void write_ppm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  const auto bytes = encode_ppm(frame);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Frame scale_to_fit(const Frame& frame, int maxEdge) {
  if (maxEdge <= 0) fail(ErrorCode::InvalidArgument, "maxEdge must be positive");
  const int longest = std::max(frame.width(), frame.height());
  if (longest <= maxEdge) return frame;
  const double f = static_cast<double>(maxEdge) / longest;
  const int w = std::clamp(static_cast<int>(std::lround(frame.width() * f)), 1, maxEdge);
  const int h = std::clamp(static_cast<int>(std::lround(frame.height() * f)), 1, maxEdge);
  Frame out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = static_cast<int>(static_cast<long long>(y) * frame.height() / h);
    for (int x = 0; x < w; ++x) {
      const int sx = static_cast<int>(static_cast<long long>(x) * frame.width() / w);
      out.set(x, y, frame.at(sx, sy));
    }
  }
  return out;
}

}  // namespace divex
