#include "tvcs/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvcs {
namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<unsigned char>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  return token;
}

long parse_header_int(const std::filesystem::path& path, const std::string& token, const char* what) {
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
    fail(path, std::string("malformed PGM header (") + what + ")");
  }
  return std::stol(token);
}

Image read_pgm(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") fail(path, "unsupported format (expected binary PGM 'P5' or PNG)");
  const long width = parse_header_int(path, next_token(bytes, pos), "width");
  const long height = parse_header_int(path, next_token(bytes, pos), "height");
  const long maxval = parse_header_int(path, next_token(bytes, pos), "maxval");
  if (width < 1 || height < 1) fail(path, "image has zero extent");
  if (maxval < 1 || maxval > 255) fail(path, "only 8-bit PGM (maxval <= 255) is supported");
  if (width != height) {
    fail(path, "non-square image (" + std::to_string(width) + "x" + std::to_string(height) + ")");
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (pos > bytes.size() || bytes.size() - pos < count) {
    fail(path, "truncated pixel data (" + std::to_string(bytes.size() > pos ? bytes.size() - pos : 0) +
                   " of " + std::to_string(count) + " bytes)");
  }
  Image img(width);
  for (std::size_t i = 0; i < count; ++i) {
    img.vec()[static_cast<Index>(i)] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
  }
  return img;
}

Image read_png(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&info, bytes.data(), bytes.size())) {
    fail(path, std::string("cannot decode PNG: ") + info.message);
  }
  if (info.format & PNG_FORMAT_FLAG_COLOR) {
    png_image_free(&info);
    fail(path, "color PNG is not supported (grayscale only)");
  }
  if (info.width != info.height) {
    const std::string dims = std::to_string(info.width) + "x" + std::to_string(info.height);
    png_image_free(&info);
    fail(path, "non-square image (" + dims + ")");
  }
  info.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(info));
  if (!png_image_finish_read(&info, nullptr, pixels.data(), 0, nullptr)) {
    fail(path, std::string("truncated or corrupt PNG: ") + info.message);
  }
  Image img(static_cast<Index>(info.width));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    img.vec()[static_cast<Index>(i)] = static_cast<double>(pixels[i]) / 255.0;
  }
  return img;
}

std::vector<std::uint8_t> quantize(const Image& u) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(u.size()));
  for (Index i = 0; i < u.size(); ++i) {
    const double v = std::clamp(u.vec()[i], 0.0, 1.0);
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
    return read_png(path, bytes);
  }
  return read_pgm(path, bytes);
}

void write_image(const std::filesystem::path& path, const Image& u) {
  const std::vector<std::uint8_t> pixels = quantize(u);
  const auto side = static_cast<png_uint_32>(u.side());
  if (lower_extension(path) == ".png") {
    png_image info{};
    info.version = PNG_IMAGE_VERSION;
    info.width = side;
    info.height = side;
    info.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&info, path.string().c_str(), 0, pixels.data(), 0, nullptr)) {
      fail(path, std::string("cannot write PNG: ") + info.message);
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << "P5\n" << side << ' ' << side << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) fail(path, "write failed");
}

}  // namespace tvcs
