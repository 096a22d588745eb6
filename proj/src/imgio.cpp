#include "bfkit/imgio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace bfkit {
namespace {

constexpr std::size_t kBf32HeaderSize = 16;
constexpr char kBf32Magic[4] = {'B', 'F', '3', '2'};

std::uint32_t load_u32le(std::span<const std::byte> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | std::to_integer<std::uint32_t>(bytes[at + i]);
  return v;
}

void store_u32le(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::uint64_t read_uint(const char* field) {
    skip_whitespace_and_comments();
    const std::size_t start = pos_;
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(peek())) {
      value = value * 10 + static_cast<std::uint64_t>(peek() - '0');
      if (value > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError(std::string("PGM ") + field + " overflows", start);
      }
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("PGM ") + field + " missing", start);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void consume_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(peek())) {
      throw FormatError("PGM header must end in a single whitespace byte", pos_);
    }
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  int peek() const { return std::to_integer<unsigned char>(bytes_[pos_]); }

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(peek())) {
        ++pos_;
      } else if (peek() == '#') {
        while (pos_ < bytes_.size() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 2;
};

Image2D decode_pgm(std::span<const std::byte> bytes) {
  PgmHeaderReader header(bytes);
  const std::uint64_t width = header.read_uint("width");
  const std::uint64_t height = header.read_uint("height");
  const std::size_t maxval_at = header.position();
  const std::uint64_t maxval = header.read_uint("maxval");
  header.consume_single_whitespace();
  if (width == 0 || height == 0) throw FormatError("PGM has zero dimension", 2);
  if (maxval == 0 || maxval > 65535) throw FormatError("PGM maxval out of range", maxval_at);

  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t offset = header.position();
  const std::uint64_t pixels = width * height;
  const std::uint64_t payload = pixels * sample_bytes;
  if (payload > bytes.size() - offset) {
    throw FormatError("PGM payload truncated: expected " + std::to_string(payload) + " bytes",
                      bytes.size());
  }

  std::vector<double> data(pixels);
  for (std::uint64_t i = 0; i < pixels; ++i) {
    const std::size_t at = offset + i * sample_bytes;
    std::uint32_t v = std::to_integer<std::uint32_t>(bytes[at]);
    if (sample_bytes == 2) v = (v << 8) | std::to_integer<std::uint32_t>(bytes[at + 1]);
    if (v > maxval) throw FormatError("PGM sample exceeds maxval", at);
    data[i] = static_cast<double>(v);
  }
  return Image2D(width, height, std::move(data));
}

Image2D decode_bf32(std::span<const std::byte> bytes) {
  if (bytes.size() < kBf32HeaderSize) throw FormatError("BF32 header truncated", bytes.size());
  const std::uint64_t width = load_u32le(bytes, 4);
  const std::uint64_t height = load_u32le(bytes, 8);
  if (load_u32le(bytes, 12) != 0) throw FormatError("BF32 reserved bytes must be zero", 12);
  if (width == 0 || height == 0) throw FormatError("BF32 has zero dimension", 4);

  const std::uint64_t pixels = width * height;
  const std::uint64_t payload = pixels * 4;
  if (payload > bytes.size() - kBf32HeaderSize) {
    throw FormatError("BF32 payload truncated: expected " + std::to_string(payload) + " bytes",
                      bytes.size());
  }

  std::vector<double> data(pixels);
  for (std::uint64_t i = 0; i < pixels; ++i) {
    const std::size_t at = kBf32HeaderSize + i * 4;
    const float f = std::bit_cast<float>(load_u32le(bytes, at));
    if (!std::isfinite(f) || f < 0.0f) throw FormatError("BF32 sample is negative or not finite", at);
    data[i] = static_cast<double>(f);
  }
  return Image2D(width, height, std::move(data));
}

void check_encodable(const Grid<double>& img, double max_value, const char* format) {
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img[i];
    if (!std::isfinite(v) || v < 0.0 || v > max_value) {
      throw RangeError(std::string("value ") + std::to_string(v) + " at index " +
                       std::to_string(i) + " is not representable in " + format);
    }
  }
}

std::vector<std::byte> encode_pgm(const Grid<double>& img, unsigned maxval) {
  check_encodable(img, static_cast<double>(maxval), maxval == 255 ? "pgm8" : "pgm16");
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n" +
      std::to_string(maxval) + "\n";
  std::vector<std::byte> out;
  out.reserve(header.size() + img.size() * (maxval == 255 ? 1 : 2));
  for (char c : header) out.push_back(static_cast<std::byte>(c));
  for (double v : img.values()) {
    // Quantization: round half away from zero.
    const auto q = static_cast<std::uint32_t>(std::lround(v));
    if (maxval > 255) out.push_back(static_cast<std::byte>(q >> 8));
    out.push_back(static_cast<std::byte>(q & 0xFFu));
  }
  return out;
}

std::vector<std::byte> encode_bf32(const Grid<double>& img) {
  check_encodable(img, std::numeric_limits<float>::max(), "bf32");
  if (img.width() > std::numeric_limits<std::uint32_t>::max() ||
      img.height() > std::numeric_limits<std::uint32_t>::max()) {
    throw RangeError("image dimensions exceed BF32 header range");
  }
  std::vector<std::byte> out;
  out.reserve(kBf32HeaderSize + img.size() * 4);
  for (char c : kBf32Magic) out.push_back(static_cast<std::byte>(c));
  store_u32le(out, static_cast<std::uint32_t>(img.width()));
  store_u32le(out, static_cast<std::uint32_t>(img.height()));
  store_u32le(out, 0);
  for (double v : img.values()) store_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

std::vector<std::byte> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

}  // namespace

ImageFormat parse_image_format(std::string_view name) {
  if (name == "pgm8") return ImageFormat::pgm8;
  if (name == "pgm16") return ImageFormat::pgm16;
  if (name == "bf32") return ImageFormat::bf32;
  throw ParameterError("unknown image format '" + std::string(name) + "'");
}

std::string_view format_name(ImageFormat format) {
  switch (format) {
    case ImageFormat::pgm8: return "pgm8";
    case ImageFormat::pgm16: return "pgm16";
    case ImageFormat::bf32: return "bf32";
  }
  return "unknown";
}

Image2D decode_image(std::span<const std::byte> bytes) {
  auto starts_with = [&](std::string_view magic) {
    if (bytes.size() < magic.size()) return false;
    for (std::size_t i = 0; i < magic.size(); ++i) {
      if (std::to_integer<char>(bytes[i]) != magic[i]) return false;
    }
    return true;
  };
  if (starts_with("BF32")) return decode_bf32(bytes);
  if (starts_with("P5")) return decode_pgm(bytes);
  throw FormatError("unrecognized image magic", 0);
}

std::vector<std::byte> encode_image(const Grid<double>& img, ImageFormat format) {
  switch (format) {
    case ImageFormat::pgm8: return encode_pgm(img, 255);
    case ImageFormat::pgm16: return encode_pgm(img, 65535);
    case ImageFormat::bf32: return encode_bf32(img);
  }
  throw ParameterError("unknown image format");
}

Image2D read_image(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_image(bytes);
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what(), e.offset());
  }
}

void write_image(const std::filesystem::path& path, const Grid<double>& img, ImageFormat format) {
  const auto bytes = encode_image(img, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Mask read_mask(const std::filesystem::path& path) {
  const Image2D img = read_image(path);
  Mask mask(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img[i] > 0.0 ? 1 : 0;
  return mask;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  Grid<double> img(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) img[i] = mask[i] ? 255.0 : 0.0;
  write_image(path, img, ImageFormat::pgm8);
}

double foreground_max(const Image2D& img, const Mask& mask) {
  require_same_shape(img, mask, "image vs mask");
  if (mask.count() == 0) throw DegenerateInputError("mask has no foreground pixels");
  double peak = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (mask[i]) peak = std::max(peak, img[i]);
  }
  return peak;
}

Image2D normalize(const Image2D& img, const Mask& mask) {
  const double peak = foreground_max(img, mask);
  if (!(peak > 0.0)) throw DegenerateInputError("foreground maximum is zero");
  Image2D out = img;
  for (auto& v : out.values()) v /= peak;
  return out;
}

}  // namespace bfkit
