#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "ustrack/error.hpp"
#include "ustrack/media.hpp"

namespace ustrack {

namespace {

std::vector<float> to_unit(std::span<const std::uint8_t> px) {
  std::vector<float> out(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) out[i] = static_cast<float>(px[i]) / 255.0f;
  return out;
}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

Frame decode_png(std::span<const std::uint8_t> bytes, int index) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw LoadError(std::string("png: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw LoadError(std::string("png: ") + image.message);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  if (!color) return Frame(index, w, h, to_unit(buf));

  // Rec.601 luma on the stored (gamma-encoded) values.
  std::vector<float> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double y = 0.299 * buf[3 * i] + 0.587 * buf[3 * i + 1] + 0.114 * buf[3 * i + 2];
    gray[i] = static_cast<float>(std::clamp(y / 255.0, 0.0, 1.0));
  }
  return Frame(index, w, h, std::move(gray));
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  std::vector<std::uint8_t> px(frame.data().size());
  std::transform(frame.data().begin(), frame.data().end(), px.begin(), quantize);

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr)) {
    throw Error(std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr)) {
    throw Error(std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

Frame decode_pgm(std::span<const std::uint8_t> bytes, int index) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw LoadError("pgm: malformed header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1 << 24) throw LoadError("pgm: header value too large");
    }
    return static_cast<int>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw LoadError("pgm: expected P5 or P2 magic");
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  const int w = read_int(), h = read_int(), maxval = read_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw LoadError("pgm: bad dimensions");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> px(n);
  if (binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + n * bps) throw LoadError("pgm: truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bps == 1 ? bytes[pos + i]
                                  : (unsigned(bytes[pos + 2 * i]) << 8) | bytes[pos + 2 * i + 1];
      px[i] = static_cast<float>(std::min<double>(v, maxval) / maxval);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = static_cast<float>(std::min(read_int(), maxval) / static_cast<double>(maxval));
    }
  }
  return Frame(index, w, h, std::move(px));
}

std::vector<std::uint8_t> encode_pgm(const Frame& frame) {
  const std::string header =
      "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + frame.data().size());
  for (float v : frame.data()) out.push_back(quantize(v));
  return out;
}

}  // namespace ustrack
