#include "shadowkit/datakit/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "shadowkit/errors.hpp"

namespace shadowkit::datakit {

namespace {

std::string encode(std::uint32_t w, std::uint32_t h, std::uint32_t format,
                   const std::vector<std::uint8_t>& buf) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = w;
  img.height = h;
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, buf.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("png encode failed: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, buf.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("png encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> decode(std::string_view bytes, std::uint32_t format,
                                 const std::string& name, std::uint32_t& w, std::uint32_t& h) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw DataError("malformed PNG '" + name + "': " + img.message);
  }
  img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw DataError("malformed PNG '" + name + "': " + img.message);
  }
  w = img.width;
  h = img.height;
  return buf;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::string encode_png(const Image& image) {
  if (image.channels != 3) throw std::invalid_argument("encode_png: expected a 3-channel image");
  std::vector<std::uint8_t> buf(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), buf.begin(), to_byte);
  return encode(static_cast<std::uint32_t>(image.width), static_cast<std::uint32_t>(image.height),
                PNG_FORMAT_RGB, buf);
}

std::string encode_png(const Mask& mask) {
  std::vector<std::uint8_t> buf(mask.bits.size());
  std::transform(mask.bits.begin(), mask.bits.end(), buf.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
  return encode(static_cast<std::uint32_t>(mask.width), static_cast<std::uint32_t>(mask.height),
                PNG_FORMAT_GRAY, buf);
}

Image decode_png_image(std::string_view bytes, const std::string& name) {
  std::uint32_t w = 0, h = 0;
  const auto buf = decode(bytes, PNG_FORMAT_RGB, name, w, h);
  Image out(w, h, 3);
  for (std::size_t i = 0; i < buf.size(); ++i) out.pixels[i] = buf[i] / 255.0;
  return out;
}

Mask decode_png_mask(std::string_view bytes, const std::string& name) {
  std::uint32_t w = 0, h = 0;
  const auto buf = decode(bytes, PNG_FORMAT_GRAY, name, w, h);
  Mask out(w, h);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (buf[i] != 0 && buf[i] != 255) {
      throw DataError("mask '" + name + "' has non-binary value " + std::to_string(buf[i]));
    }
    out.bits[i] = buf[i] ? 1 : 0;
  }
  return out;
}

}  // namespace shadowkit::datakit
